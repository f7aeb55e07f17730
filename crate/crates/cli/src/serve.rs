use std::io::Write;
use std::sync::Arc;

use photoguide_service::{Service, ServiceConfig, Store, SystemClock};
use serde_json::json;

use crate::commands::load_model;
use crate::{CliError, Report, ServeArgs};

async fn shutdown_signal() {
    let ctrl_c = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            log::error!("cannot listen for ctrl-c: {e}");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(e) => {
                log::error!("cannot listen for SIGTERM: {e}");
                std::future::pending::<()>().await;
            }
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    log::info!("shutdown requested");
}

/// Loads the checkpoint and store, then serves until SIGINT or SIGTERM.
/// The bound address is printed on stdout before the first request is
/// accepted, so `--port 0` is usable.
pub fn serve(args: &ServeArgs, json_out: bool) -> Result<Report, CliError> {
    let net = load_model(&args.model)?;
    let store = Store::open(&args.store)
        .map_err(|e| CliError::Domain(format!("cannot open store {}: {e}", args.store.display())))?;
    let n_photos = store.photos().count();
    let svc = Arc::new(Service::new(store, Box::new(net), Box::new(SystemClock), ServiceConfig::default()));

    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(CliError::domain)?;
    let addr = rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .map_err(|e| CliError::Domain(format!("cannot bind {}:{}: {e}", args.host, args.port)))?;
        let addr = listener.local_addr().map_err(CliError::domain)?;
        let line = if json_out {
            json!({ "event": "listening", "addr": addr.to_string() }).to_string()
        } else {
            format!("listening on http://{addr}")
        };
        let mut out = std::io::stdout().lock();
        writeln!(out, "{line}").and_then(|_| out.flush()).map_err(CliError::domain)?;
        drop(out);
        log::info!("serving {} photos from {}", n_photos, args.store.display());
        photoguide_service::serve(listener, svc, shutdown_signal())
            .await
            .map_err(CliError::domain)?;
        Ok::<_, CliError>(addr)
    })?;
    Ok(Report {
        text: format!("stopped serving on {addr}"),
        json: json!({ "event": "stopped", "addr": addr.to_string() }),
    })
}
