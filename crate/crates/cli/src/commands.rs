use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use photoguide_core::guidance::{frame_guidance, suggestions_from_scores, GuidanceConfig, SuggestionCatalog};
use photoguide_core::image::{self, RasterImage};
use photoguide_core::model::{self, display_score, AestheticNet, DatasetManifest, NetworkConfig};
use photoguide_core::replay::{self, read_table1, read_table2, ClaimSet, StatsReport};
use serde_json::json;

use crate::{CliError, EvalArgs, EvalSplit, GuideArgs, Report, ScoreArgs, StatsArgs, TrainArgs};

fn load_image(path: &Path) -> Result<RasterImage, CliError> {
    image::load(path).map_err(|e| CliError::Domain(format!("cannot read image {}: {e}", path.display())))
}

pub(crate) fn load_model(path: &Path) -> Result<AestheticNet, CliError> {
    AestheticNet::load(path).map_err(|e| CliError::Domain(format!("cannot load checkpoint {}: {e}", path.display())))
}

fn load_manifest(path: &Path) -> Result<DatasetManifest, CliError> {
    let m = DatasetManifest::load(path)
        .map_err(|e| CliError::Domain(format!("cannot read manifest {}: {e}", path.display())))?;
    if m.skipped_rows > 0 {
        log::warn!("skipped {} malformed manifest rows in {}", m.skipped_rows, path.display());
    }
    Ok(m)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"))
}

pub fn score(args: &ScoreArgs) -> Result<Report, CliError> {
    let net = match &args.model {
        Some(path) => {
            let net = load_model(path)?;
            if let Some(cs) = args.colorspace {
                if cs != net.config.colorspace {
                    return Err(CliError::Usage(format!(
                        "--colorspace {cs} does not match the checkpoint's {}",
                        net.config.colorspace
                    )));
                }
            }
            net
        }
        None => {
            let mut config = NetworkConfig {
                seed: args.seed,
                ..NetworkConfig::default()
            };
            if let Some(cs) = args.colorspace {
                config.colorspace = cs;
            }
            log::warn!("no --model given; scoring with an untrained network (seed {})", args.seed);
            AestheticNet::init(config).map_err(CliError::domain)?
        }
    };
    let img = load_image(&args.image)?;
    let scores = net.forward_score(&img).map_err(CliError::domain)?;
    let suggestions = suggestions_from_scores(&scores, &SuggestionCatalog::default(), &GuidanceConfig::default());
    let ranked = scores.ranked_attributes();

    let mut text = String::new();
    writeln!(text, "{:<19}{:>4}", "overall", scores.display_overall()).unwrap();
    for (a, v) in &ranked {
        writeln!(text, "{:<19}{:>4}", a.key(), display_score(*v)).unwrap();
    }
    if !suggestions.is_empty() {
        writeln!(text, "suggestions:").unwrap();
        for s in &suggestions {
            writeln!(text, "  {}: {}", s.token, s.detail.as_deref().unwrap_or("")).unwrap();
        }
    }
    let json = json!({
        "image": args.image,
        "model": args.model,
        "colorspace": net.config.colorspace,
        "scores": scores,
        "display": {
            "overall": scores.display_overall(),
            "ranked": ranked.iter().map(|(a, v)| json!({ "attribute": a, "display": display_score(*v), "value": v })).collect::<Vec<_>>(),
        },
        "suggestions": suggestions.iter().map(|s| json!({ "id": s.token, "text": s.detail })).collect::<Vec<_>>(),
    });
    Ok(Report { text, json })
}

pub fn guide(args: &GuideArgs) -> Result<Report, CliError> {
    let img = load_image(&args.image)?;
    let g = frame_guidance(&img, &GuidanceConfig::default()).map_err(CliError::domain)?;
    let mut text = String::new();
    let tokens: Vec<&str> = g.prompts.iter().map(|p| p.token.as_str()).collect();
    writeln!(text, "prompts: {}", if tokens.is_empty() { "(none)".to_string() } else { tokens.join(", ") }).unwrap();
    let l = &g.luminance;
    writeln!(
        text,
        "luminance: mean {:.3}, clipped low {:.3}, clipped high {:.3}",
        l.mean, l.clipped_low_frac, l.clipped_high_frac
    )
    .unwrap();
    match (&g.subject, &g.composition) {
        (Some(s), Some(c)) => {
            writeln!(
                text,
                "subject: centroid ({:.3}, {:.3}), area {:.3}, orientation {:.1} deg",
                s.centroid.0, s.centroid.1, s.area_frac, s.orientation_deg
            )
            .unwrap();
            let best = c.best.map_or_else(|| "none".to_string(), |r| r.to_string());
            writeln!(text, "composition: {best}{}", if c.matched { " (matched)" } else { " (no rule matched)" }).unwrap();
            for (rule, score) in &c.scores {
                writeln!(text, "  {:<14}{score:.3}", rule.to_string()).unwrap();
            }
        }
        _ => writeln!(text, "subject: none").unwrap(),
    }
    let json = serde_json::to_value(&g).map_err(CliError::domain)?;
    Ok(Report { text, json })
}

pub fn train(args: &TrainArgs) -> Result<Report, CliError> {
    let manifest = load_manifest(&args.data)?;
    let d = NetworkConfig::default();
    let config = NetworkConfig {
        seed: args.seed.unwrap_or(d.seed),
        loss_weight_lambda: args.lambda.unwrap_or(d.loss_weight_lambda),
        epochs: args.epochs.unwrap_or(d.epochs),
        lr: args.lr.unwrap_or(d.lr),
        colorspace: args.colorspace.unwrap_or(d.colorspace),
        ..d
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let (net, report) = model::train(&manifest, config).map_err(CliError::domain)?;
    if report.skipped > 0 {
        log::warn!("skipped {} records", report.skipped);
    }
    net.save(&args.out)
        .map_err(|e| CliError::Domain(format!("cannot write checkpoint {}: {e}", args.out.display())))?;

    let mut text = String::new();
    writeln!(text, "trained on {} records for {} epochs", report.n_train, report.epoch_losses.len()).unwrap();
    writeln!(text, "final train loss {:.6}", report.final_train_loss).unwrap();
    match &report.test {
        Some(t) => writeln!(
            text,
            "test: n {}, spearman {}, accuracy {:.4}",
            t.n,
            fmt_opt(t.spearman_overall),
            t.accuracy
        )
        .unwrap(),
        None => writeln!(text, "test: empty split").unwrap(),
    }
    writeln!(text, "skipped {}", report.skipped).unwrap();
    writeln!(text, "checkpoint written to {}", args.out.display()).unwrap();
    let mut json = serde_json::to_value(&report).map_err(CliError::domain)?;
    json["checkpoint"] = json!(args.out);
    Ok(Report { text, json })
}

pub fn eval(args: &EvalArgs) -> Result<Report, CliError> {
    let manifest = load_manifest(&args.data)?;
    let net = load_model(&args.model)?;
    let records: Vec<_> = match args.split {
        EvalSplit::All => manifest.records.iter().collect(),
        EvalSplit::Test => manifest.split(net.config.split_ratio, args.seed.unwrap_or(net.config.seed)).1,
    };
    let (report, skipped) = model::evaluate(&net, records).map_err(CliError::domain)?;
    let skipped = skipped + manifest.skipped_rows;
    if skipped > 0 {
        log::warn!("skipped {skipped} records");
    }
    let mut text = String::new();
    writeln!(text, "n {}", report.n).unwrap();
    writeln!(text, "spearman overall {}", fmt_opt(report.spearman_overall)).unwrap();
    writeln!(text, "accuracy {:.4}", report.accuracy).unwrap();
    for a in &report.attributes {
        writeln!(text, "  {:<19}{}", a.attribute.key(), fmt_opt(a.spearman)).unwrap();
    }
    writeln!(text, "mean loss {:.6}", report.mean_loss).unwrap();
    writeln!(text, "skipped {skipped}").unwrap();
    let mut json = serde_json::to_value(&report).map_err(CliError::domain)?;
    json["skipped"] = json!(skipped);
    Ok(Report { text, json })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))
}

pub fn stats_report(args: &StatsArgs) -> Result<StatsReport, CliError> {
    let t1 = match &args.table1 {
        Some(p) => read_table1(read_text(p)?.as_bytes()),
        None => read_table1(replay::TABLE1_CSV.as_bytes()),
    }
    .map_err(CliError::domain)?;
    let t2 = match &args.table2 {
        Some(p) => read_table2(read_text(p)?.as_bytes()),
        None => read_table2(replay::TABLE2_CSV.as_bytes()),
    }
    .map_err(CliError::domain)?;
    let claims = match &args.claims {
        Some(p) => ClaimSet::parse(&read_text(p)?),
        None => Ok(ClaimSet::default()),
    }
    .map_err(CliError::domain)?;
    replay::replay(Some(&t1), Some(&t2), &claims).map_err(CliError::domain)
}

pub fn stats(args: &StatsArgs) -> Result<Report, CliError> {
    let r = stats_report(args)?;
    let mut text = String::new();
    if let Some(t) = &r.table1 {
        writeln!(text, "before/after ({} subjects)", t.n).unwrap();
        writeln!(text, "  subject before after diff").unwrap();
        for d in &t.diffs {
            let flag = if d.printed_mismatch { "  printed diff disagrees" } else { "" };
            writeln!(text, "  {:>7} {:>6} {:>5} {:>4}{flag}", d.subject, d.before, d.after, d.diff).unwrap();
        }
        writeln!(text, "  mean diff {:.2}", t.mean_diff).unwrap();
        writeln!(text, "  max diff {}", t.max_diff).unwrap();
        writeln!(text, "  improved {}/{} ({:.1}%)", t.improved, t.n, 100.0 * t.improved_frac).unwrap();
    }
    if let Some(t) = &r.table2 {
        writeln!(text, "agreement with professionals").unwrap();
        for a in t.per_professional.iter().chain([&t.overall]) {
            writeln!(text, "  {:<16}{:>3}/{:<3} {:.1}%", a.professional, a.count, a.n, 100.0 * a.rate).unwrap();
        }
    }
    writeln!(text, "quoted figures").unwrap();
    for c in &r.claims {
        let (computed, verdict) = match (c.computed, c.consistent) {
            (Some(v), Some(true)) => (format!("{v:.4}"), "ok"),
            (Some(v), _) => (format!("{v:.4}"), "INCONSISTENT"),
            (None, _) => ("-".to_string(), "not recomputable"),
        };
        writeln!(text, "  {:<30} claimed {:<8} computed {:<8} {verdict}", c.id, c.claimed, computed).unwrap();
    }
    let flagged: Vec<&str> = r.inconsistent().map(|c| c.id.as_str()).collect();
    let mut json = serde_json::to_value(&r).map_err(CliError::domain)?;
    json["inconsistent"] = json!(flagged);
    Ok(Report { text, json })
}
