use std::time::{Duration, Instant};

use photoguide_core::guidance::{estimate_subject, frame_guidance, GuidanceConfig, PromptKind};
use photoguide_core::image::RasterImage;
use photoguide_core::synth::square_blob;
use proptest::prelude::*;

fn blob_strategy() -> impl Strategy<Value = RasterImage> {
    (
        0.15f64..0.85,
        0.15f64..0.85,
        0.1f64..0.35,
        0.05f64..0.6,
        0.4f64..0.95,
        prop_oneof![Just(96usize), Just(128), Just(200)],
    )
        .prop_map(|(cx, cy, side, bg, fg, size)| square_blob(size, size, cx, cy, side, [bg; 3], [fg; 3]))
}

fn mirrored_token(t: &str) -> &str {
    match t {
        "left" => "right",
        "right" => "left",
        other => other,
    }
}

fn direction(img: &RasterImage) -> Option<String> {
    frame_guidance(img, &GuidanceConfig::default())
        .unwrap()
        .prompts
        .into_iter()
        .find(|p| p.kind == PromptKind::Direction)
        .map(|p| p.token)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn mirroring_swaps_left_and_right(img in blob_strategy()) {
        let a = direction(&img);
        let b = direction(&img.mirror_horizontal());
        prop_assert_eq!(a.as_deref().map(mirrored_token), b.as_deref());
    }

    #[test]
    fn at_most_one_brightness_and_direction(
        seed in any::<u64>(),
        w in 16usize..120,
        h in 16usize..120,
    ) {
        let mut state = seed | 1;
        let img = RasterImage::from_fn(w, h, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let v = (state % 1000) as f64 / 999.0;
            [v, v * 0.5, 1.0 - v]
        })
        .unwrap();
        let g = frame_guidance(&img, &GuidanceConfig::default()).unwrap();
        let count = |k| g.prompts.iter().filter(|p| p.kind == k).count();
        prop_assert!(count(PromptKind::Brightness) <= 1);
        prop_assert!(count(PromptKind::Direction) <= 1);
        if let Some(v) = g.composition {
            prop_assert_eq!(v.scores.len(), 6);
            prop_assert!(v.scores.values().all(|s| (0.0..=1.0).contains(s)));
        }
    }

    #[test]
    fn blob_centroid_is_recovered(
        cx in 0.2f64..0.8,
        cy in 0.2f64..0.8,
        side in 0.08f64..0.25,
    ) {
        let img = square_blob(128, 128, cx, cy, side, [0.1; 3], [0.9; 3]);
        // analytic centroid of the rasterized square
        let half = side * 128.0 / 2.0;
        let (px, py) = (cx * 128.0, cy * 128.0);
        let inside: Vec<_> = (0..128usize * 128)
            .map(|i| ((i % 128) as f64 + 0.5, (i / 128) as f64 + 0.5))
            .filter(|(x, y)| (x - px).abs() <= half && (y - py).abs() <= half)
            .collect();
        let n = inside.len() as f64;
        let ex = inside.iter().map(|p| p.0).sum::<f64>() / n / 128.0;
        let ey = inside.iter().map(|p| p.1).sum::<f64>() / n / 128.0;
        let s = estimate_subject(&img, &GuidanceConfig::default()).unwrap();
        prop_assert!((s.centroid.0 - ex).abs() <= 0.02 && (s.centroid.1 - ey).abs() <= 0.02,
            "{:?} vs ({ex}, {ey})", s.centroid);
    }
}

#[test]
fn frame_guidance_is_real_time_at_256() {
    let img = square_blob(256, 256, 0.4, 0.6, 0.3, [0.5; 3], [1.0; 3]);
    let cfg = GuidanceConfig::default();
    frame_guidance(&img, &cfg).unwrap();
    let runs = 10;
    let start = Instant::now();
    for _ in 0..runs {
        frame_guidance(&img, &cfg).unwrap();
    }
    let per_frame = start.elapsed() / runs;
    assert!(per_frame <= Duration::from_millis(50), "{per_frame:?} per frame");
}
