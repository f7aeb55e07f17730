use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::subject::SaliencyMap;
use super::{GuidanceConfig, SubjectRegion};

/// Rule-of-thirds intersections, in tie-break order.
pub const POWER_POINTS: [(f64, f64); 4] = [
    (1.0 / 3.0, 1.0 / 3.0),
    (2.0 / 3.0, 1.0 / 3.0),
    (1.0 / 3.0, 2.0 / 3.0),
    (2.0 / 3.0, 2.0 / 3.0),
];

/// Scores closer than this count as tied, so rounding noise cannot override
/// the priority order.
pub const SCORE_TIE_EPS: f64 = 1e-9;

/// Declaration order is the tie-break priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CompositionRule {
    RuleOfThirds,
    Center,
    Symmetric,
    Diagonal,
    Framed,
    Triangle,
}

impl CompositionRule {
    pub const ALL: [CompositionRule; 6] = [
        CompositionRule::RuleOfThirds,
        CompositionRule::Center,
        CompositionRule::Symmetric,
        CompositionRule::Diagonal,
        CompositionRule::Framed,
        CompositionRule::Triangle,
    ];
}

impl fmt::Display for CompositionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionVerdict {
    pub scores: BTreeMap<CompositionRule, f64>,
    /// Highest-scoring rule; `None` when every score is 0.
    pub best: Option<CompositionRule>,
    pub matched: bool,
}

impl CompositionVerdict {
    pub fn score(&self, rule: CompositionRule) -> f64 {
        self.scores[&rule]
    }

    pub fn from_scores(scores: BTreeMap<CompositionRule, f64>, match_threshold: f64) -> Self {
        let mut best: Option<(CompositionRule, f64)> = None;
        for rule in CompositionRule::ALL {
            let s = scores[&rule];
            if s > best.map_or(0.0, |b| b.1 + SCORE_TIE_EPS) {
                best = Some((rule, s));
            }
        }
        CompositionVerdict {
            scores,
            best: best.map(|b| b.0),
            matched: best.is_some_and(|b| b.1 >= match_threshold),
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Closest power point; earlier entries of [`POWER_POINTS`] win ties (within
/// [`SCORE_TIE_EPS`]).
pub(crate) fn nearest_power_point(c: (f64, f64)) -> ((f64, f64), f64) {
    let mut best = (POWER_POINTS[0], dist(c, POWER_POINTS[0]));
    for &p in &POWER_POINTS[1..] {
        let d = dist(c, p);
        if d < best.1 - SCORE_TIE_EPS {
            best = (p, d);
        }
    }
    best
}

fn falloff(d: f64, radius: f64) -> f64 {
    (1.0 - d / radius).max(0.0)
}

fn mirror_difference(map: &SaliencyMap) -> f64 {
    let (w, h) = (map.width, map.height);
    let mut total = 0.0;
    for y in 0..h {
        let row = &map.luma[y * w..(y + 1) * w];
        for x in 0..w {
            total += (row[x] - row[w - 1 - x]).abs();
        }
    }
    total / (w * h) as f64
}

fn diagonal_score(s: &SubjectRegion, cfg: &GuidanceConfig) -> f64 {
    if s.eccentricity < cfg.diagonal_min_eccentricity {
        return 0.0;
    }
    let off = (s.orientation_deg - 45.0).abs().min((s.orientation_deg + 45.0).abs());
    falloff(off, cfg.diagonal_tolerance_deg)
}

fn framed_score(map: &SaliencyMap, cfg: &GuidanceConfig) -> f64 {
    let (w, h) = (map.width, map.height);
    let grad = crate::image::sobel_of_luma(&map.luma, w, h).magnitude;
    let rx = ((cfg.frame_ring_width * w as f64).round() as usize).max(1);
    let ry = ((cfg.frame_ring_width * h as f64).round() as usize).max(1);
    let (mut ring, mut n_ring, mut inner, mut n_inner) = (0.0, 0usize, 0.0, 0usize);
    for y in 0..h {
        for x in 0..w {
            let g = grad[y * w + x];
            if x < rx || x >= w.saturating_sub(rx) || y < ry || y >= h.saturating_sub(ry) {
                ring += g;
                n_ring += 1;
            } else {
                inner += g;
                n_inner += 1;
            }
        }
    }
    if n_ring == 0 || n_inner == 0 {
        return 0.0;
    }
    let (ring, inner) = (ring / n_ring as f64, inner / n_inner as f64);
    if inner == 0.0 {
        return if ring > 0.0 { 1.0 } else { 0.0 };
    }
    ((ring / inner - 1.0) / cfg.frame_ring_ratio).clamp(0.0, 1.0)
}

fn triangle_score(peaks: &[(f64, f64)], cfg: &GuidanceConfig) -> f64 {
    let [a, b, c] = match peaks {
        [a, b, c] => [*a, *b, *c],
        _ => return 0.0,
    };
    let doubled_area = ((b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1)).abs();
    if doubled_area < cfg.triangle_min_area {
        return 0.0;
    }
    let mut pts = [a, b, c];
    pts.sort_by(|p, q| p.1.total_cmp(&q.1));
    let (apex, base) = (pts[0], [pts[1], pts[2]]);
    // y grows downward: the apex must sit strictly higher than both base peaks
    if !(apex.1 < base[0].1 && apex.1 < base[1].1) {
        return 0.0;
    }
    ((base[0].0 - base[1].0).abs() / cfg.triangle_full_width).clamp(0.0, 1.0)
}

/// Scores all six rules for a frame whose saliency has already been computed.
pub(crate) fn match_rules_on(
    subject: &SubjectRegion,
    map: &SaliencyMap,
    cfg: &GuidanceConfig,
) -> CompositionVerdict {
    let (_, d_thirds) = nearest_power_point(subject.centroid);
    let scores = BTreeMap::from([
        (CompositionRule::RuleOfThirds, falloff(d_thirds, cfg.point_radius)),
        (CompositionRule::Center, falloff(dist(subject.centroid, (0.5, 0.5)), cfg.point_radius)),
        (
            CompositionRule::Symmetric,
            falloff(mirror_difference(map), cfg.symmetry_tolerance),
        ),
        (CompositionRule::Diagonal, diagonal_score(subject, cfg)),
        (CompositionRule::Framed, framed_score(map, cfg)),
        (CompositionRule::Triangle, triangle_score(&subject.peaks, cfg)),
    ]);
    CompositionVerdict::from_scores(scores, cfg.match_threshold)
}

pub fn match_rules(
    subject: &SubjectRegion,
    img: &crate::image::RasterImage,
    cfg: &GuidanceConfig,
) -> Result<CompositionVerdict, super::GuidanceError> {
    let map = super::saliency_map(img, cfg)?;
    Ok(match_rules_on(subject, &map, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidance::estimate_subject;
    use crate::image::RasterImage;
    use crate::synth::square_blob;

    const GRAY: [f64; 3] = [0.5; 3];
    const WHITE: [f64; 3] = [1.0; 3];

    fn verdict(img: &RasterImage) -> CompositionVerdict {
        let cfg = GuidanceConfig::default();
        match_rules(&estimate_subject(img, &cfg).unwrap(), img, &cfg).unwrap()
    }

    fn with_centroid(c: (f64, f64)) -> SubjectRegion {
        SubjectRegion {
            bbox: [0.0, 0.0, 1.0, 1.0],
            centroid: c,
            area_frac: 0.1,
            orientation_deg: 0.0,
            eccentricity: 1.0,
            peaks: vec![],
        }
    }

    #[test]
    fn blob_on_a_power_point() {
        let v = verdict(&square_blob(255, 255, 1.0 / 3.0, 1.0 / 3.0, 0.3, GRAY, WHITE));
        assert!((v.score(CompositionRule::RuleOfThirds) - 1.0).abs() < 1e-9, "{v:?}");
        assert_eq!(v.best, Some(CompositionRule::RuleOfThirds));
        assert!(v.matched);
    }

    #[test]
    fn centered_blob_prefers_center() {
        let v = verdict(&square_blob(256, 256, 0.5, 0.5, 0.3, GRAY, WHITE));
        assert_eq!(v.score(CompositionRule::RuleOfThirds), 0.0);
        assert!(v.score(CompositionRule::Center) + SCORE_TIE_EPS >= v.score(CompositionRule::Symmetric), "{v:?}");
        assert_eq!(v.best, Some(CompositionRule::Center));
    }

    #[test]
    fn thirds_distance_arithmetic() {
        // centre to the nearest power point is sqrt(2)/6 > 1/6
        let d = nearest_power_point((0.5, 0.5)).1;
        assert!((d - 2f64.sqrt() / 6.0).abs() < 1e-15);
        assert_eq!(nearest_power_point((0.5, 0.5)).0, POWER_POINTS[0]);
        assert_eq!(nearest_power_point((0.7, 0.5)).0, POWER_POINTS[1]);
    }

    #[test]
    fn mirror_symmetric_frame_scores_one() {
        let img = RasterImage::from_fn(200, 120, |x, y| {
            let u = (x as f64 - 99.5).abs() / 100.0;
            [u, (y as f64 / 120.0), 0.3 + 0.5 * u * u]
        })
        .unwrap();
        assert_eq!(verdict(&img).score(CompositionRule::Symmetric), 1.0);
    }

    #[test]
    fn framed_by_a_busy_border() {
        let img = RasterImage::from_fn(100, 100, |x, y| {
            let border = !(10..90).contains(&x) || !(10..90).contains(&y);
            if border && (x / 2 + y / 2) % 2 == 0 {
                WHITE
            } else if (40..60).contains(&x) && (40..60).contains(&y) {
                [0.8; 3]
            } else {
                [0.2; 3]
            }
        })
        .unwrap();
        assert_eq!(verdict(&img).score(CompositionRule::Framed), 1.0);
    }

    #[test]
    fn triangle_needs_an_apex_above_its_base() {
        let cfg = GuidanceConfig::default();
        assert_eq!(triangle_score(&[(0.5, 0.2), (0.3, 0.7), (0.7, 0.7)], &cfg), 1.0);
        assert!((triangle_score(&[(0.5, 0.2), (0.4, 0.7), (0.55, 0.8)], &cfg) - 0.5).abs() < 1e-12);
        // inverted and collinear
        assert_eq!(triangle_score(&[(0.5, 0.8), (0.3, 0.3), (0.7, 0.3)], &cfg), 0.0);
        assert_eq!(triangle_score(&[(0.1, 0.1), (0.5, 0.5), (0.9, 0.9)], &cfg), 0.0);
        assert_eq!(triangle_score(&[(0.5, 0.2), (0.3, 0.7)], &cfg), 0.0);
    }

    #[test]
    fn diagonal_gated_by_eccentricity() {
        let cfg = GuidanceConfig::default();
        let mut s = with_centroid((0.5, 0.5));
        s.orientation_deg = -40.0;
        s.eccentricity = 1.5;
        assert_eq!(diagonal_score(&s, &cfg), 0.0);
        s.eccentricity = 3.0;
        assert!((diagonal_score(&s, &cfg) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn priority_breaks_ties() {
        let mut scores: BTreeMap<_, _> = CompositionRule::ALL.iter().map(|&r| (r, 0.0)).collect();
        scores.insert(CompositionRule::Triangle, 0.7);
        scores.insert(CompositionRule::Symmetric, 0.7);
        let v = CompositionVerdict::from_scores(scores.clone(), 0.5);
        assert_eq!((v.best, v.matched), (Some(CompositionRule::Symmetric), true));
        let zeros: BTreeMap<_, _> = CompositionRule::ALL.iter().map(|&r| (r, 0.0)).collect();
        let v = CompositionVerdict::from_scores(zeros, 0.5);
        assert_eq!((v.best, v.matched), (None, false));
    }
}
