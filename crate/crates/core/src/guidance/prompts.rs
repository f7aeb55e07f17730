use serde::{Deserialize, Serialize};

use super::rules::{match_rules_on, nearest_power_point};
use super::subject::{saliency_map, subject_from_saliency};
use super::{
    CompositionVerdict, GuidanceConfig, GuidanceError, SubjectRegion, SuggestionCatalog,
};
use crate::image::{stats_of_luma, LuminanceStats, RasterImage};
use crate::model::AestheticScores;

pub const TOO_BRIGHT: &str = "too bright";
pub const TOO_DARK: &str = "too dark";
pub const ENCOURAGEMENTS: [&str; 3] = ["awesome", "yes", "good shot"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Brightness,
    Direction,
    Encouragement,
    Suggestion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidancePrompt {
    pub kind: PromptKind,
    pub token: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

impl GuidancePrompt {
    fn new(kind: PromptKind, token: &str) -> Self {
        Self {
            kind,
            token: token.to_string(),
            detail: None,
        }
    }
}

/// Everything computed for one frame. `subject` and `composition` are `None`
/// when the frame has no salient subject.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameGuidance {
    pub prompts: Vec<GuidancePrompt>,
    pub luminance: LuminanceSummary,
    pub subject: Option<SubjectRegion>,
    pub composition: Option<CompositionVerdict>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LuminanceSummary {
    pub mean: f64,
    pub clipped_low_frac: f64,
    pub clipped_high_frac: f64,
}

/// "too dark" is checked before "too bright".
pub fn brightness_verdict(stats: &LuminanceStats, cfg: &GuidanceConfig) -> Option<&'static str> {
    if stats.mean < cfg.dark_mean || stats.clipped_low_frac > cfg.dark_clip_frac {
        Some(TOO_DARK)
    } else if stats.mean > cfg.bright_mean || stats.clipped_high_frac > cfg.bright_clip_frac {
        Some(TOO_BRIGHT)
    } else {
        None
    }
}

/// Token naming the way the subject must move to reach `target`.
fn direction_token(from: (f64, f64), target: (f64, f64)) -> &'static str {
    let (dx, dy) = (target.0 - from.0, target.1 - from.1);
    if dx.abs() >= dy.abs() {
        if dx > 0.0 {
            "right"
        } else {
            "left"
        }
    } else if dy > 0.0 {
        "down"
    } else {
        "up"
    }
}

/// FNV-1a over the frame quantized to 8 bits per channel.
fn content_hash(img: &RasterImage) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in img.pixels() {
        for c in p {
            h ^= (c.clamp(0.0, 1.0) * 255.0).round() as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Prompts for one sRGB frame, in the order brightness, direction or size,
/// encouragement.
pub fn frame_guidance(img: &RasterImage, cfg: &GuidanceConfig) -> Result<FrameGuidance, GuidanceError> {
    let map = saliency_map(img, cfg)?;
    let stats = stats_of_luma(&map.luma);
    let mut prompts = Vec::new();
    let brightness = brightness_verdict(&stats, cfg);
    if let Some(token) = brightness {
        prompts.push(GuidancePrompt::new(PromptKind::Brightness, token));
    }
    let (subject, composition) = match subject_from_saliency(&map, cfg) {
        Ok(s) => {
            let v = match_rules_on(&s, &map, cfg);
            (Some(s), Some(v))
        }
        Err(GuidanceError::NoSubject) => (None, None),
        Err(e) => return Err(e),
    };
    if let (Some(s), Some(v)) = (&subject, &composition) {
        let (target, d) = nearest_power_point(s.centroid);
        let movement = if s.area_frac < cfg.area_forward {
            Some("forward")
        } else if s.area_frac > cfg.area_backward {
            Some("backward")
        } else if !v.matched && d > cfg.direction_deadband {
            Some(direction_token(s.centroid, target))
        } else {
            None
        };
        if let Some(token) = movement {
            prompts.push(GuidancePrompt::new(PromptKind::Direction, token));
        }
        if v.matched && brightness.is_none() {
            let pick = (content_hash(img) % ENCOURAGEMENTS.len() as u64) as usize;
            prompts.push(GuidancePrompt::new(PromptKind::Encouragement, ENCOURAGEMENTS[pick]));
        }
    }
    Ok(FrameGuidance {
        prompts,
        luminance: LuminanceSummary {
            mean: stats.mean,
            clipped_low_frac: stats.clipped_low_frac,
            clipped_high_frac: stats.clipped_high_frac,
        },
        subject,
        composition,
    })
}

/// One suggestion per attribute whose display score is below the cutoff,
/// weakest first.
pub fn suggestions_from_scores(
    scores: &AestheticScores,
    catalog: &SuggestionCatalog,
    cfg: &GuidanceConfig,
) -> Vec<GuidancePrompt> {
    let mut weak: Vec<_> = scores
        .attributes()
        .filter(|&(a, _)| scores.display(a) < cfg.suggestion_cutoff)
        .collect();
    weak.sort_by(|a, b| a.1.total_cmp(&b.1));
    weak.into_iter()
        .map(|(a, _)| {
            let e = catalog.entry(a);
            GuidancePrompt {
                kind: PromptKind::Suggestion,
                token: e.id.clone(),
                detail: Some(e.text.clone()),
            }
        })
        .collect()
}
