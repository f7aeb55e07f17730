//! Closed-form shooting feedback: subject estimation from contrast and edge
//! saliency, composition-rule scoring, exposure verdicts and prompt tokens.
//!
//! Direction prompts name the way the *subject* has to move inside the frame.
//! "right" means the subject should end up further right in the picture.

mod catalog;
mod prompts;
mod rules;
mod subject;

pub use catalog::{SuggestionCatalog, SuggestionEntry, DEFAULT_CATALOG};
pub use prompts::{
    brightness_verdict, frame_guidance, suggestions_from_scores, FrameGuidance, GuidancePrompt,
    PromptKind, ENCOURAGEMENTS,
};
pub use rules::{match_rules, CompositionRule, CompositionVerdict, POWER_POINTS, SCORE_TIE_EPS};
pub use subject::{estimate_subject, saliency_map, SaliencyMap, SubjectRegion, ECCENTRICITY_CAP};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::ImageError;

#[derive(Debug, Error)]
pub enum GuidanceError {
    #[error("no salient subject in frame")]
    NoSubject,
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("suggestion catalog: {0}")]
    Catalog(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Every threshold used by the detectors and prompt logic. Distances are in
/// normalized frame coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuidanceConfig {
    /// Frames are downsampled so the longer side is at most this.
    pub analysis_max_dim: usize,
    pub min_input_side: usize,
    /// Subject pixels have saliency at least this fraction of the maximum.
    pub saliency_threshold: f64,
    pub peak_separation: f64,
    pub max_peaks: usize,
    /// Rule-of-thirds and center scores reach 0 at this distance.
    pub point_radius: f64,
    /// Mean mirrored luma difference at which the symmetry score reaches 0.
    pub symmetry_tolerance: f64,
    pub diagonal_tolerance_deg: f64,
    pub diagonal_min_eccentricity: f64,
    /// Border ring width as a fraction of each side.
    pub frame_ring_width: f64,
    /// Ring-to-interior gradient excess mapped to a framed score of 1.
    pub frame_ring_ratio: f64,
    /// Minimum doubled triangle area for three peaks to count as non-collinear.
    pub triangle_min_area: f64,
    pub triangle_full_width: f64,
    pub match_threshold: f64,
    /// Direction prompts fire only beyond this distance from a power point.
    pub direction_deadband: f64,
    pub area_forward: f64,
    pub area_backward: f64,
    pub dark_mean: f64,
    pub dark_clip_frac: f64,
    pub bright_mean: f64,
    pub bright_clip_frac: f64,
    /// Suggestions are emitted for display scores strictly below this.
    pub suggestion_cutoff: u8,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            analysis_max_dim: 256,
            min_input_side: 16,
            saliency_threshold: 0.5,
            peak_separation: 0.1,
            max_peaks: 3,
            point_radius: 1.0 / 6.0,
            symmetry_tolerance: 0.16,
            diagonal_tolerance_deg: 15.0,
            diagonal_min_eccentricity: 2.0,
            frame_ring_width: 0.1,
            frame_ring_ratio: 2.0,
            triangle_min_area: 0.01,
            triangle_full_width: 0.3,
            match_threshold: 0.5,
            direction_deadband: 1.0 / 12.0,
            area_forward: 0.05,
            area_backward: 0.6,
            dark_mean: 0.25,
            dark_clip_frac: 0.4,
            bright_mean: 0.75,
            bright_clip_frac: 0.25,
            suggestion_cutoff: 40,
        }
    }
}
