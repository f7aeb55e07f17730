//! Aesthetic scoring and real-time shooting guidance for photographs.
//!
//! The crate is split bottom-up: [`image`] holds rasters and color math,
//! [`nn`] a small f64 tensor stack with hand-written backward passes,
//! [`model`] the multi-task scoring network built from it, and [`guidance`]
//! the closed-form composition and exposure feedback.

pub mod guidance;
pub mod image;
pub mod nn;
pub mod replay;
pub mod model;
pub mod synth;
