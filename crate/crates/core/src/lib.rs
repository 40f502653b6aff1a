//! ENF fingerprinting for deepfake detection.
//!
//! The crate covers the whole pipeline: synthetic ENF-bearing media
//! ([`media_synth`]), multi-harmonic ENF estimation ([`enf_estimation`]),
//! proof-of-ENF committee consensus ([`consensus`]), sliding-window detection
//! ([`detection`]) and the scenario, benchmark and ROC drivers ([`harness`]).

pub mod consensus;
pub mod detection;
pub mod enf_estimation;
pub mod error;
pub mod harness;
pub mod media_synth;
pub mod seed;
pub mod series;
pub mod stream_io;

pub use error::{Error, Result};
pub use series::EnfSeries;
