//! Phoneme difficulty scoring from Monte-Carlo-Dropout transcription ensembles.
//!
//! The pipeline aligns each of the M stochastic phoneme hypotheses of an
//! utterance to its reference, measures per-instance entropy and agreement,
//! aggregates them per phoneme type, and composes a normalized difficulty
//! score. Utterance means of that score become oversampling weights in
//! [1, 5] for personalization fine-tuning, and scores can be validated
//! against clinical difficulty labels with precision–recall curves.
//!
//! All inputs and outputs are plain files (see [`manifest_io`]), so any ASR
//! backend can feed the pipeline; [`simspeaker`] provides a synthetic one
//! with known ground truth.

pub mod align;
pub mod clinical;
pub mod error;
pub mod manifest_io;
pub mod metrics;
pub mod phdscore;
pub mod phoneme;
pub mod pipeline;
pub mod rechain;
pub mod sampler;
pub mod simspeaker;
pub mod uncertainty;

pub use error::{Error, Result};
pub use phoneme::{Inventory, NeighborMap, Phoneme, EPSILON};
