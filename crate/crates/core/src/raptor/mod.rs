//! Raptor code: LDPC precode followed by an LT code, decoded by sum-product
//! message passing over the joint graph.

mod check;
mod decoder;
mod degree;
mod lt;
mod precode;

pub use check::{check_code, DEFAULT_CHECK_WIDTH};
pub use decoder::{bp_decode, channel_llr, DecodeOutcome, DecodeStatus, DecoderConfig, RaptorDecoder, DEFAULT_MAX_ITERS, LLR_CLAMP};
pub use degree::{sample_degree, DegreeDistribution, MASS_TOLERANCE};
pub use lt::{lt_encode, RaptorBlockPlan};
pub use precode::{Precode, DEFAULT_COLUMN_WEIGHT, DEFAULT_K, DEFAULT_K_PRIME};

/// Log-likelihood ratios `log P(bit = 0) / P(bit = 1)`.
pub type LlrVector<F = f64> = Vec<F>;
