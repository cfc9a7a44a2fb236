//! Independent checks that share no code path with the construction
//! beyond polynomial evaluation.

pub mod quality;
pub mod transfer;
pub mod verify;

pub use quality::{bad_constant_estimate, quality, Estimate, Quality};
pub use transfer::{transference_check, TransferInstance, TransferReport};
pub use verify::{verify_certificate, QualityReport};
