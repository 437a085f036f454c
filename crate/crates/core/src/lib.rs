//! Beam-management simulator for mmWave/THz downlink.
//!
//! Two strategies are modeled side by side:
//!
//! - **5G-BM**: SSB sector sweep followed by CSI-RS refinement over an
//!   oversampled DFT codebook, with beam direction quantized to the lattice.
//! - **CVBM**: the same SSB sweep, after which the beam is steered directly
//!   at a camera/LiDAR position estimate (no codebook quantization). Missed
//!   detections fall back to CSI-RS refinement.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: detections to camera-frame points and steering angles.
//! - [`array`]: steering vectors and the oversampled DFT codebook.
//! - [`channel`]: the LoS link budget, from path loss to achievable rate.
//! - [`protocol`]: per-session state machines and the latency/energy ledger.
//! - [`harness`]: config-driven grid runs and their output files.

pub mod array;
pub mod channel;
pub mod geometry;
pub mod harness;
pub mod protocol;

pub use array::{ArrayGeometry, BeamWeights, Codebook};
pub use channel::{ChannelRealization, LinkBudget};
pub use geometry::{CameraIntrinsics, CartesianPoint, DetectionRecord, LocalizationNoiseModel, SphericalPoint};
pub use harness::config::ExperimentConfig;
pub use protocol::{BeamSession, EventLedger, ProtocolConfig, SsbGrid, Strategy};
