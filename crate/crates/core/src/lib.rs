//! mmWave MIMO hybrid beamforming simulator built around a POS-SW analog
//! front end: phase over-samplers emitting a fixed N-ary phase set
//! {0, 2pi/N, ..., 2pi(N-1)/N} routed to the antennas by a switch network.
//!
//! The crate covers the full desk-scale experiment loop:
//!
//! - clustered mmWave channel generation with ULA steering vectors ([`channel`])
//! - precoder/combiner design under discrete phase alphabets, plus
//!   infinite-resolution and full-digital baselines ([`beamforming`])
//! - spectral efficiency, transmitter power, energy efficiency and beam
//!   patterns ([`metrics`])
//! - open-loop compressed-sensing channel estimation via OMP ([`estimation`])
//! - a config-driven Monte Carlo harness with CSV/JSON output ([`harness`])

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex<f64>;

/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex>;

/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<Complex>;
