//! Link-level simulation of pulse index modulation (PIM) and its generalized
//! multi-pulse variant (GPIM) over flat Rayleigh fading.
//!
//! Information bits pick which orthogonal Hermite-Gaussian pulse(s) carry an
//! M-ary symbol. The crate covers the full chain:
//!
//! ```text
//! bits -> lookup table + constellation -> waveform -> r = h x + n -> ML detect -> bits
//! ```
//!
//! together with the union-bound average bit error probability, spatial
//! modulation benchmarks and a seeded Monte Carlo BER engine.

pub mod analysis;
pub mod benchmarks;
pub mod channel;
pub mod config;
pub mod detection;
pub mod error;
pub mod modem;
pub mod output;
pub mod pulses;
pub mod sim;

pub use error::{Error, Result};
pub use num_complex::Complex64;
