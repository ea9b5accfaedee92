//! Noise and teleportation channels acting on a GHZ block's coherence.
//!
//! Every channel here is diagonal in the computational basis, so an M-qubit
//! block prepared in GHZ form never leaves span{|0...0>, |1...1>} and is fully
//! described by [`BlockCoherence`]. The [`dense`] submodule carries the full
//! 2^M density matrix and is used to check that reduction.

pub mod dense;

use num_complex::Complex64;
use thiserror::Error;

use crate::params::{BlockCoherence, ProtocolParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("segment time must be >= 0 (got {0})")]
    NegativeTime(f64),
    #[error("teleportation error probability must satisfy 0 <= p < 1 (got {0})")]
    BadProbability(f64),
    #[error("perturbative error rate {epsilon} exceeds the regime bound {bound} (lambda^2 C0 tau^2 must be << 1)")]
    OutOfRegime { epsilon: f64, bound: f64 },
    #[error("coupling, correlation amplitude and time must be finite and non-negative")]
    BadPerturbativeInput,
}

/// Rates that act on a qubit during free evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dephasing {
    /// Low-frequency dephasing rate gamma (Gaussian envelope e^{-gamma^2 tau^2}).
    pub gamma: f64,
    /// Field-induced frequency shift omega.
    pub omega: f64,
    /// High-frequency decay rate Gamma (exponential envelope e^{-Gamma tau}).
    pub big_gamma: f64,
}

impl From<&ProtocolParams> for Dephasing {
    fn from(p: &ProtocolParams) -> Self {
        Self {
            gamma: p.gamma,
            omega: p.omega,
            big_gamma: p.big_gamma,
        }
    }
}

/// Free evolution of an M-qubit block for a segment of length `tau`.
///
/// c' = c e^{-i M omega tau} e^{-M gamma^2 tau^2} e^{-M Gamma tau}. The phase
/// sign follows U = exp(-i omega tau sigma_z / 2) acting on every qubit.
pub fn evolve_segment(
    c: BlockCoherence,
    block: u32,
    noise: &Dephasing,
    tau: f64,
) -> Result<BlockCoherence, ChannelError> {
    if !(tau >= 0.0) {
        return Err(ChannelError::NegativeTime(tau));
    }
    let m = f64::from(block);
    let decay = (-m * (noise.gamma * noise.gamma * tau * tau + noise.big_gamma * tau)).exp();
    let phase = Complex64::from_polar(1.0, -m * noise.omega * tau);
    Ok(BlockCoherence(c.0 * phase * decay))
}

/// Imperfect teleportation of all M qubits of a block: c' = c (1 - p)^M.
///
/// The error branch is the dephased block, which has the same populations
/// as the ideal one, so only the coherence changes.
pub fn apply_teleport(
    c: BlockCoherence,
    block: u32,
    p: f64,
) -> Result<BlockCoherence, ChannelError> {
    if !(0.0..1.0).contains(&p) {
        return Err(ChannelError::BadProbability(p));
    }
    Ok(BlockCoherence(c.0 * survival(block, p)))
}

/// Probability (1 - p)^M that all M teleportations of a block succeed.
pub(crate) fn survival(block: u32, p: f64) -> f64 {
    (f64::from(block) * (-p).ln_1p()).exp()
}

/// Largest lambda^2 C0 tau^2 accepted by [`perturbative_error_rate`].
pub const PERTURBATIVE_BOUND: f64 = 0.1;

/// Short-time error rate and the matching dephasing rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeRate {
    /// epsilon_tau = lambda^2 C0 tau^2
    pub epsilon: f64,
    /// gamma = sqrt(2 lambda^2 C0)
    pub gamma: f64,
}

/// Second-order error rate of a qubit coupled to an environment with
/// correlation amplitude `c0`, valid while it stays well below one.
pub fn perturbative_error_rate(
    lambda: f64,
    c0: f64,
    tau: f64,
) -> Result<PerturbativeRate, ChannelError> {
    if !(lambda.is_finite() && c0.is_finite() && tau.is_finite()) || c0 < 0.0 || tau < 0.0 {
        return Err(ChannelError::BadPerturbativeInput);
    }
    let epsilon = lambda * lambda * c0 * tau * tau;
    if epsilon > PERTURBATIVE_BOUND {
        return Err(ChannelError::OutOfRegime {
            epsilon,
            bound: PERTURBATIVE_BOUND,
        });
    }
    Ok(PerturbativeRate {
        epsilon,
        gamma: (2.0 * lambda * lambda * c0).sqrt(),
    })
}
