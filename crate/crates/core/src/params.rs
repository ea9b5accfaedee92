//! Shared domain types for the sensing protocol.
//!
//! All quantities are in natural units. Rates are usually expressed relative
//! to the dephasing rate (`gamma = 1`), and no unit conversion happens anywhere
//! in the library.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A violated invariant of [`ProtocolParams`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite (got {value})")]
    NotFinite { name: &'static str, value: f64 },
    #[error("gamma must be >= 0 (got {0})")]
    NegativeGamma(f64),
    #[error("p must be >= 0 (got {0})")]
    NegativeP(f64),
    #[error("p must be < 1 (got {0})")]
    PNotBelowOne(f64),
    #[error("big_gamma must be >= 0 (got {0})")]
    NegativeBigGamma(f64),
    #[error("L must be a positive integer")]
    ZeroProbes,
    #[error("M must be a positive integer")]
    ZeroBlock,
    #[error("M must divide L (M = {block}, L = {probes})")]
    BlockDoesNotDivide { block: u32, probes: u32 },
    #[error("n must be >= 1")]
    ZeroSegments,
    #[error("t must be > 0 (got {0})")]
    NonPositiveCycleTime(f64),
    #[error("T must be >= t (T = {total}, t = {cycle})")]
    TotalBelowCycle { total: f64, cycle: f64 },
}

/// Physical and protocol scalars of one sensing configuration.
///
/// `probes` is L, `block` is the GHZ size M, `segments` is n (so there are
/// n - 1 teleportations per cycle), `cycle_time` is t and `total_time` is T.
/// The segment time t/n and the repetition count T L / (t M) are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub gamma: f64,
    pub omega: f64,
    pub p: f64,
    pub big_gamma: f64,
    pub probes: u32,
    pub block: u32,
    pub segments: u32,
    pub cycle_time: f64,
    pub total_time: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            omega: 0.0,
            p: 0.0,
            big_gamma: 0.0,
            probes: 4,
            block: 2,
            segments: 2,
            cycle_time: 1.0,
            total_time: 10.0,
        }
    }
}

impl ProtocolParams {
    /// Returns the parameters unchanged if every invariant holds, otherwise the
    /// first violation in declaration order.
    pub fn validate(self) -> Result<Self, ParamError> {
        for (name, value) in [
            ("gamma", self.gamma),
            ("omega", self.omega),
            ("p", self.p),
            ("big_gamma", self.big_gamma),
            ("t", self.cycle_time),
            ("T", self.total_time),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
        }
        if self.gamma < 0.0 {
            return Err(ParamError::NegativeGamma(self.gamma));
        }
        if self.p < 0.0 {
            return Err(ParamError::NegativeP(self.p));
        }
        if self.p >= 1.0 {
            return Err(ParamError::PNotBelowOne(self.p));
        }
        if self.big_gamma < 0.0 {
            return Err(ParamError::NegativeBigGamma(self.big_gamma));
        }
        if self.probes == 0 {
            return Err(ParamError::ZeroProbes);
        }
        if self.block == 0 {
            return Err(ParamError::ZeroBlock);
        }
        if !self.probes.is_multiple_of(self.block) {
            return Err(ParamError::BlockDoesNotDivide {
                block: self.block,
                probes: self.probes,
            });
        }
        if self.segments == 0 {
            return Err(ParamError::ZeroSegments);
        }
        if self.cycle_time <= 0.0 {
            return Err(ParamError::NonPositiveCycleTime(self.cycle_time));
        }
        if self.total_time < self.cycle_time {
            return Err(ParamError::TotalBelowCycle {
                total: self.total_time,
                cycle: self.cycle_time,
            });
        }
        Ok(self)
    }

    /// Free-evolution time between teleportations, t / n.
    pub fn segment_time(&self) -> f64 {
        self.cycle_time / f64::from(self.segments)
    }

    /// Real-valued repetition count N = T L / (t M).
    pub fn repetitions(&self) -> f64 {
        self.total_time * f64::from(self.probes) / (self.cycle_time * f64::from(self.block))
    }

    pub fn teleportations(&self) -> u32 {
        self.segments - 1
    }
}

/// Coherence of an M-qubit GHZ block, c = 2 <0...0| rho |1...1>.
///
/// The block populations stay at 1/2 under every channel in this crate, so this
/// single number is the whole state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCoherence(pub Complex64);

impl BlockCoherence {
    /// Freshly prepared GHZ block (c = 1).
    pub fn ideal() -> Self {
        Self(Complex64::new(1.0, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    /// True when the block is (numerically) pure, |c| = 1.
    pub fn is_pure(&self, tol: f64) -> bool {
        (self.magnitude() - 1.0).abs() <= tol
    }
}

/// Frequency uncertainty together with the quantities it is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub delta_omega: f64,
    /// |d<P>/d omega|
    pub slope: f64,
    /// <dP^2>
    pub variance: f64,
    /// N
    pub repetitions: f64,
}

impl SensitivityResult {
    /// Error propagation: sqrt(variance) / (slope sqrt(N)).
    pub fn from_parts(slope: f64, variance: f64, repetitions: f64) -> Self {
        Self {
            delta_omega: variance.sqrt() / (slope * repetitions.sqrt()),
            slope,
            variance,
            repetitions,
        }
    }

    /// Same estimate with a different repetition count.
    pub fn with_repetitions(&self, repetitions: f64) -> Self {
        Self::from_parts(self.slope, self.variance, repetitions)
    }
}
