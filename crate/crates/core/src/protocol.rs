//! The sensing cycle and three independent routes to its sensitivity.
//!
//! A cycle prepares L/M GHZ blocks, lets them evolve for n segments of length
//! t/n with a teleportation between consecutive segments, and reads each block
//! out with the projector onto (|0...0> pm i|1...1>)/sqrt(2). The cycle is
//! repeated N = T L / (t M) times (block parallelism folded into N).
//!
//! * [`sensitivity_closed_form`] evaluates the analytic uncertainty,
//! * [`sensitivity_from_pipeline`] runs the channel pipeline and propagates the
//!   readout error,
//! * [`sensitivity_monte_carlo`] samples projective outcomes.

use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{apply_teleport, evolve_segment, survival, ChannelError, Dephasing};
use crate::params::{BlockCoherence, ParamError, ProtocolParams, SensitivityResult};
use crate::rng::batch_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("no signal: the readout slope vanished (|c| = {coherence:e}, t = {cycle_time})")]
    NoSignal { coherence: f64, cycle_time: f64 },
    #[error("Monte-Carlo needs at least {min} shots (got {got})")]
    TooFewShots { got: u64, min: u64 },
}

/// Which projector is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutSign {
    Plus,
    Minus,
}

impl ReadoutSign {
    pub fn factor(self) -> f64 {
        match self {
            ReadoutSign::Plus => 1.0,
            ReadoutSign::Minus => -1.0,
        }
    }
}

/// Expectation of one readout projector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutPoint {
    pub expectation: f64,
    pub sign: ReadoutSign,
}

/// Runs one full cycle from an ideal GHZ block: n segments of t/n with a
/// teleportation between consecutive segments and none after the last.
pub fn run_cycle(params: &ProtocolParams) -> Result<BlockCoherence, ProtocolError> {
    let params = params.validate()?;
    let noise = Dephasing::from(&params);
    let tau = params.segment_time();
    let mut c = BlockCoherence::ideal();
    for segment in 0..params.segments {
        if segment > 0 {
            c = apply_teleport(c, params.block, params.p)?;
        }
        c = evolve_segment(c, params.block, &noise, tau)?;
    }
    Ok(c)
}

/// <P_pm> = (1 -+ Im c) / 2.
///
/// With c = 2 <0..0|rho|1..1> the overlap with (|0..0> pm i|1..1>)/sqrt(2)
/// picks up -Im c for the plus projector; the dense oracle fixes this sign.
pub fn readout(c: BlockCoherence, sign: ReadoutSign) -> ReadoutPoint {
    ReadoutPoint {
        expectation: 0.5 * (1.0 - sign.factor() * c.0.im),
        sign,
    }
}

/// Sensitivity formula with real-valued knobs, used for continuum analysis.
///
/// `block` and `segments` may be non-integers here; nothing is validated
/// beyond what the formula itself needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumPoint {
    pub gamma: f64,
    pub big_gamma: f64,
    pub p: f64,
    pub probes: f64,
    pub block: f64,
    pub segments: f64,
    pub cycle_time: f64,
    pub total_time: f64,
}

impl From<&ProtocolParams> for ContinuumPoint {
    fn from(p: &ProtocolParams) -> Self {
        Self {
            gamma: p.gamma,
            big_gamma: p.big_gamma,
            p: p.p,
            probes: f64::from(p.probes),
            block: f64::from(p.block),
            segments: f64::from(p.segments),
            cycle_time: p.cycle_time,
            total_time: p.total_time,
        }
    }
}

impl ContinuumPoint {
    /// ln |c| after a full cycle.
    pub fn log_coherence(&self) -> f64 {
        let m = self.block;
        let t = self.cycle_time;
        -m * self.gamma * self.gamma * t * t / self.segments - m * self.big_gamma * t
            + m * (self.segments - 1.0) * (-self.p).ln_1p()
    }

    pub fn repetitions(&self) -> f64 {
        self.total_time * self.probes / (self.cycle_time * self.block)
    }

    /// e^{M Gamma t + M gamma^2 t^2/n} / ((1-p)^{M(n-1)} sqrt(M L T t)).
    pub fn sensitivity(&self) -> SensitivityResult {
        let slope = 0.5 * self.block * self.cycle_time * self.log_coherence().exp();
        SensitivityResult::from_parts(slope, 0.25, self.repetitions())
    }

    pub fn delta_omega(&self) -> f64 {
        self.sensitivity().delta_omega
    }

    /// ln delta_omega, finite even where |c| underflows.
    pub fn log_delta_omega(&self) -> f64 {
        -self.log_coherence()
            - 0.5 * (self.block * self.probes * self.total_time * self.cycle_time).ln()
    }
}

/// Analytic uncertainty at the steepest-slope operating point.
pub fn sensitivity_closed_form(params: &ProtocolParams) -> Result<SensitivityResult, ProtocolError> {
    let params = params.validate()?;
    Ok(ContinuumPoint::from(&params).sensitivity())
}

/// Uncertainty obtained by running the channel pipeline and propagating the
/// projector statistics, <dP^2> / |d<P>/d omega|^2 / N.
///
/// The interferometer is biased so the accumulated phase vanishes (the
/// operating point omega = 0), where the slope is steepest and the variance
/// is 1/4.
pub fn sensitivity_from_pipeline(
    params: &ProtocolParams,
) -> Result<SensitivityResult, ProtocolError> {
    let params = params.validate()?;
    let biased = ProtocolParams {
        omega: 0.0,
        ..params
    };
    let c = run_cycle(&biased)?;
    let point = readout(c, ReadoutSign::Plus);
    let phase = f64::from(params.block) * biased.omega * params.cycle_time;
    let slope = 0.5 * f64::from(params.block) * params.cycle_time * c.magnitude() * phase.cos();
    if !(slope > 0.0) || !slope.is_finite() {
        return Err(ProtocolError::NoSignal {
            coherence: c.magnitude(),
            cycle_time: params.cycle_time,
        });
    }
    let variance = point.expectation * (1.0 - point.expectation);
    Ok(SensitivityResult::from_parts(
        slope,
        variance,
        params.repetitions(),
    ))
}

/// Minimum number of shots accepted by [`sensitivity_monte_carlo`].
pub const MIN_SHOTS: u64 = 10_000;

/// Accumulated block phase M omega t used to dither the bias point.
pub const DITHER_PHASE: f64 = 0.1;

const SHOT_BATCH: u64 = 1 << 16;

/// Monte-Carlo sensitivity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub result: SensitivityResult,
    pub std_error: f64,
    pub shots: u64,
}

/// Samples projective outcomes at the two dithered bias points
/// omega = pm DITHER_PHASE / (M t), half the shots each, and estimates the
/// slope by a central difference and the variance from the pooled mean.
///
/// The standard error comes from the delta method on the two binomial
/// fractions. The dither leaves a relative slope bias of about
/// DITHER_PHASE^2 / 6 (~1.7e-3), well under the statistical error at 10^6
/// shots. Batches draw from per-batch streams of the master seed, so the
/// result does not depend on thread scheduling.
pub fn sensitivity_monte_carlo(
    params: &ProtocolParams,
    shots: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, ProtocolError> {
    if shots < MIN_SHOTS {
        return Err(ProtocolError::TooFewShots {
            got: shots,
            min: MIN_SHOTS,
        });
    }
    let params = params.validate()?;
    let m_t = f64::from(params.block) * params.cycle_time;
    let dither = DITHER_PHASE / m_t;
    let per_bias = shots / 2;

    let prob = |offset: f64| -> Result<f64, ProtocolError> {
        let c = run_cycle(&ProtocolParams {
            omega: offset,
            ..params
        })?;
        Ok(readout(c, ReadoutSign::Plus).expectation)
    };
    let p_hi = prob(dither)?;
    let p_lo = prob(-dither)?;

    let k_hi = sample_successes(p_hi, per_bias, seed, 0);
    let k_lo = sample_successes(p_lo, per_bias, seed, 1);
    let s = per_bias as f64;
    let f_hi = k_hi as f64 / s;
    let f_lo = k_lo as f64 / s;

    let slope = (f_hi - f_lo) / (2.0 * dither);
    if !(slope > 0.0) {
        return Err(ProtocolError::NoSignal {
            coherence: 2.0 * (p_hi - 0.5).abs() / DITHER_PHASE.sin(),
            cycle_time: params.cycle_time,
        });
    }
    let pooled = 0.5 * (f_hi + f_lo);
    let variance = pooled * (1.0 - pooled);
    let result = SensitivityResult::from_parts(slope, variance, params.repetitions());

    let var_hi = f_hi * (1.0 - f_hi) / s;
    let var_lo = f_lo * (1.0 - f_lo) / s;
    let rel_slope = (var_hi + var_lo).sqrt() / (2.0 * dither) / slope;
    let rel_var = (1.0 - 2.0 * pooled).abs() * 0.5 * (var_hi + var_lo).sqrt() / variance;
    let rel = (rel_slope * rel_slope + 0.25 * rel_var * rel_var).sqrt();
    Ok(MonteCarloEstimate {
        result,
        std_error: result.delta_omega * rel,
        shots: 2 * per_bias,
    })
}

fn sample_successes(prob: f64, trials: u64, seed: u64, stream: u64) -> u64 {
    let batches = trials.div_ceil(SHOT_BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let len = SHOT_BATCH.min(trials - b * SHOT_BATCH);
            let mut rng = batch_rng(seed, 2 * b + stream);
            Binomial::new(len, prob.clamp(0.0, 1.0))
                .expect("probability clamped to [0, 1]")
                .sample(&mut rng)
        })
        .sum()
}

/// Standard Ramsey uncertainty e^{1/4} sqrt(gamma / (T L)) for a device with
/// `probes` probe qubits.
///
/// Ramsey needs no ancillas, so it runs on all 2L qubits of the ring: this is
/// the single-segment uncertainty at t = 1/(2 gamma) evaluated with 2L qubits.
pub fn ramsey_baseline(gamma: f64, total_time: f64, probes: f64) -> f64 {
    0.25f64.exp() * (gamma / (total_time * probes)).sqrt()
}

/// Coherence a cycle must produce according to the analytic composition.
pub fn cycle_closed_form(params: &ProtocolParams) -> Complex64 {
    let m = f64::from(params.block);
    let t = params.cycle_time;
    let n = f64::from(params.segments);
    let mag = (-m * params.gamma * params.gamma * t * t / n - m * params.big_gamma * t).exp()
        * survival(params.block * params.teleportations(), params.p);
    Complex64::from_polar(mag, -m * params.omega * t)
}
