//! Classical Gaussian environment with finite correlation time.
//!
//! Each ring site carries an independent stationary Ornstein-Uhlenbeck field
//! B(t) with C(d) = C0 e^{-|d|/tau_c}. A probe sitting on a site for a window
//! picks up the phase 2 lambda int B dt; the estimated coherence envelope is
//! <cos phi> over trajectories (phi is symmetric, so <sin phi> = 0).
//!
//! The per-window integral is drawn jointly with the end-point field from
//! their exact conditional Gaussian law, so there is no time-step bias.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rng::batch_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid environment: {0}")]
    InvalidModel(String),
    #[error("time step {dt} is too coarse: need dt <= tau_c/20 = {limit}")]
    DtTooCoarse { dt: f64, limit: f64 },
    #[error("at least {min} trajectories are required (got {got})")]
    TooFewTrajectories { got: u64, min: u64 },
    #[error("schedule does not fit the topology: {0}")]
    ScheduleMismatch(String),
}

/// Minimum trajectory count for envelope estimates.
pub const MIN_TRAJECTORIES: u64 = 1_000;

const BATCH: u64 = 4_096;

/// Stationary OU environment; `tau_c` may be infinite (static noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvModel {
    pub lambda: f64,
    pub c0: f64,
    pub tau_c: f64,
    pub seed: u64,
}

impl EnvModel {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.lambda.is_finite() && self.c0.is_finite() && self.c0 >= 0.0) {
            return Err(EnvError::InvalidModel(format!(
                "lambda and C0 must be finite with C0 >= 0 (lambda = {}, C0 = {})",
                self.lambda, self.c0
            )));
        }
        if !(self.tau_c > 0.0) {
            return Err(EnvError::InvalidModel(format!(
                "tau_c must be > 0 (got {})",
                self.tau_c
            )));
        }
        Ok(())
    }

    /// sqrt(2 lambda^2 C0)
    pub fn gamma(&self) -> f64 {
        (2.0 * self.lambda * self.lambda * self.c0).sqrt()
    }

    /// C0 e^{-|d| / tau_c}
    pub fn correlation(&self, lag: f64) -> f64 {
        self.c0 * (-lag.abs() / self.tau_c).exp()
    }

    /// int_0^tau int_0^tau C(t' - t'') dt' dt''
    pub fn window_integral(&self, tau: f64) -> f64 {
        if self.tau_c.is_infinite() {
            return self.c0 * tau * tau;
        }
        let x = tau / self.tau_c;
        // x - (1 - e^{-x}), by series where it cancels.
        let core = if x < 1e-4 {
            x * x * (0.5 - x / 6.0 + x * x / 24.0)
        } else {
            x + (-x).exp_m1()
        };
        2.0 * self.c0 * self.tau_c * self.tau_c * core
    }

    /// int over [d, d + tau] x [0, tau] of C(t' - t'') for offsets d >= tau.
    pub fn cross_integral(&self, offset: f64, tau: f64) -> f64 {
        if self.tau_c.is_infinite() {
            return self.c0 * tau * tau;
        }
        let half = (0.5 * tau / self.tau_c).sinh();
        self.c0 * self.tau_c * self.tau_c * (-offset / self.tau_c).exp() * 4.0 * half * half
    }
}

/// B(0), ..., B(steps dt) from the exact AR(1) update; `stream` selects an
/// independent trajectory of the model's seed.
pub fn sample_trajectory(
    env: &EnvModel,
    dt: f64,
    steps: usize,
    stream: u64,
) -> Result<Vec<f64>, EnvError> {
    env.validate()?;
    let limit = env.tau_c / 20.0;
    if !(dt > 0.0) || dt > limit {
        return Err(EnvError::DtTooCoarse { dt, limit });
    }
    let mut rng = batch_rng(env.seed, stream);
    let a = (-dt / env.tau_c).exp();
    let kick = (env.c0 * -(-2.0 * dt / env.tau_c).exp_m1()).sqrt();
    let mut b = env.c0.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let mut path = Vec::with_capacity(steps + 1);
    path.push(b);
    for _ in 0..steps {
        b = a * b + kick * rng.sample::<f64, _>(StandardNormal);
        path.push(b);
    }
    Ok(path)
}

/// Exact conditional law of (B(h), int_0^h B) given B(0).
#[derive(Debug, Clone, Copy)]
struct Step {
    decay: f64,
    kick: f64,
    mean_gain: f64,
    regress: f64,
    residual: f64,
}

impl Step {
    fn new(env: &EnvModel, h: f64) -> Self {
        if env.tau_c.is_infinite() {
            return Self {
                decay: 1.0,
                kick: 0.0,
                mean_gain: h,
                regress: 0.0,
                residual: 0.0,
            };
        }
        let tc = env.tau_c;
        let x = h / tc;
        let residual = if x < 0.05 {
            let x2 = x * x;
            x2 * x * (1.0 / 6.0 - x2 / 60.0 + 17.0 * x2 * x2 / 10080.0)
        } else {
            let a = (-x).exp();
            let var_i = 2.0 * (x - 2.0 * (1.0 - a) + 0.5 * (1.0 - a * a));
            let cov = (1.0 - a) * (1.0 - a);
            (var_i - cov * cov / (1.0 - a * a)).max(0.0)
        };
        Self {
            decay: (-x).exp(),
            kick: (env.c0 * -(-2.0 * x).exp_m1()).sqrt(),
            mean_gain: -tc * (-x).exp_m1(),
            regress: tc * (0.5 * x).tanh(),
            residual: (env.c0 * residual).sqrt() * tc,
        }
    }

    /// Advances `b` and returns the window integral.
    fn advance<R: Rng>(&self, b: &mut f64, rng: &mut R) -> f64 {
        let start = *b;
        let noise = self.kick * rng.sample::<f64, _>(StandardNormal);
        *b = self.decay * start + noise;
        let extra = self.residual * rng.sample::<f64, _>(StandardNormal);
        self.mean_gain * start + self.regress * noise + extra
    }
}

/// Environment slots on a ring and the probe's hop pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RingTopology {
    pub sites: u32,
    /// Sites advanced per teleportation (1 for separable probes, M for
    /// GHZ blocks).
    pub stride: u32,
}

impl RingTopology {
    /// 2L slots, one hop per teleportation.
    pub fn separable(probes: u32) -> Self {
        Self {
            sites: 2 * probes,
            stride: 1,
        }
    }

    /// 2L slots, blocks of M hop by M.
    pub fn entangled(probes: u32, block: u32) -> Self {
        Self {
            sites: 2 * probes,
            stride: block,
        }
    }

    fn check(&self) -> Result<(), EnvError> {
        if self.sites == 0 || self.stride == 0 {
            return Err(EnvError::ScheduleMismatch(format!(
                "ring needs sites >= 1 and stride >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Distinct sites on the probe's orbit.
    pub fn orbit(&self) -> u32 {
        self.sites / gcd(self.sites, self.stride)
    }

    /// Largest number of teleportations before a site is reused (2L - 1 on
    /// the separable ring, 2L/M - 1 with blocks of M).
    pub fn max_teleports_without_revisit(&self) -> u32 {
        self.orbit() - 1
    }

    /// Site hosting the probe in each of `segments` windows.
    pub fn schedule(&self, segments: u32) -> Vec<u32> {
        (0..u64::from(segments))
            .map(|k| ((k * u64::from(self.stride)) % u64::from(self.sites)) as u32)
            .collect()
    }

    /// True iff some site appears twice in the schedule.
    pub fn revisits(&self, segments: u32) -> bool {
        let mut seen = vec![false; self.sites as usize];
        self.schedule(segments).into_iter().any(|s| {
            let hit = seen[s as usize];
            seen[s as usize] = true;
            hit
        })
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Monte-Carlo envelope with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trajectories: u64,
}

impl EnvelopeEstimate {
    /// Signed distance to `target` in standard errors.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        (self.mean - target) / self.std_error
    }
}

/// Single probe on one site for a window of length `tau`.
pub fn dephasing_envelope(
    env: &EnvModel,
    tau: f64,
    trajectories: u64,
) -> Result<EnvelopeEstimate, EnvError> {
    run_teleported_envelope(
        env,
        &RingTopology {
            sites: 1,
            stride: 1,
        },
        1,
        tau,
        trajectories,
    )
}

/// Probe hops along `ring` for `segments` windows of length `tau`.
///
/// A fresh site starts from the stationary law. A revisited site continues
/// its own trajectory across the time the probe spent elsewhere.
pub fn run_teleported_envelope(
    env: &EnvModel,
    ring: &RingTopology,
    segments: u32,
    tau: f64,
    trajectories: u64,
) -> Result<EnvelopeEstimate, EnvError> {
    env.validate()?;
    ring.check()?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(EnvError::InvalidModel(format!(
            "window length must be finite and >= 0 (got {tau})"
        )));
    }
    if segments == 0 {
        return Err(EnvError::ScheduleMismatch("need at least one segment".into()));
    }
    if trajectories < MIN_TRAJECTORIES {
        return Err(EnvError::TooFewTrajectories {
            got: trajectories,
            min: MIN_TRAJECTORIES,
        });
    }
    let schedule = ring.schedule(segments);
    let window = Step::new(env, tau);
    let mut last_visit: Vec<Option<u32>> = vec![None; ring.sites as usize];
    // For each window: the gap since the site was last left, if revisited.
    let gaps: Vec<Option<Step>> = schedule
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let k = k as u32;
            let prev = last_visit[s as usize].replace(k);
            prev.map(|j| Step::new(env, f64::from(k - j - 1) * tau))
        })
        .collect();

    let twice_lambda = 2.0 * env.lambda;
    let sd = env.c0.sqrt();
    let batches = trajectories.div_ceil(BATCH);
    let sums: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = batch_rng(env.seed, batch);
            let len = BATCH.min(trajectories - batch * BATCH);
            let mut field = vec![0.0f64; ring.sites as usize];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let mut phase = 0.0;
                for (&site, gap) in schedule.iter().zip(&gaps) {
                    let b = &mut field[site as usize];
                    match gap {
                        None => *b = sd * rng.sample::<f64, _>(StandardNormal),
                        Some(g) => {
                            g.advance(b, &mut rng);
                        }
                    }
                    phase += window.advance(b, &mut rng);
                }
                let c = (twice_lambda * phase).cos();
                s1 += c;
                s2 += c * c;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums
        .iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = trajectories as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(EnvelopeEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trajectories,
    })
}

/// Exact Gaussian envelope exp(-2 lambda^2 int int C) over the probe's
/// windows, including the cross terms of windows that share a site.
pub fn oracle_envelope(env: &EnvModel, ring: &RingTopology, segments: u32, tau: f64) -> f64 {
    let schedule = ring.schedule(segments);
    let mut total = f64::from(segments) * env.window_integral(tau);
    for (k, &sk) in schedule.iter().enumerate() {
        for (j, &sj) in schedule.iter().enumerate().take(k) {
            if sj == sk {
                total += 2.0 * env.cross_integral((k - j) as f64 * tau, tau);
            }
        }
    }
    (-2.0 * env.lambda * env.lambda * total).exp()
}

/// Envelope if every window saw an independent environment.
pub fn independent_envelope(env: &EnvModel, segments: u32, tau: f64) -> f64 {
    (-2.0 * env.lambda * env.lambda * f64::from(segments) * env.window_integral(tau)).exp()
}
