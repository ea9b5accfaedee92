//! Optimal operating points per noise regime, break-even thresholds against
//! Ramsey and the high-frequency-noise optimisation.
//!
//! Continuum formulas give the starting point; the realised optimum always
//! uses integer n and M and is certified against its integer neighbours.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::params::ProtocolParams;
use crate::protocol::{ramsey_baseline, ContinuumPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{regime} regime does not apply: {reason}")]
    RegimeMismatch { regime: Regime, reason: String },
    #[error("optimal block size {block} exceeds the {probes} available probes")]
    BlockExceedsProbes { block: u32, probes: u32 },
}

/// Noise regime a closed-form optimum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    ShortT,
    LongT,
    /// Perfect teleportation (p = 0).
    Noiseless,
    HighFrequency,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::ShortT => "short-T",
            Regime::LongT => "long-T",
            Regime::Noiseless => "noiseless",
            Regime::HighFrequency => "high-frequency",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scheme {
    Separable,
    Entangled,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Separable => "separable",
            Scheme::Entangled => "entangled",
        })
    }
}

/// Everything fixed before optimisation: the physics and the budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resources {
    pub gamma: f64,
    pub p: f64,
    pub big_gamma: f64,
    pub probes: u32,
    pub total_time: f64,
    /// GHZ size for the short-T and noiseless entangled cells, where it is a
    /// free choice; defaults to all probes.
    pub block: Option<u32>,
}

impl Resources {
    fn check(&self) -> Result<(), OptimizerError> {
        let ok = self.gamma.is_finite()
            && self.gamma >= 0.0
            && (0.0..1.0).contains(&self.p)
            && self.big_gamma.is_finite()
            && self.big_gamma >= 0.0
            && self.probes > 0
            && self.total_time.is_finite()
            && self.total_time > 0.0
            && self.block != Some(0);
        if ok {
            Ok(())
        } else {
            Err(OptimizerError::InvalidInput(format!("{self:?}")))
        }
    }

    fn point(&self, block: f64, segments: f64, cycle_time: f64) -> ContinuumPoint {
        ContinuumPoint {
            gamma: self.gamma,
            big_gamma: self.big_gamma,
            p: self.p,
            probes: f64::from(self.probes),
            block,
            segments,
            cycle_time,
            total_time: self.total_time,
        }
    }
}

/// Integer knob the local-minimum certificate perturbs by one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Knob {
    /// Nothing integer is optimised (n is pinned by the regime).
    None,
    Segments { max: u32 },
    Block { max: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub regime: Regime,
    pub scheme: Scheme,
    pub t_opt: f64,
    pub n_opt: u32,
    pub m_opt: u32,
    /// Closed-form uncertainty at the realised integer point.
    pub delta_omega: f64,
    /// The tabulated asymptotic expression for this cell.
    pub table_value: f64,
    pub knob: Knob,
}

impl Optimum {
    pub fn point(&self, res: &Resources) -> ContinuumPoint {
        res.point(f64::from(self.m_opt), f64::from(self.n_opt), self.t_opt)
    }

    /// Protocol parameters realising this optimum (omega = 0).
    pub fn params(&self, res: &Resources) -> ProtocolParams {
        ProtocolParams {
            gamma: res.gamma,
            omega: 0.0,
            p: res.p,
            big_gamma: res.big_gamma,
            probes: res.probes,
            block: self.m_opt,
            segments: self.n_opt,
            cycle_time: self.t_opt,
            total_time: res.total_time,
        }
    }

    /// Largest relative improvement of delta_omega among the feasible
    /// neighbours: t by pm 1 % and the optimised integer knob by pm 1 at
    /// fixed t. Non-positive when the optimum is a local minimum.
    pub fn certificate(&self, res: &Resources) -> f64 {
        let base = self.point(res);
        let reference = base.delta_omega();
        let mut neighbours = Vec::new();
        for f in [0.99, 1.01] {
            let t = self.t_opt * f;
            if t <= res.total_time {
                neighbours.push(ContinuumPoint { cycle_time: t, ..base });
            }
        }
        let (value, max, set): (u32, u32, fn(&mut ContinuumPoint, f64)) = match self.knob {
            Knob::None => (0, 0, |_, _| {}),
            Knob::Segments { max } => (self.n_opt, max, |c, v| c.segments = v),
            Knob::Block { max } => (self.m_opt, max, |c, v| c.block = v),
        };
        if self.knob != Knob::None {
            for k in [value.saturating_sub(1), value + 1] {
                if k >= 1 && k <= max && k != value {
                    let mut c = base;
                    set(&mut c, f64::from(k));
                    neighbours.push(c);
                }
            }
        }
        neighbours
            .iter()
            .map(|c| (reference - c.delta_omega()) / reference)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn positive(name: &str, v: f64) -> Result<(), OptimizerError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(OptimizerError::InvalidInput(format!("{name} must be > 0 (got {v})")))
    }
}

/// sqrt(n) / (2 gamma)
pub fn t_opt_separable(n: f64, gamma: f64) -> Result<f64, OptimizerError> {
    t_opt_ghz(n, 1.0, gamma)
}

/// sqrt(n / M) / (2 gamma)
pub fn t_opt_ghz(n: f64, block: f64, gamma: f64) -> Result<f64, OptimizerError> {
    positive("gamma", gamma)?;
    if !(n >= 1.0 && block >= 1.0) {
        return Err(OptimizerError::InvalidInput(format!(
            "need n >= 1 and M >= 1 (got n = {n}, M = {block})"
        )));
    }
    Ok((n / block).sqrt() / (2.0 * gamma))
}

/// Real-valued optimum and its best integer neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegerChoice {
    pub real: f64,
    pub integer: u32,
}

/// -1 / (4 ln(1 - p)), the continuum optimum for both the separable n and the
/// entangled M in the long-T regime.
pub fn long_t_continuum(p: f64) -> Result<f64, OptimizerError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(OptimizerError::RegimeMismatch {
            regime: Regime::LongT,
            reason: format!("needs 0 < p < 1 (got {p}); p = 0 falls in the short-T branch"),
        });
    }
    Ok(-0.25 / (-p).ln_1p())
}

fn better_of(real: f64, cost: impl Fn(u32) -> f64) -> u32 {
    let lo = (real.floor() as u32).max(1);
    let hi = (real.ceil() as u32).max(1);
    if cost(hi) < cost(lo) {
        hi
    } else {
        lo
    }
}

/// Long-T separable segment count: the better of floor and ceiling of the
/// continuum optimum, each with t re-optimised.
pub fn n_opt_long_t(p: f64) -> Result<IntegerChoice, OptimizerError> {
    let real = long_t_continuum(p)?;
    let cost = |n: u32| {
        let n = f64::from(n);
        unit_point(p, 1.0, n, n.sqrt() / 2.0).log_delta_omega()
    };
    Ok(IntegerChoice {
        real,
        integer: better_of(real, cost),
    })
}

/// Long-T GHZ size at the pinned n = 2, chosen like [`n_opt_long_t`].
pub fn m_opt_long_t(p: f64) -> Result<IntegerChoice, OptimizerError> {
    let real = long_t_continuum(p)?;
    let cost = |m: u32| ghz_cost(p, f64::from(m), 2.0);
    Ok(IntegerChoice {
        real,
        integer: better_of(real, cost),
    })
}

/// ln delta_omega in units gamma = L = T = 1 with t re-optimised.
fn ghz_cost(p: f64, m: f64, n: f64) -> f64 {
    unit_point(p, m, n, (n / m).sqrt() / 2.0).log_delta_omega()
}

fn unit_point(p: f64, m: f64, n: f64, t: f64) -> ContinuumPoint {
    ContinuumPoint {
        gamma: 1.0,
        big_gamma: 0.0,
        p,
        probes: 1.0,
        block: m,
        segments: n,
        cycle_time: t,
        total_time: 1.0,
    }
}

/// Tabulated optimum for one cell, realised with integer knobs.
///
/// * short-T / noiseless: t = T and n = ceil(4 M gamma^2 T^2), so the
///   unconstrained t optimum lies at or beyond T,
/// * long-T separable: n from [`n_opt_long_t`], t = sqrt(n)/(2 gamma),
/// * long-T entangled: n = 2, M from [`m_opt_long_t`], t = sqrt(2/M)/(2 gamma).
pub fn optimum_for_regime(
    res: &Resources,
    regime: Regime,
    scheme: Scheme,
) -> Result<Optimum, OptimizerError> {
    res.check()?;
    let mismatch = |reason: String| OptimizerError::RegimeMismatch { regime, reason };
    if regime != Regime::HighFrequency && res.big_gamma != 0.0 {
        return Err(mismatch(
            "tabulated optima assume big_gamma = 0; use the high-frequency regime".into(),
        ));
    }
    let l = f64::from(res.probes);
    let big_t = res.total_time;
    match regime {
        Regime::ShortT | Regime::Noiseless => {
            let block = match scheme {
                Scheme::Separable => 1,
                Scheme::Entangled => res.block.unwrap_or(res.probes),
            };
            if block > res.probes {
                return Err(OptimizerError::BlockExceedsProbes {
                    block,
                    probes: res.probes,
                });
            }
            let m = f64::from(block);
            if regime == Regime::Noiseless && res.p != 0.0 {
                return Err(mismatch(format!("needs p = 0 (got {})", res.p)));
            }
            if regime == Regime::ShortT && res.p.sqrt() * res.gamma * m * big_t >= 1.0 {
                return Err(mismatch(format!(
                    "needs T << 1/(sqrt(p) gamma M) (sqrt(p) gamma M T = {})",
                    res.p.sqrt() * res.gamma * m * big_t
                )));
            }
            let target = 4.0 * m * res.gamma * res.gamma * big_t * big_t;
            let segments = to_count(target.ceil().max(1.0), regime)?;
            let table_value = if res.gamma > 0.0 {
                0.25f64.exp() / (big_t * (m * l).sqrt())
            } else {
                1.0 / (big_t * (m * l).sqrt())
            };
            let point = res.point(m, f64::from(segments), big_t);
            Ok(Optimum {
                regime,
                scheme,
                t_opt: big_t,
                n_opt: segments,
                m_opt: block,
                delta_omega: point.delta_omega(),
                table_value,
                knob: Knob::None,
            })
        }
        Regime::LongT => {
            positive("gamma", res.gamma).map_err(|e| mismatch(e.to_string()))?;
            let scale = (1f64.exp() * res.p.sqrt() * res.gamma / (big_t * l)).sqrt();
            let (n, block, t, table_value, knob) = match scheme {
                Scheme::Separable => {
                    let n = n_opt_long_t(res.p)?.integer;
                    let t = t_opt_separable(f64::from(n), res.gamma)?;
                    (n, 1, t, 2.0 * scale, Knob::Segments { max: u32::MAX })
                }
                Scheme::Entangled => {
                    let m = m_opt_long_t(res.p)?.integer;
                    if m > res.probes {
                        return Err(OptimizerError::BlockExceedsProbes {
                            block: m,
                            probes: res.probes,
                        });
                    }
                    let mf = f64::from(m);
                    let pinned = ghz_cost(res.p, mf, 2.0);
                    let three = ghz_cost(res.p, mf, 3.0);
                    if (pinned - three).exp() > 1.01 {
                        log::warn!(
                            "long-T GHZ at p = {}: n = 3 beats the pinned n = 2 by {:.2} %",
                            res.p,
                            100.0 * ((pinned - three).exp() - 1.0)
                        );
                    }
                    let t = t_opt_ghz(2.0, mf, res.gamma)?;
                    let table = 2f64.powf(0.75) * scale;
                    (2, m, t, table, Knob::Block { max: res.probes })
                }
            };
            if t > big_t {
                return Err(mismatch(format!(
                    "optimal cycle time {t} exceeds T = {big_t}"
                )));
            }
            let point = res.point(f64::from(block), f64::from(n), t);
            Ok(Optimum {
                regime,
                scheme,
                t_opt: t,
                n_opt: n,
                m_opt: block,
                delta_omega: point.delta_omega(),
                table_value,
                knob,
            })
        }
        Regime::HighFrequency => {
            if scheme != Scheme::Separable {
                return Err(mismatch("only the separable scheme is treated".into()));
            }
            high_freq_optimum(res.gamma, res.big_gamma, res.p, big_t, res.probes)
        }
    }
}

fn to_count(v: f64, regime: Regime) -> Result<u32, OptimizerError> {
    if v <= f64::from(u32::MAX) {
        Ok(v as u32)
    } else {
        Err(OptimizerError::RegimeMismatch {
            regime,
            reason: format!("segment count {v:e} is out of range"),
        })
    }
}

/// Ratio delta_R / delta_opt for the long-T separable optimum with the
/// continuum n; independent of gamma, T and L.
pub fn ramsey_ratio_long_t(p: f64) -> Result<f64, OptimizerError> {
    let n = long_t_continuum(p)?;
    let opt = unit_point(p, 1.0, n, n.sqrt() / 2.0).delta_omega();
    Ok(ramsey_baseline(1.0, 1.0, 1.0) / opt)
}

/// Bisection tolerance of [`break_even_p`].
pub const BREAK_EVEN_TOL: f64 = 1e-6;

/// Largest p for which the long-T separable scheme still beats Ramsey.
pub fn break_even_p() -> f64 {
    break_even_p_with_tol(BREAK_EVEN_TOL)
}

pub fn break_even_p_with_tol(tol: f64) -> f64 {
    let f = |p: f64| ramsey_ratio_long_t(p).expect("p inside (0, 1)") - 1.0;
    bisect(f, 1e-6, 0.5, tol).expect("ratio changes sign on (1e-6, 0.5)")
}

/// Root of a continuous `f` with a sign change on [lo, hi].
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_lo.signum() == f(hi).signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Optimal t at fixed n with both Gaussian and exponential decay:
/// (-n m + sqrt(n^2 m^2 + 4 n)) / (4 gamma), m = Gamma / gamma.
pub fn t_opt_high_freq(n: f64, gamma: f64, big_gamma: f64) -> Result<f64, OptimizerError> {
    positive("gamma", gamma)?;
    if !(n >= 1.0) || !(big_gamma >= 0.0) {
        return Err(OptimizerError::InvalidInput(format!(
            "need n >= 1 and big_gamma >= 0 (got n = {n}, big_gamma = {big_gamma})"
        )));
    }
    let m = big_gamma / gamma;
    Ok((-n * m + (n * n * m * m + 4.0 * n).sqrt()) / (4.0 * gamma))
}

/// delta_omega at n segments and t = [`t_opt_high_freq`], in the tabulated
/// form 2 sqrt(gamma) e^{(1/4) + (m s - n m^2)/8} / ((1-p)^{n-1} sqrt((s - n m) L T))
/// with s = sqrt(n (n m^2 + 4)).
pub fn high_freq_delta(n: f64, gamma: f64, big_gamma: f64, p: f64, total_time: f64, probes: f64) -> f64 {
    (ln_high_freq_unit(n, big_gamma / gamma, p)).exp() * (gamma / (probes * total_time)).sqrt()
}

fn ln_high_freq_unit(n: f64, m: f64, p: f64) -> f64 {
    let s = (n * (n * m * m + 4.0)).sqrt();
    2f64.ln() + 0.25 + (m * s - n * m * m) / 8.0
        - (n - 1.0) * (-p).ln_1p()
        - 0.5 * (s - n * m).ln()
}

/// Upper end of the exhaustive n search.
pub fn high_freq_n_max(gamma: f64, big_gamma: f64, p: f64) -> u32 {
    if p > 0.0 {
        (1.0 / p).ceil().max(10.0).min(f64::from(u32::MAX)) as u32
    } else {
        let m = big_gamma / gamma;
        (10.0 / (m * m + 1e-12)).clamp(1.0, 1e6) as u32
    }
}

/// Exhaustive argmin over integer n in [1, n_max] of [`high_freq_delta`].
pub fn high_freq_optimum(
    gamma: f64,
    big_gamma: f64,
    p: f64,
    total_time: f64,
    probes: u32,
) -> Result<Optimum, OptimizerError> {
    let res = Resources {
        gamma,
        p,
        big_gamma,
        probes,
        total_time,
        block: None,
    };
    res.check()?;
    positive("gamma", gamma)?;
    let m = big_gamma / gamma;
    let n_max = high_freq_n_max(gamma, big_gamma, p);
    let n = best_high_freq_n(m, p, n_max);
    let t = t_opt_high_freq(f64::from(n), gamma, big_gamma)?;
    if t > total_time {
        return Err(OptimizerError::RegimeMismatch {
            regime: Regime::HighFrequency,
            reason: format!("optimal cycle time {t} exceeds T = {total_time}"),
        });
    }
    let l = f64::from(probes);
    Ok(Optimum {
        regime: Regime::HighFrequency,
        scheme: Scheme::Separable,
        t_opt: t,
        n_opt: n,
        m_opt: 1,
        delta_omega: res.point(1.0, f64::from(n), t).delta_omega(),
        table_value: high_freq_delta(f64::from(n), gamma, big_gamma, p, total_time, l),
        knob: Knob::Segments { max: n_max },
    })
}

fn best_high_freq_n(m: f64, p: f64, n_max: u32) -> u32 {
    let mut best = (1, ln_high_freq_unit(1.0, m, p));
    for n in 2..=n_max {
        let v = ln_high_freq_unit(f64::from(n), m, p);
        if v < best.1 {
            best = (n, v);
        }
    }
    best.0
}

/// Ramsey uncertainty with high-frequency decay: the single-segment optimum
/// run on all 2L qubits of the ring.
pub fn ramsey_high_freq(gamma: f64, big_gamma: f64, total_time: f64, probes: f64) -> f64 {
    high_freq_delta(1.0, gamma, big_gamma, 0.0, total_time, 2.0 * probes)
}

/// delta_R / delta_opt in the (Gamma/gamma, p) plane; independent of gamma,
/// T and L.
pub fn high_freq_ratio(m: f64, p: f64) -> f64 {
    let n = best_high_freq_n(m, p, high_freq_n_max(1.0, m, p));
    (ln_high_freq_unit(1.0, m, 0.0) - 0.5 * 2f64.ln() - ln_high_freq_unit(f64::from(n), m, p)).exp()
}

/// p on the unit contour at fixed Gamma/gamma (bisection on [1e-6, 0.45]).
pub fn contour_p_at(m: f64) -> Option<f64> {
    bisect(|p| high_freq_ratio(m, p) - 1.0, 1e-6, 0.45, 1e-9)
}

/// Gamma/gamma on the unit contour at fixed p (bisection on [1e-5, 2]).
pub fn contour_m_at(p: f64) -> Option<f64> {
    bisect(|m| high_freq_ratio(m, p) - 1.0, 1e-5, 2.0, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::sensitivity_closed_form;
    use proptest::prelude::*;

    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-10 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    fn res(p: f64) -> Resources {
        Resources {
            gamma: 1.0,
            p,
            big_gamma: 0.0,
            probes: 100,
            total_time: 1e4,
            block: None,
        }
    }

    #[test]
    fn t_opt_examples() {
        assert_eq!(t_opt_separable(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(t_opt_separable(4.0, 2.0).unwrap(), 0.5);
        let scan = golden_min(|t| unit_point(0.0, 1.0, 9.0, t).log_delta_omega(), 0.01, 10.0);
        assert!((scan - t_opt_separable(9.0, 1.0).unwrap()).abs() < 1e-6);
        let scan = golden_min(|t| unit_point(0.0, 4.0, 8.0, t).log_delta_omega(), 0.01, 10.0);
        assert!((scan - t_opt_ghz(8.0, 4.0, 1.0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn n_opt_examples() {
        let c = n_opt_long_t(1e-4).unwrap();
        // -1/(4 ln(1 - p)) = 2499.875 sits just below 1/(4p).
        assert!((c.real - 2500.0).abs() < 0.2);
        let half = n_opt_long_t(0.5).unwrap();
        assert!((half.real - 0.3607).abs() < 1e-4);
        assert_eq!(half.integer, 1);
        assert!(matches!(n_opt_long_t(0.0), Err(OptimizerError::RegimeMismatch { .. })));
    }

    #[test]
    fn integer_choice_never_worse_than_rounding() {
        for k in 0..200 {
            let p = 10f64.powf(-4.0 + 3.5 * f64::from(k) / 199.0);
            let c = n_opt_long_t(p).unwrap();
            let cost = |n: u32| {
                let n = f64::from(n);
                unit_point(p, 1.0, n, n.sqrt() / 2.0).delta_omega()
            };
            let naive = (c.real.round() as u32).max(1);
            assert!(cost(c.integer) <= cost(naive));
        }
    }

    #[test]
    fn long_t_separable_example() {
        let o = optimum_for_regime(&res(1e-4), Regime::LongT, Scheme::Separable).unwrap();
        let printed = 2.0 * (1f64.exp() * 0.01 / 1e6).sqrt();
        assert!((o.table_value / printed - 1.0).abs() < 1e-12);
        assert!((o.table_value - 3.30e-4).abs() < 0.01e-4);
        assert!(o.certificate(&res(1e-4)) <= 1e-6);
        let closed = sensitivity_closed_form(&o.params(&res(1e-4))).unwrap();
        assert!((closed.delta_omega / o.delta_omega - 1.0).abs() < 1e-9);
    }

    #[test]
    fn short_t_perfect_example() {
        let r = Resources {
            gamma: 1.0,
            p: 0.0,
            big_gamma: 0.0,
            probes: 8,
            total_time: 3.0,
            block: Some(4),
        };
        let o = optimum_for_regime(&r, Regime::Noiseless, Scheme::Entangled).unwrap();
        assert_eq!(o.n_opt, 144);
        assert!((o.delta_omega / (0.25f64.exp() / (3.0 * 32f64.sqrt())) - 1.0).abs() < 1e-12);
        assert!(o.certificate(&r) <= 1e-6);
    }

    #[test]
    fn grid_search_does_not_beat_optimum() {
        let r = Resources {
            total_time: 1e5,
            ..res(1e-3)
        };
        let o = optimum_for_regime(&r, Regime::LongT, Scheme::Separable).unwrap();
        let mut best = f64::INFINITY;
        for n in 1..=2000u32 {
            for k in 0..200 {
                let t = 10f64.powf(-1.0 + 3.0 * f64::from(k) / 199.0);
                best = best.min(r.point(1.0, f64::from(n), t).delta_omega());
            }
        }
        assert!(best >= o.delta_omega * (1.0 - 5e-3));
    }

    #[test]
    fn break_even_and_ratio() {
        let root = break_even_p();
        assert!((0.0246..=0.0256).contains(&root), "{root}");
        let half = break_even_p_with_tol(BREAK_EVEN_TOL / 2.0);
        assert!((root - half).abs() < 1e-6);
        let r = ramsey_ratio_long_t(1e-4).unwrap();
        assert!((r - 3.89).abs() < 0.02, "{r}");
        let mut prev = f64::INFINITY;
        for k in 1..=200 {
            let p = 0.1 * f64::from(k) / 200.0;
            let v = ramsey_ratio_long_t(p).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn high_freq_t_opt_examples() {
        assert_eq!(t_opt_high_freq(4.0, 1.0, 0.0).unwrap(), 1.0);
        assert!((t_opt_high_freq(1.0, 1.0, 1.0).unwrap() - (5f64.sqrt() - 1.0) / 4.0).abs() < 1e-15);
        let scan = golden_min(
            |t| {
                let pt = ContinuumPoint {
                    big_gamma: 0.7,
                    ..unit_point(0.0, 1.0, 5.0, t)
                };
                pt.log_delta_omega()
            },
            0.01,
            10.0,
        );
        assert!((scan - t_opt_high_freq(5.0, 1.0, 0.7).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn printed_high_freq_form_is_the_closed_form_at_t_opt() {
        for (n, g, bg, p) in [(1.0, 1.0, 0.0, 0.0), (7.0, 2.0, 0.3, 0.01), (40.0, 0.5, 0.05, 0.002)] {
            let t = t_opt_high_freq(n, g, bg).unwrap();
            let pt = ContinuumPoint {
                gamma: g,
                big_gamma: bg,
                p,
                probes: 3.0,
                block: 1.0,
                segments: n,
                cycle_time: t,
                total_time: 50.0,
            };
            let printed = high_freq_delta(n, g, bg, p, 50.0, 3.0);
            assert!((pt.delta_omega() / printed - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn high_freq_reduces_to_long_t() {
        let r = res(1e-3);
        let hf = high_freq_optimum(1.0, 0.0, 1e-3, 1e4, 100).unwrap();
        let lt = optimum_for_regime(&r, Regime::LongT, Scheme::Separable).unwrap();
        assert_eq!(hf.n_opt, lt.n_opt);
        assert!((hf.delta_omega / lt.delta_omega - 1.0).abs() < 1e-9);
        assert!(hf.certificate(&r) <= 1e-6);
    }

    #[test]
    fn high_freq_delta_is_unimodal_in_n() {
        for m in [0.0, 0.05, 0.13, 0.4] {
            for p in [1e-4, 1e-3, 0.0123, 0.05] {
                let n_max = high_freq_n_max(1.0, m, p);
                let v: Vec<f64> = (1..=n_max).map(|n| ln_high_freq_unit(f64::from(n), m, p)).collect();
                let arg = v.iter().enumerate().fold(0, |b, (i, x)| if *x < v[b] { i } else { b });
                assert!(v[..=arg].windows(2).all(|w| w[1] <= w[0]));
                assert!(v[arg..].windows(2).all(|w| w[1] >= w[0]));
            }
        }
    }

    #[test]
    fn gamma_aware_ramsey_reduces() {
        assert!((ramsey_high_freq(1.3, 0.0, 7.0, 5.0) / ramsey_baseline(1.3, 7.0, 5.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contour_corner_point() {
        let p = contour_p_at(0.130).unwrap();
        assert!((p / 0.0123 - 1.0).abs() < 0.05, "{p}");
        let m = contour_m_at(0.0123).unwrap();
        assert!((m / 0.130 - 1.0).abs() < 0.05, "{m}");
    }

    #[test]
    fn regime_mismatches() {
        assert!(optimum_for_regime(&res(0.0), Regime::LongT, Scheme::Separable).is_err());
        assert!(optimum_for_regime(&res(0.01), Regime::Noiseless, Scheme::Separable).is_err());
        let gamma_noise = Resources { big_gamma: 0.1, ..res(1e-4) };
        assert!(optimum_for_regime(&gamma_noise, Regime::LongT, Scheme::Separable).is_err());
        let short = Resources { total_time: 1e3, ..res(1e-2) };
        assert!(optimum_for_regime(&short, Regime::ShortT, Scheme::Separable).is_err());
        let few = Resources { probes: 10, ..res(1e-4) };
        assert!(matches!(
            optimum_for_regime(&few, Regime::LongT, Scheme::Entangled),
            Err(OptimizerError::BlockExceedsProbes { .. })
        ));
    }

    proptest! {
        #[test]
        fn long_t_optima_are_certified(lp in -4.0f64..-1.5, entangled in proptest::bool::ANY) {
            let p = 10f64.powf(lp);
            let r = Resources { probes: 5000, total_time: 1e6, ..res(p) };
            let scheme = if entangled { Scheme::Entangled } else { Scheme::Separable };
            let o = optimum_for_regime(&r, Regime::LongT, scheme).unwrap();
            prop_assert!(o.certificate(&r) <= 1e-6);
        }

        #[test]
        fn t_opt_beats_log_grid(n in 1.0f64..50.0, m in 1.0f64..8.0, gamma in 0.2f64..5.0) {
            let t = t_opt_ghz(n, m, gamma).unwrap();
            let eval = |x: f64| ContinuumPoint { gamma, ..unit_point(0.0, m, n, x) }.delta_omega();
            let best = eval(t);
            for k in 0..400 {
                let x = t * 10f64.powf(-1.0 + 2.0 * f64::from(k) / 399.0);
                prop_assert!(eval(x) >= best * (1.0 - 1e-12));
            }
        }
    }
}
