//! State-vector simulation of SWAP transport on a ring of flip-flop coupled
//! qubits driven only by a global frequency schedule.
//!
//! Sites s = 0..K-1 carry detunings (relative to the common frequency, whose
//! rotating frame is used throughout):
//!
//! | s mod 4 | frequency |
//! |---------|-----------|
//! | 0       | tunable (family 0) |
//! | 1       | omega_A   |
//! | 2       | tunable (family 2) |
//! | 3       | omega_B   |
//!
//! H = sum_s (omega + d_s)/2 Z_s + g sum_bonds (s+ s- + s- s+), with
//! Z = diag(1, -1) and |1> the excitation. H conserves the excitation number
//! and is real, so it is propagated sector by sector through a real symmetric
//! eigendecomposition.
//!
//! After every segment the controller applies a local frame correction: on
//! each site a phase that makes the single-excitation amplitude from the
//! site's intended source real and positive (the site itself while idle, its
//! partner during a pulse). For an isolated resonant pair this is S on both
//! qubits (S = diag(1, i)), turning the iSWAP-like pulse into SWAP on the
//! occupied sectors. The correction depends only on the schedule, never on
//! the sensed shift omega.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Memory guard on the register size.
pub const MAX_SITES: usize = 12;

/// Smallest accepted |omega_i - omega_j| / g among the schedule frequencies.
pub const DEFAULT_MIN_DETUNING_RATIO: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwapError {
    #[error("register of {0} sites exceeds the limit of {MAX_SITES}")]
    TooManySites(usize),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("frequencies {a} and {b} are only {ratio:.1} g apart (need >= {min})")]
    DetuningTooSmall { a: f64, b: f64, ratio: f64, min: f64 },
    #[error("probe must start on a tunable (even) site (got {0})")]
    ProbeSite(usize),
    #[error("state has {got} amplitudes, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Whether the two tunable families pulse together or one after the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PulseMode {
    Serialized,
    Simultaneous,
}

/// Ring parameters and frequency plan, all in the rotating frame.
///
/// During sensing the two tunable families park at `omega_c` and
/// `omega_c_prime`. They must differ: at equal values every tunable site is
/// resonant with the next one through a virtual hop via the fixed site in
/// between (coupling g^2/Delta), which would move the probe during sensing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainConfig {
    pub sites: usize,
    /// Sensed frequency shift omega.
    pub omega: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_c: f64,
    pub omega_c_prime: f64,
    pub g: f64,
    /// Sensing interval tau.
    pub tau: f64,
    /// Pulse length in units of pi/(2g).
    pub pulse_scale: f64,
    pub mode: PulseMode,
    pub min_detuning_ratio: f64,
}

impl ChainConfig {
    /// Delta/g = 50 between neighbouring plan frequencies, g tau = 100.
    pub fn with_sites(sites: usize) -> Self {
        Self {
            sites,
            omega: 0.0,
            omega_a: 0.0,
            omega_b: 100.0,
            omega_c: 50.0,
            omega_c_prime: 150.0,
            g: 1.0,
            tau: 100.0,
            pulse_scale: 1.0,
            mode: PulseMode::Serialized,
            min_detuning_ratio: DEFAULT_MIN_DETUNING_RATIO,
        }
    }

    /// Same plan with every gap between plan frequencies set to `ratio` g.
    pub fn with_detuning_ratio(self, ratio: f64) -> Self {
        let step = ratio * self.g;
        Self {
            omega_a: 0.0,
            omega_c: step,
            omega_b: 2.0 * step,
            omega_c_prime: 3.0 * step,
            ..self
        }
    }

    pub fn pulse_time(&self) -> f64 {
        self.pulse_scale * FRAC_PI_2 / self.g
    }

    fn check_register(&self) -> Result<(), SwapError> {
        if self.sites > MAX_SITES {
            return Err(SwapError::TooManySites(self.sites));
        }
        if self.sites < 2 {
            return Err(SwapError::InvalidChain(format!(
                "need at least 2 sites (got {})",
                self.sites
            )));
        }
        let finite = [self.omega, self.g, self.tau, self.pulse_scale]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.g <= 0.0 || self.tau < 0.0 || self.pulse_scale < 0.0 {
            return Err(SwapError::InvalidChain(
                "g must be > 0; tau and pulse_scale >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Full validation for transport: register size, ring closure of the
    /// mod-4 pattern, and the detuning invariant.
    pub fn validate(&self) -> Result<(), SwapError> {
        self.check_register()?;
        if !self.sites.is_multiple_of(4) {
            return Err(SwapError::InvalidChain(format!(
                "transport needs K divisible by 4 (got {})",
                self.sites
            )));
        }
        let plan = [
            self.omega_a,
            self.omega_b,
            self.omega_c,
            self.omega_c_prime,
        ];
        for (i, &a) in plan.iter().enumerate() {
            for &b in &plan[i + 1..] {
                let ratio = (a - b).abs() / self.g;
                if !(ratio >= self.min_detuning_ratio) {
                    return Err(SwapError::DetuningTooSmall {
                        a,
                        b,
                        ratio,
                        min: self.min_detuning_ratio,
                    });
                }
            }
        }
        Ok(())
    }

    fn detunings(&self, family0: f64, family2: f64) -> Vec<f64> {
        (0..self.sites)
            .map(|s| match s % 4 {
                0 => family0,
                1 => self.omega_a,
                2 => family2,
                _ => self.omega_b,
            })
            .collect()
    }
}

/// Nearest-neighbour bonds of the ring, each listed once.
pub fn bonds(sites: usize) -> Vec<(usize, usize)> {
    match sites {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        k => (0..k).map(|s| (s, (s + 1) % k)).collect(),
    }
}

fn mask(sites: usize, s: usize) -> usize {
    1 << (sites - 1 - s)
}

/// Flip-flop ring Hamiltonian for one frequency assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub sites: usize,
    pub omega: f64,
    pub detunings: Vec<f64>,
    pub g: f64,
}

impl Hamiltonian {
    pub fn new(sites: usize, omega: f64, detunings: Vec<f64>, g: f64) -> Result<Self, SwapError> {
        if sites > MAX_SITES {
            return Err(SwapError::TooManySites(sites));
        }
        if detunings.len() != sites {
            return Err(SwapError::InvalidChain(format!(
                "{} detunings for {sites} sites",
                detunings.len()
            )));
        }
        Ok(Self {
            sites,
            omega,
            detunings,
            g,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    fn energy(&self, index: usize) -> f64 {
        (0..self.sites)
            .map(|s| {
                let z = if index & mask(self.sites, s) == 0 { 1.0 } else { -1.0 };
                0.5 * (self.omega + self.detunings[s]) * z
            })
            .sum()
    }

    /// Indices reached from `index` by one flip-flop.
    fn hops(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        bonds(self.sites).into_iter().filter_map(move |(a, b)| {
            let (ma, mb) = (mask(self.sites, a), mask(self.sites, b));
            ((index & ma == 0) != (index & mb == 0)).then_some(index ^ ma ^ mb)
        })
    }

    /// Dense real matrix (for checks on small registers).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            h[(i, i)] = self.energy(i);
            for j in self.hops(i) {
                h[(j, i)] += self.g;
            }
        }
        h
    }

    /// Single-excitation block without the uniform omega term: site s has
    /// energy -d_s relative to the vacuum.
    pub fn single_excitation_block(&self) -> DMatrix<f64> {
        let k = self.sites;
        let mut h = DMatrix::from_fn(k, k, |i, j| if i == j { -self.detunings[i] } else { 0.0 });
        for (a, b) in bonds(k) {
            h[(a, b)] += self.g;
            h[(b, a)] += self.g;
        }
        h
    }

    /// Sites grouped into resonant bonds (equal detunings).
    pub fn resonant_pairs(&self) -> Vec<(usize, usize)> {
        bonds(self.sites)
            .into_iter()
            .filter(|&(a, b)| self.detunings[a] == self.detunings[b])
            .collect()
    }
}

/// exp(-i H t) restricted to each excitation sector.
#[derive(Debug, Clone)]
pub struct Propagator {
    sectors: Vec<(Vec<usize>, DMatrix<Complex64>)>,
}

fn exp_symmetric(h: DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
    );
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.transpose()
}

impl Propagator {
    pub fn new(h: &Hamiltonian, duration: f64) -> Self {
        let k = h.sites;
        let mut by_count: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
        for i in 0..h.dim() {
            by_count[i.count_ones() as usize].push(i);
        }
        let sectors = by_count
            .into_iter()
            .map(|indices| {
                let pos: HashMap<usize, usize> =
                    indices.iter().enumerate().map(|(p, &i)| (i, p)).collect();
                let mut block = DMatrix::<f64>::zeros(indices.len(), indices.len());
                for (p, &i) in indices.iter().enumerate() {
                    block[(p, p)] = h.energy(i);
                    for j in h.hops(i) {
                        block[(pos[&j], p)] += h.g;
                    }
                }
                let u = exp_symmetric(block, duration);
                (indices, u)
            })
            .collect();
        Self { sectors }
    }

    pub fn apply(&self, state: &PureState) -> PureState {
        let mut out = DVector::zeros(state.amplitudes.len());
        for (indices, u) in &self.sectors {
            let sub = DVector::from_iterator(indices.len(), indices.iter().map(|&i| state.amplitudes[i]));
            let next = u * sub;
            for (p, &i) in indices.iter().enumerate() {
                out[i] = next[p];
            }
        }
        PureState {
            sites: state.sites,
            amplitudes: out,
        }
    }
}

/// Applies exp(-i H duration) to `state`.
pub fn evolve(state: &PureState, h: &Hamiltonian, duration: f64) -> Result<PureState, SwapError> {
    if state.amplitudes.len() != h.dim() {
        return Err(SwapError::Dimension {
            got: state.amplitudes.len(),
            expected: h.dim(),
        });
    }
    if !(duration >= 0.0) {
        return Err(SwapError::InvalidChain(format!(
            "duration must be >= 0 (got {duration})"
        )));
    }
    Ok(Propagator::new(h, duration).apply(state))
}

/// State vector of the full register (site 0 is the most significant bit).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub sites: usize,
    pub amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Product state with |+> on `plus` sites and |0> elsewhere.
    pub fn product(sites: usize, plus: &[usize]) -> Self {
        let mut amplitudes = DVector::from_element(1, Complex64::new(1.0, 0.0));
        for s in 0..sites {
            let q = if plus.contains(&s) {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                DVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)])
            } else {
                DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
            };
            amplitudes = amplitudes.kronecker(&q);
        }
        Self { sites, amplitudes }
    }

    /// Single basis state with excitations on `excited`.
    pub fn basis(sites: usize, excited: &[usize]) -> Self {
        let index = excited.iter().fold(0, |acc, &s| acc | mask(sites, s));
        let mut amplitudes = DVector::zeros(1 << sites);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { sites, amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// <sum_s n_s>
    pub fn excitation_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * f64::from(i.count_ones()))
            .sum()
    }

    /// Probability that site `s` is excited.
    pub fn population(&self, s: usize) -> f64 {
        let m = mask(self.sites, s);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Reduced density matrix of one site.
    pub fn reduced(&self, s: usize) -> Matrix2<Complex64> {
        let m = mask(self.sites, s);
        let mut rho = Matrix2::zeros();
        for i in (0..self.amplitudes.len()).filter(|i| i & m == 0) {
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | m];
            rho[(0, 0)] += a0 * a0.conj();
            rho[(0, 1)] += a0 * a1.conj();
            rho[(1, 0)] += a1 * a0.conj();
            rho[(1, 1)] += a1 * a1.conj();
        }
        rho
    }

    /// |<self|other>|^2
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    fn scale_by_sites(&mut self, phases: &[f64]) {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            let phi: f64 = (0..self.sites)
                .filter(|&s| i & mask(self.sites, s) != 0)
                .map(|s| phases[s])
                .sum();
            *a *= Complex64::from_polar(1.0, phi);
        }
    }

    fn swap_sites(&mut self, a: usize, b: usize) {
        let (ma, mb) = (mask(self.sites, a), mask(self.sites, b));
        for i in 0..self.amplitudes.len() {
            if i & ma != 0 && i & mb == 0 {
                self.amplitudes.swap_rows(i, i ^ ma ^ mb);
            }
        }
    }
}

/// Local correction phases (applied to |1> on each site) for a segment.
pub fn frame_correction(h: &Hamiltonian, duration: f64) -> Vec<f64> {
    let u1 = exp_symmetric(h.single_excitation_block(), duration);
    let pairs = h.resonant_pairs();
    (0..h.sites)
        .map(|s| {
            let source = pairs
                .iter()
                .find_map(|&(a, b)| match (a == s, b == s) {
                    (true, _) => Some(b),
                    (_, true) => Some(a),
                    _ => None,
                })
                .unwrap_or(s);
            -u1[(s, source)].arg()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Sense,
    Pulse,
}

/// One segment of the frequency schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub kind: StepKind,
    pub duration: f64,
    pub detunings: Vec<f64>,
}

/// n sensing intervals separated by n - 1 hops; each hop is one pulse
/// (simultaneous) or one pulse per tunable family (serialized).
pub fn build_schedule(config: &ChainConfig, segments: u32) -> Vec<Segment> {
    let c = config;
    let sense = Segment {
        kind: StepKind::Sense,
        duration: c.tau,
        detunings: c.detunings(c.omega_c, c.omega_c_prime),
    };
    let pulse = |f0: f64, f2: f64| Segment {
        kind: StepKind::Pulse,
        duration: c.pulse_time(),
        detunings: c.detunings(f0, f2),
    };
    let mut out = Vec::new();
    for k in 0..segments {
        out.push(sense.clone());
        if k + 1 == segments {
            break;
        }
        // Even hops move probes from tunable to fixed sites, odd hops back.
        let (f0, f2) = if k % 2 == 0 {
            (c.omega_a, c.omega_b)
        } else {
            (c.omega_b, c.omega_a)
        };
        match c.mode {
            PulseMode::Simultaneous => out.push(pulse(f0, f2)),
            PulseMode::Serialized => {
                out.push(pulse(f0, c.omega_c_prime));
                out.push(pulse(c.omega_c, f2));
            }
        }
    }
    out
}

/// Fidelity of one schedule step against the ideal step applied to the
/// actual state before it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub kind: StepKind,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportReport {
    /// Where the tracked probe ends up.
    pub final_site: usize,
    #[serde(skip)]
    pub reduced: Matrix2<Complex64>,
    /// 2 <0|rho|1> of the tracked probe.
    pub coherence: (f64, f64),
    pub steps: Vec<StepRecord>,
    pub sensing_time: f64,
    /// Sensing plus pulse time: the probe feels omega throughout.
    pub exposure_time: f64,
    pub max_norm_error: f64,
    pub max_excitation_drift: f64,
}

impl TransportReport {
    pub fn coherence(&self) -> Complex64 {
        Complex64::new(self.coherence.0, self.coherence.1)
    }

    pub fn min_fidelity(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.fidelity)
            .fold(f64::INFINITY, f64::min)
    }

    /// arg c + omega * exposure, wrapped to (-pi, pi].
    pub fn raw_phase_error(&self, omega: f64) -> f64 {
        (self.coherence() * Complex64::from_polar(1.0, omega * self.exposure_time)).arg()
    }
}

/// Runs the schedule on a register with |+> probes on `probes` (even
/// sites) and |0> ancillas elsewhere, tracking the first listed probe.
pub fn run_transport_protocol(
    config: &ChainConfig,
    probes: &[usize],
    segments: u32,
) -> Result<TransportReport, SwapError> {
    config.validate()?;
    if segments == 0 {
        return Err(SwapError::InvalidChain("need at least one segment".into()));
    }
    let tracked = *probes
        .first()
        .ok_or_else(|| SwapError::InvalidChain("no probe".into()))?;
    if let Some(&bad) = probes.iter().find(|&&s| s % 2 != 0 || s >= config.sites) {
        return Err(SwapError::ProbeSite(bad));
    }
    let schedule = build_schedule(config, segments);
    let mut state = PureState::product(config.sites, probes);
    let excitations = state.excitation_number();
    let mut position = tracked;
    let mut cache: Vec<(Vec<f64>, f64, Propagator, Vec<f64>)> = Vec::new();
    let mut steps = Vec::with_capacity(schedule.len());
    let (mut sensing, mut exposure) = (0.0, 0.0);
    let (mut norm_err, mut drift) = (0.0f64, 0.0f64);

    for (index, seg) in schedule.iter().enumerate() {
        let h = Hamiltonian::new(config.sites, config.omega, seg.detunings.clone(), config.g)?;
        let slot = match cache
            .iter()
            .position(|(d, t, _, _)| *d == seg.detunings && *t == seg.duration)
        {
            Some(i) => i,
            None => {
                let prop = Propagator::new(&h, seg.duration);
                let fix = frame_correction(&h, seg.duration);
                cache.push((seg.detunings.clone(), seg.duration, prop, fix));
                cache.len() - 1
            }
        };
        let (_, _, prop, fix) = &cache[slot];
        let mut next = prop.apply(&state);
        next.scale_by_sites(fix);

        let mut ideal = state.clone();
        if seg.kind == StepKind::Pulse {
            for (a, b) in h.resonant_pairs() {
                ideal.swap_sites(a, b);
                if position == a {
                    position = b;
                } else if position == b {
                    position = a;
                }
            }
        }
        ideal.scale_by_sites(&vec![config.omega * seg.duration; config.sites]);
        steps.push(StepRecord {
            index,
            kind: seg.kind,
            fidelity: ideal.fidelity(&next),
        });
        if seg.kind == StepKind::Sense {
            sensing += seg.duration;
        }
        exposure += seg.duration;
        norm_err = norm_err.max((next.norm() - 1.0).abs());
        drift = drift.max((next.excitation_number() - excitations).abs());
        state = next;
    }
    let reduced = state.reduced(position);
    let c = reduced[(0, 1)] * 2.0;
    Ok(TransportReport {
        final_site: position,
        reduced,
        coherence: (c.re, c.im),
        steps,
        sensing_time: sensing,
        exposure_time: exposure,
        max_norm_error: norm_err,
        max_excitation_drift: drift,
    })
}

/// Sensing phase of the tracked probe referenced to a zero-field run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseReport {
    /// arg(c) + omega * exposure, no reference.
    pub raw_error: f64,
    /// arg(c_omega / c_0) + omega * exposure.
    pub calibrated_error: f64,
    /// Zero-field phase offset left by the control itself.
    pub control_offset: f64,
    pub exposure_time: f64,
}

pub fn sensing_phase(
    config: &ChainConfig,
    probes: &[usize],
    segments: u32,
) -> Result<PhaseReport, SwapError> {
    let with = run_transport_protocol(config, probes, segments)?;
    let zero = run_transport_protocol(
        &ChainConfig {
            omega: 0.0,
            ..*config
        },
        probes,
        segments,
    )?;
    let expected = Complex64::from_polar(1.0, config.omega * with.exposure_time);
    Ok(PhaseReport {
        raw_error: (with.coherence() * expected).arg(),
        calibrated_error: (with.coherence() / zero.coherence() * expected).arg(),
        control_offset: zero.coherence().arg(),
        exposure_time: with.exposure_time,
    })
}

/// Coherence of the instant-ideal-swap protocol: the probe only accumulates
/// e^{-i omega t}.
pub fn ideal_coherence(omega: f64, exposure: f64) -> Complex64 {
    Complex64::from_polar(1.0, -omega * exposure)
}
