//! Acceptance suite: one PASS/FAIL line per criterion on stderr.
//!
//! Runs without the libtest harness so the report is always visible. The
//! exit status is nonzero when a criterion fails in a way the analysis does
//! not predict; a predicted failure is still printed as FAIL.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use telesense::channels::dense::DenseBlockState;
use telesense::channels::Dephasing;
use telesense::env::{
    dephasing_envelope, independent_envelope, oracle_envelope, run_teleported_envelope, EnvModel,
    RingTopology,
};
use telesense::optimizer::{
    break_even_p, contour_m_at, contour_p_at, optimum_for_regime, ramsey_ratio_long_t, Regime,
    Resources, Scheme,
};
use telesense::protocol::{
    ramsey_baseline, run_cycle, sensitivity_closed_form, sensitivity_from_pipeline,
    sensitivity_monte_carlo, ContinuumPoint,
};
use telesense::rng::batch_rng;
use telesense::swap::{
    evolve, frame_correction, run_transport_protocol, sensing_phase, build_schedule, ChainConfig,
    Hamiltonian, PulseMode, PureState,
};
use telesense::ProtocolParams;

/// Outcome of one criterion.
struct Verdict {
    pass: bool,
    /// A failure the notes derive in advance; does not fail the run.
    predicted: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            predicted: false,
            detail,
        }
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    if took > budget {
        v.pass = false;
        v.predicted = false;
    }
    v.detail = format!("{} [{:.2} s / {} s]", v.detail, took.as_secs_f64(), budget.as_secs());
    v
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn random_params(rng: &mut impl Rng) -> ProtocolParams {
    let block = rng.random_range(1..=6u32);
    let probes = block * rng.random_range(1..=8u32);
    let cycle_time = rng.random_range(0.01..3.0);
    ProtocolParams {
        gamma: rng.random_range(0.0..2.0),
        omega: rng.random_range(-3.0..3.0),
        p: rng.random_range(0.0..0.2),
        big_gamma: rng.random_range(0.0..0.5),
        probes,
        block,
        segments: rng.random_range(1..=40u32),
        cycle_time,
        total_time: cycle_time * rng.random_range(1.0..1e4),
    }
}

fn criterion_1() -> Verdict {
    let mut rng = batch_rng(1, 0);
    let (mut worst, mut used) = (0.0f64, 0);
    while used < 10_000 {
        let p = random_params(&mut rng);
        let (Ok(a), Ok(b)) = (sensitivity_closed_form(&p), sensitivity_from_pipeline(&p)) else {
            continue;
        };
        let r = rel(b.delta_omega, a.delta_omega);
        worst = if r.is_finite() { worst.max(r) } else { f64::INFINITY };
        used += 1;
    }
    Verdict::new(worst <= 1e-9, format!("{used} draws, worst relative gap {worst:.2e} (tol 1e-9)"))
}

fn criterion_2() -> Verdict {
    let mut rng = batch_rng(2, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(1..=6u32);
        let n = rng.random_range(1..=6u32);
        let p = ProtocolParams {
            block: m,
            probes: m,
            segments: n,
            ..random_params(&mut rng)
        };
        let scalar = run_cycle(&p).expect("valid draw").value();
        let mut dense = DenseBlockState::ghz(m);
        let noise = Dephasing::from(&p);
        for k in 0..n {
            dense.evolve_segment(&noise, p.segment_time());
            if k + 1 < n {
                dense.apply_teleport(p.p);
            }
        }
        worst = worst.max((dense.coherence() - scalar).norm());
    }
    Verdict::new(worst <= 1e-12, format!("1000 draws, M in 1..6, worst |c_dense - c| = {worst:.2e} (tol 1e-12)"))
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_3() -> Verdict {
    let (gamma, block, probes) = (1.0, 2u32, 4u32);
    let ts: Vec<f64> = (0..20).map(|i| 10.0 * 100f64.powf(f64::from(i) / 19.0) / gamma).collect();
    let zeno: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let n = (4.0 * f64::from(block) * gamma * gamma * t * t).ceil() as u32;
            let p = ProtocolParams {
                gamma,
                omega: 0.0,
                p: 0.0,
                big_gamma: 0.0,
                probes,
                block,
                segments: n,
                cycle_time: t,
                total_time: t,
            };
            sensitivity_closed_form(&p).unwrap().delta_omega.ln()
        })
        .collect();
    let ramsey: Vec<f64> = ts.iter().map(|&t| ramsey_baseline(gamma, t, f64::from(probes)).ln()).collect();
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let (a, b) = (fit_slope(&lx, &zeno), fit_slope(&lx, &ramsey));
    Verdict::new(
        (a + 1.0).abs() <= 0.02 && (b + 0.5).abs() <= 0.02,
        format!("teleported slope {a:.4} (want -1.00 +- 0.02), Ramsey slope {b:.4} (want -0.50 +- 0.02)"),
    )
}

/// Printed cells, written out independently of the library.
fn printed_general(m: f64, gamma: f64, p: f64, l: f64, big_t: f64, t: f64, n: f64) -> f64 {
    (m * gamma * gamma * t * t / n).exp() / ((1.0 - p).powf(m * (n - 1.0)) * (m * l * big_t * t).sqrt())
}

fn printed_heisenberg(m: f64, l: f64, big_t: f64) -> f64 {
    0.25f64.exp() / (big_t * (m * l).sqrt())
}

fn printed_long_t(entangled: bool, p: f64, gamma: f64, l: f64, big_t: f64) -> f64 {
    let pre = if entangled { 2f64.powf(0.75) } else { 2.0 };
    pre * (1f64.exp() * p.sqrt() * gamma / (big_t * l)).sqrt()
}

fn criterion_4() -> Verdict {
    let mut rng = batch_rng(4, 0);
    let mut worst = [0.0f64; 6];
    let mut caption_ok = true;
    for _ in 0..20 {
        let gamma = rng.random_range(0.2..5.0);
        let m = rng.random_range(1..=8u32);
        let l = m * rng.random_range(1..=8u32);
        let (mf, lf) = (f64::from(m), f64::from(l));

        // General form: library route vs printed expression.
        for (k, mm) in [(0usize, mf), (1, 1.0)] {
            let point = ContinuumPoint {
                gamma,
                big_gamma: 0.0,
                p: rng.random_range(0.0..0.1),
                probes: lf,
                block: mm,
                segments: rng.random_range(1.0..50.0),
                cycle_time: rng.random_range(0.05..3.0),
                total_time: rng.random_range(10.0..1e4),
            };
            let want = printed_general(mm, gamma, point.p, lf, point.total_time, point.cycle_time, point.segments);
            worst[k] = worst[k].max(rel(point.delta_omega(), want));
        }

        // Perfect and short-T cells: t = T and n = 4 M gamma^2 T^2 substituted
        // into the general form. Short-T draws sit deep in their regime
        // (sqrt(p) gamma M T < 1e-5) where the dropped (1-p) factor is < 1e-9.
        for (k, scheme, mm) in [(2usize, Scheme::Entangled, mf), (3, Scheme::Separable, 1.0)] {
            let big_t = rng.random_range(1.0..100.0) / gamma;
            let scale: f64 = rng.random_range(1e-7..1e-5);
            let p_short = (scale / (gamma * mm * big_t)).powi(2);
            for (regime, p) in [(Regime::Noiseless, 0.0), (Regime::ShortT, p_short)] {
                let res = Resources {
                    gamma,
                    p,
                    big_gamma: 0.0,
                    probes: l,
                    total_time: big_t,
                    block: Some(m),
                };
                let o = optimum_for_regime(&res, regime, scheme).expect("regime applies");
                let n_star = 4.0 * mm * gamma * gamma * big_t * big_t;
                let substituted = printed_general(mm, gamma, p, lf, big_t, o.t_opt, n_star);
                let want = printed_heisenberg(mm, lf, big_t);
                worst[k] = worst[k].max(rel(substituted, want)).max(rel(o.table_value, want));
            }
        }

        // Long-T cells: continuum optimum (exact (1-p) factors) substituted
        // into the general form equals the printed cell times the known
        // factor from ln(1-p) -> -p; the tabulated value equals the cell.
        let p = 10f64.powf(rng.random_range(-6.0..-2.0));
        let big_t = 1e7 / gamma;
        let q = -(-p).ln_1p();
        let n_star = 1.0 / (4.0 * q);
        let res = Resources {
            gamma,
            p,
            big_gamma: 0.0,
            probes: 1 << 22,
            total_time: big_t,
            block: None,
        };
        let lf = f64::from(res.probes);
        let sep = printed_general(1.0, gamma, p, lf, big_t, n_star.sqrt() / (2.0 * gamma), n_star);
        let sep_cell = printed_long_t(false, p, gamma, lf, big_t);
        let ghz_m = n_star;
        let ghz = printed_general(ghz_m, gamma, p, lf, big_t, 1.0 / (gamma * (2.0 * ghz_m).sqrt()), 2.0);
        let ghz_cell = printed_long_t(true, p, gamma, lf, big_t);
        let o_sep = optimum_for_regime(&res, Regime::LongT, Scheme::Separable).unwrap();
        let o_ghz = optimum_for_regime(&res, Regime::LongT, Scheme::Entangled).unwrap();
        worst[4] = worst[4]
            .max(rel(sep, sep_cell * (1.0 - p) * (q / p).powf(0.25)))
            .max(rel(o_sep.table_value, sep_cell));
        worst[5] = worst[5]
            .max(rel(ghz, ghz_cell * (q / p).powf(0.25)))
            .max(rel(o_ghz.table_value, ghz_cell));

        // Caption: entangled cells at M = 1 are the separable cells.
        let res1 = Resources {
            gamma,
            p: 0.0,
            big_gamma: 0.0,
            probes: l,
            total_time: 50.0 / gamma,
            block: Some(1),
        };
        for regime in [Regime::Noiseless, Regime::ShortT] {
            let a = optimum_for_regime(&res1, regime, Scheme::Entangled).unwrap();
            let b = optimum_for_regime(&res1, regime, Scheme::Separable).unwrap();
            caption_ok &= a.table_value == b.table_value && a.delta_omega == b.delta_omega;
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    Verdict::new(
        max <= 1e-9 && caption_ok,
        format!(
            "20 draws; worst relative error general {:.1e}/{:.1e}, perfect+short-T {:.1e}/{:.1e}, long-T {:.1e}/{:.1e} (tol 1e-9); M=1 reduction identical: {caption_ok}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    )
}

fn criterion_5() -> Verdict {
    let root = break_even_p();
    let ratio = ramsey_ratio_long_t(1e-4).unwrap();
    Verdict::new(
        (0.0246..=0.0256).contains(&root) && (ratio - 3.89).abs() <= 0.02,
        format!("break-even p = {root:.5} (want [0.0246, 0.0256]), ratio at p = 1e-4 = {ratio:.4} (want 3.89 +- 0.02)"),
    )
}

fn criterion_6() -> Verdict {
    let within = |a: f64, b: f64| rel(a, b) <= 0.05;
    // A: intercepts on the axes (Gamma -> 0 for p, p -> 0 for Gamma/gamma).
    let a_p = contour_p_at(0.0).unwrap_or(f64::NAN);
    let a_m = contour_m_at(1e-6).unwrap_or(f64::NAN);
    // B: the quoted pair is one point of the contour (rectangle corner).
    let b_p = contour_p_at(0.130).unwrap_or(f64::NAN);
    let b_m = contour_m_at(0.0123).unwrap_or(f64::NAN);
    let a_ok = within(a_p, 0.0123) && within(a_m, 0.130);
    let b_ok = within(b_p, 0.0123) && within(b_m, 0.130);
    let which = match (a_ok, b_ok) {
        (true, true) => "both",
        (true, false) => "axis intercepts",
        (false, true) => "contour point (rectangle corner)",
        (false, false) => "neither",
    };
    Verdict::new(
        a_ok || b_ok,
        format!(
            "axis intercepts: p = {a_p:.4}, Gamma/gamma = {a_m:.4} (match: {a_ok}); corner: p(0.130) = {b_p:.5}, Gamma/gamma(0.0123) = {b_m:.4} (match: {b_ok}); matching interpretation: {which}"
        ),
    )
}

fn criterion_7() -> Verdict {
    let shots = 1_000_000;
    let noiseless = Resources {
        gamma: 1.0,
        p: 0.0,
        big_gamma: 0.0,
        probes: 4,
        total_time: 3.0,
        block: Some(2),
    };
    let long_t = Resources {
        gamma: 1.0,
        p: 1e-4,
        big_gamma: 0.0,
        probes: 16,
        total_time: 1e4,
        block: None,
    };
    let short_t = Resources {
        gamma: 1.0,
        p: 1e-6,
        big_gamma: 0.0,
        probes: 8,
        total_time: 5.0,
        block: Some(4),
    };
    let points = [
        ("noiseless", optimum_for_regime(&noiseless, Regime::Noiseless, Scheme::Entangled).unwrap().params(&noiseless)),
        ("long-T separable p=1e-4", optimum_for_regime(&long_t, Regime::LongT, Scheme::Separable).unwrap().params(&long_t)),
        ("GHZ short-T M=4", optimum_for_regime(&short_t, Regime::ShortT, Scheme::Entangled).unwrap().params(&short_t)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, (name, p)) in points.iter().enumerate() {
        let closed = sensitivity_closed_form(p).unwrap().delta_omega;
        let mc = sensitivity_monte_carlo(p, shots, 700 + k as u64).unwrap();
        let z = (mc.result.delta_omega - closed) / mc.std_error;
        pass &= z.abs() <= 3.0;
        parts.push(format!("{name}: {z:+.2} SE"));
    }
    Verdict::new(pass, format!("10^6 shots; {}", parts.join(", ")))
}

fn criterion_8() -> Verdict {
    let traj = 100_000;
    let mut parts = Vec::new();
    let mut pass = true;
    let mut predicted_only = true;

    // (a) single window, gamma tau = 1, against e^{-gamma^2 tau^2}.
    let tau_c = 1.0;
    for (k, x) in [1e-3, 1e-2, 1e-1].into_iter().enumerate() {
        let tau = x * tau_c;
        let lambda = 1.0 / (2f64.sqrt() * tau);
        let env = EnvModel { lambda, c0: 1.0, tau_c, seed: 80 + k as u64 };
        let est = dephasing_envelope(&env, tau, traj).unwrap();
        let quad = (-(env.gamma() * tau).powi(2)).exp();
        let exact = oracle_envelope(&env, &RingTopology { sites: 1, stride: 1 }, 1, tau);
        let z = est.sigmas_from(quad);
        let z_exact = est.sigmas_from(exact);
        // The quadratic form drops the finite-correlation-time correction,
        // roughly a relative x/3 in the exponent.
        let expected = (exact - quad) / est.std_error;
        let ok = z.abs() <= 3.0;
        if !ok {
            pass = false;
            predicted_only &= (z - expected).abs() <= 3.0 && z_exact.abs() <= 3.0;
        }
        parts.push(format!("(a) tau = tau_c*{x:e}: {z:+.2} sigma (exact OU oracle {z_exact:+.2}, predicted offset {expected:+.2})"));
    }

    // (b) n fresh sites, t/n windows.
    let (n, t) = (10u32, 0.01);
    let tau = t / f64::from(n);
    let lambda = (f64::from(n) / (2.0 * t * t)).sqrt();
    let env = EnvModel { lambda, c0: 1.0, tau_c: 1.0, seed: 90 };
    let ring = RingTopology::separable(n);
    let est = run_teleported_envelope(&env, &ring, n, tau, traj).unwrap();
    let z = est.sigmas_from((-(env.gamma() * t).powi(2) / f64::from(n)).exp());
    pass &= z.abs() <= 3.0 && !ring.revisits(n);
    predicted_only &= z.abs() <= 3.0;
    parts.push(format!("(b) {n} fresh sites: {z:+.2} sigma"));

    // (c) revisits separated by tau >> tau_c.
    let ring = RingTopology { sites: 2, stride: 1 };
    let (n, tau_c, tau) = (6u32, 0.01, 1.0);
    let env = EnvModel { lambda: 0.5 / (f64::from(n) * 2.0 * tau_c * tau).sqrt(), c0: 1.0, tau_c, seed: 91 };
    let est = run_teleported_envelope(&env, &ring, n, tau, traj).unwrap();
    let z = est.sigmas_from(independent_envelope(&env, n, tau));
    pass &= z.abs() <= 3.0 && ring.revisits(n);
    predicted_only &= z.abs() <= 3.0;
    parts.push(format!("(c) revisit, gap/tau_c = 100: {z:+.2} sigma from independent"));

    // (d) revisits separated by tau << tau_c.
    let (tau_c, tau) = (100.0, 0.01);
    let env = EnvModel { lambda: 0.5 / (f64::from(n) * tau), c0: 1.0, tau_c, seed: 92 };
    let est = run_teleported_envelope(&env, &ring, n, tau, traj).unwrap();
    let z_ind = est.sigmas_from(independent_envelope(&env, n, tau));
    let z_or = est.sigmas_from(oracle_envelope(&env, &ring, n, tau));
    let ok = z_ind.abs() > 5.0 && z_or.abs() <= 3.0;
    pass &= ok;
    predicted_only &= ok;
    parts.push(format!("(d) revisit, gap/tau_c = 1e-4: {z_ind:+.1} sigma from independent, {z_or:+.2} sigma from quadrature oracle"));

    Verdict {
        pass,
        predicted: !pass && predicted_only,
        detail: format!("10^5 trajectories; {}", parts.join("; ")),
    }
}

fn criterion_9() -> Verdict {
    let pair = |d: f64| Hamiltonian::new(2, 0.0, vec![0.0, d], 1.0).unwrap();
    let t_pi = std::f64::consts::FRAC_PI_2;
    let moved = evolve(&PureState::basis(2, &[0]), &pair(0.0), t_pi).unwrap().population(1);
    let s_fix = frame_correction(&pair(0.0), t_pi).iter().all(|&phi| (phi - t_pi).abs() < 1e-12);
    let mut leak_err = 0.0f64;
    for delta in [20.0, 50.0] {
        let w = (delta * delta + 4.0f64).sqrt();
        for t in [0.1, 0.77, 2.5, 10.0] {
            let got = evolve(&PureState::basis(2, &[0]), &pair(delta), t).unwrap().population(1);
            let want = 4.0 / (delta * delta + 4.0) * (0.5 * w * t).sin().powi(2);
            leak_err = leak_err.max((got - want).abs());
        }
    }
    let base = ChainConfig { mode: PulseMode::Simultaneous, ..ChainConfig::with_sites(8) };
    let n = 8;
    let exposure: f64 = build_schedule(&base, n).iter().map(|s| s.duration).sum();
    let c = ChainConfig { omega: 1.0 / exposure, ..base };
    let r = run_transport_protocol(&c, &[0], n).unwrap();
    let ph = sensing_phase(&c, &[0], n).unwrap();
    let serial = run_transport_protocol(&ChainConfig { mode: PulseMode::Serialized, ..c }, &[0], n).unwrap();
    let pass = 1.0 - moved <= 1e-10
        && s_fix
        && leak_err <= 1e-10
        && r.min_fidelity() >= 0.999
        && ph.calibrated_error.abs() <= 1e-3;
    Verdict::new(
        pass,
        format!(
            "pulse transfer 1 - {:.1e}, S on both sites: {s_fix}; detuned leakage max error {leak_err:.1e}; K = 8, Delta/g = 50, {} sites visited, simultaneous pulses: min step fidelity {:.5}, sensing phase error {:.1e} rad (omega t = 1; zero-field control offset {:.1e} rad, raw {:.1e} rad); serialized schedule min step fidelity {:.5} (reported)",
            1.0 - moved,
            r.final_site + 1,
            r.min_fidelity(),
            ph.calibrated_error,
            ph.control_offset,
            ph.raw_error,
            serial.min_fidelity()
        ),
    )
}

fn criterion_10() -> Verdict {
    let dir = std::env::temp_dir().join(format!("telesense-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases: [&[&str]; 4] = [
        &["sensitivity", "--sweep", "T:10:1000:5:log", "--set", "shots=50000"],
        &["optimize", "--sweep", "p:1e-5:1e-2:4:log"],
        &["env", "--set", "trajectories=20000", "--sweep", "tau:0.001:0.1:3:log"],
        &["swap", "--set", "segments=4"],
    ];
    let mut same = true;
    for (k, args) in cases.iter().enumerate() {
        let mut files = Vec::new();
        for rerun in 0..2 {
            let path = dir.join(format!("{k}_{rerun}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_telesense"))
                .env_remove("ZENO_SEED")
                .args(*args)
                .args(["--seed", "2024", "--out"])
                .arg(&path)
                .status()
                .unwrap();
            // Exit code 1 only marks flagged rows; the output is still written.
            same &= matches!(status.code(), Some(0 | 1));
            files.push(std::fs::read(&path).unwrap_or_default());
        }
        same &= !files[0].is_empty() && files[0] == files[1];
    }
    let _ = std::fs::remove_dir_all(&dir);
    Verdict::new(same, "sensitivity, optimize, env and swap re-run with seed 2024: outputs byte-identical".into())
}

/// Id, time budget in seconds, check.
type Criterion = (u32, u64, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, 5, criterion_1),
        (2, 30, criterion_2),
        (3, 1, criterion_3),
        (4, 1, criterion_4),
        (5, 1, criterion_5),
        (6, 30, criterion_6),
        (7, 60, criterion_7),
        (8, 120, criterion_8),
        (9, 60, criterion_9),
        (10, 120, criterion_10),
    ];
    let mut unexpected = 0;
    for (id, budget, f) in criteria {
        let v = timed(Duration::from_secs(budget), f);
        let tag = match (v.pass, v.predicted) {
            (true, _) => "PASS",
            (false, true) => "FAIL (predicted, see notes)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        eprintln!("{tag} criterion {id}: {}", v.detail);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
