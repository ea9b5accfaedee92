//! Per grid point: a single-window envelope and a teleported ring envelope,
//! each next to the exact Gaussian oracle.

use telesense::env::{
    dephasing_envelope, independent_envelope, oracle_envelope, run_teleported_envelope,
    EnvModel, EnvelopeEstimate, RingTopology,
};

use crate::config::{key, KeySpec, Kind, Settings};
use crate::table::{Cell, Table};
use crate::{empty, point_error, point_seed, row, CliError, RunConfig};

pub const KEYS: &[KeySpec] = &[
    key("lambda", "1", Kind::Real),
    key("c0", "1", Kind::Real),
    key("tau_c", "1", Kind::Real),
    key("tau", "0.01", Kind::Real),
    key("segments", "4", Kind::Int),
    key("sites", "8", Kind::Int),
    key("stride", "1", Kind::Int),
    key("trajectories", "100000", Kind::Int),
];

pub const COLUMNS: &[&str] = &[
    "section", "lambda", "c0", "tau_c", "tau", "segments", "sites", "stride", "revisit",
    "estimate", "std_error", "oracle", "independent", "quadratic", "sigmas",
];

/// Estimates further than this many standard errors from the oracle are flagged.
pub const ORACLE_SIGMAS: f64 = 5.0;

type Row = (Vec<Cell>, Option<String>);

fn model(s: &Settings, seed: u64) -> Result<EnvModel, CliError> {
    Ok(EnvModel {
        lambda: s.f64("lambda")?,
        c0: s.f64("c0")?,
        tau_c: s.f64("tau_c")?,
        seed,
    })
}

#[allow(clippy::too_many_arguments)]
fn envelope_row(
    section: &str,
    env: &EnvModel,
    tau: f64,
    ring: RingTopology,
    segments: u32,
    est: &EnvelopeEstimate,
    oracle: f64,
    independent: f64,
) -> Row {
    let quadratic = (-f64::from(segments) * env.gamma().powi(2) * tau * tau).exp();
    let sigmas = est.sigmas_from(oracle);
    let flag = (sigmas.abs() > ORACLE_SIGMAS).then(|| format!("oracle:{sigmas:.2}sigma"));
    (
        row![
            section,
            env.lambda,
            env.c0,
            env.tau_c,
            tau,
            segments,
            ring.sites,
            ring.stride,
            if ring.revisits(segments) { "true" } else { "false" },
            est.mean,
            est.std_error,
            oracle,
            independent,
            quadratic,
            sigmas
        ],
        flag,
    )
}

pub fn run(run: &RunConfig) -> Result<Table, CliError> {
    let per_point = run.map_points(|i, s| {
        let tau = s.f64("tau")?;
        let traj = s.u64("trajectories")?;
        let single = RingTopology { sites: 1, stride: 1 };
        let env = model(s, point_seed(run.seed, 2 * i))?;
        let window = dephasing_envelope(&env, tau, traj).map_err(|e| point_error(i, e))?;
        let w_oracle = oracle_envelope(&env, &single, 1, tau);
        let mut rows = vec![envelope_row("window", &env, tau, single, 1, &window, w_oracle, w_oracle)];

        let env = model(s, point_seed(run.seed, 2 * i + 1))?;
        let ring = RingTopology {
            sites: s.u32("sites")?,
            stride: s.u32("stride")?,
        };
        let n = s.u32("segments")?;
        let est = run_teleported_envelope(&env, &ring, n, tau, traj).map_err(|e| point_error(i, e))?;
        rows.push(envelope_row(
            "ring",
            &env,
            tau,
            ring,
            n,
            &est,
            oracle_envelope(&env, &ring, n, tau),
            independent_envelope(&env, n, tau),
        ));
        Ok(rows)
    })?;
    let mut table = Table::new(COLUMNS.to_vec());
    for (cells, flag) in per_point.into_iter().flatten() {
        table.push(cells, flag);
    }

    // Same seed twice must give the same estimate.
    let s = &run.settings;
    let env = model(s, run.seed)?;
    let (tau, traj) = (s.f64("tau")?, s.u64("trajectories")?);
    let a = dephasing_envelope(&env, tau, traj).map_err(|e| point_error(0, e))?;
    let b = dephasing_envelope(&env, tau, traj).map_err(|e| point_error(0, e))?;
    let mut cells = vec![Cell::from("determinism")];
    cells.extend((1..COLUMNS.len() - 6).map(|_| empty()));
    cells.extend(row![a.mean, a.std_error, b.mean, empty(), empty(), empty()]);
    table.push(cells, (a != b).then(|| "nondeterministic".to_string()));
    Ok(table)
}
