//! One row per grid point: delta omega from all three estimators.

use telesense::protocol::{
    sensitivity_closed_form, sensitivity_from_pipeline, sensitivity_monte_carlo,
};
use telesense::ProtocolParams;

use crate::config::{key, KeySpec, Kind, Settings};
use crate::table::Table;
use crate::{point_error, point_seed, row, CliError, RunConfig};

pub const KEYS: &[KeySpec] = &[
    key("gamma", "1", Kind::Real),
    key("omega", "0", Kind::Real),
    key("p", "0", Kind::Real),
    key("big_gamma", "0", Kind::Real),
    key("L", "4", Kind::Int),
    key("M", "2", Kind::Int),
    key("n", "2", Kind::Int),
    key("t", "1", Kind::Real),
    key("T", "10", Kind::Real),
    key("shots", "100000", Kind::Int),
    key("mc", "true", Kind::Text),
];

pub const COLUMNS: &[&str] = &[
    "gamma", "omega", "p", "big_gamma", "L", "M", "n", "t", "T", "delta_closed",
    "delta_pipeline", "delta_mc", "delta_mc_se",
];

/// Closed form vs pipeline tolerance (relative).
pub const PIPELINE_TOL: f64 = 1e-9;

/// Monte-Carlo rows further than this many standard errors are flagged.
pub const MC_SIGMAS: f64 = 5.0;

/// `t = T` runs a single cycle; `n = zeno` picks ceil(4 M gamma^2 t^2).
pub fn params(s: &Settings) -> Result<ProtocolParams, CliError> {
    let (gamma, block, total_time) = (s.f64("gamma")?, s.u32("M")?, s.f64("T")?);
    let cycle_time = match s.string("t") {
        "T" => total_time,
        _ => s.f64("t")?,
    };
    let segments = match s.string("n") {
        "zeno" => (4.0 * f64::from(block) * gamma * gamma * cycle_time * cycle_time)
            .ceil()
            .clamp(1.0, f64::from(u32::MAX)) as u32,
        _ => s.u32("n")?,
    };
    Ok(ProtocolParams {
        gamma,
        omega: s.f64("omega")?,
        p: s.f64("p")?,
        big_gamma: s.f64("big_gamma")?,
        probes: s.u32("L")?,
        block,
        segments,
        cycle_time,
        total_time,
    })
}

pub fn run(run: &RunConfig, floor_repetitions: bool) -> Result<Table, CliError> {
    let rows = run.map_points(|i, s| {
        let p = params(s)?.validate().map_err(|e| point_error(i, e))?;
        // Rescales an estimate from real-valued N to floor(N).
        let scale = if floor_repetitions {
            let n = p.repetitions();
            (n / n.floor().max(1.0)).sqrt()
        } else {
            1.0
        };
        let mut flags = Vec::new();
        let closed = sensitivity_closed_form(&p).map(|r| r.delta_omega * scale);
        let pipeline = sensitivity_from_pipeline(&p).map(|r| r.delta_omega * scale);
        let (closed, pipeline) = match (closed, pipeline) {
            (Ok(a), Ok(b)) => {
                if (a - b).abs() > PIPELINE_TOL * a {
                    flags.push("pipeline");
                }
                (a, b)
            }
            _ => {
                flags.push("no-signal");
                (f64::NAN, f64::NAN)
            }
        };
        let (mc, se) = if s.bool("mc")? {
            match sensitivity_monte_carlo(&p, s.u64("shots")?, point_seed(run.seed, i)) {
                Ok(e) => {
                    let (d, se) = (e.result.delta_omega * scale, e.std_error * scale);
                    if (d - closed).abs() > MC_SIGMAS * se {
                        flags.push("mc");
                    }
                    (Some(d), Some(se))
                }
                Err(telesense::protocol::ProtocolError::TooFewShots { .. }) => {
                    return Err(point_error(i, "shots below the Monte-Carlo minimum"))
                }
                Err(_) => {
                    flags.push("mc-no-signal");
                    (None, None)
                }
            }
        } else {
            (None, None)
        };
        let flag = (!flags.is_empty()).then(|| flags.join("+"));
        Ok((
            row![
                p.gamma, p.omega, p.p, p.big_gamma, p.probes, p.block, p.segments, p.cycle_time,
                p.total_time, closed, pipeline, mc, se
            ],
            flag,
        ))
    })?;
    let mut table = Table::new(COLUMNS.to_vec());
    for (cells, flag) in rows {
        table.push(cells, flag);
    }
    Ok(table)
}
