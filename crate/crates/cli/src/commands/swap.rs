//! Per grid point and schedule mode: per-step fidelities and a phase
//! summary; then one far-detuned row against the ideal cycle.

use telesense::protocol::run_cycle;
use telesense::swap::{
    build_schedule, run_transport_protocol, sensing_phase, ChainConfig, PulseMode, StepKind,
};
use telesense::ProtocolParams;

use crate::config::{key, KeySpec, Kind, Settings};
use crate::table::{Cell, Table};
use crate::{empty, point_error, row, CliError, RunConfig};

pub const KEYS: &[KeySpec] = &[
    key("K", "8", Kind::Int),
    key("g", "1", Kind::Real),
    key("delta_ratio", "50", Kind::Real),
    key("min_ratio", "20", Kind::Real),
    key("tau", "100", Kind::Real),
    key("segments", "8", Kind::Int),
    key("pulse_scale", "1", Kind::Real),
    key("omega_t", "1", Kind::Real),
    key("mode", "both", Kind::Text),
    key("probes", "0", Kind::Text),
    key("limit", "true", Kind::Text),
];

pub const COLUMNS: &[&str] = &[
    "section", "mode", "delta_ratio", "pulse_scale", "segments", "step", "kind", "fidelity",
    "mean_infidelity", "raw_phase_error", "sensing_phase_error", "control_offset", "value",
];

/// Referenced sensing phase beyond this is flagged (rad).
pub const PHASE_TOL: f64 = 1e-6;

/// Far-detuned run vs ideal cycle beyond this is flagged.
pub const LIMIT_TOL: f64 = 1e-3;

type Row = (Vec<Cell>, Option<String>);

fn mode_name(m: PulseMode) -> &'static str {
    match m {
        PulseMode::Serialized => "serialized",
        PulseMode::Simultaneous => "simultaneous",
    }
}

fn modes(s: &Settings) -> Result<Vec<PulseMode>, CliError> {
    match s.string("mode") {
        "both" => Ok(vec![PulseMode::Serialized, PulseMode::Simultaneous]),
        "serialized" => Ok(vec![PulseMode::Serialized]),
        "simultaneous" => Ok(vec![PulseMode::Simultaneous]),
        other => Err(crate::config::ConfigError::BadValue {
            key: "mode".into(),
            value: other.into(),
            expected: "serialized, simultaneous or both",
        }
        .into()),
    }
}

fn chain(s: &Settings, mode: PulseMode) -> Result<ChainConfig, CliError> {
    let g = s.f64("g")?;
    let base = ChainConfig {
        g,
        tau: s.f64("tau")?,
        pulse_scale: s.f64("pulse_scale")?,
        mode,
        min_detuning_ratio: s.f64("min_ratio")?,
        ..ChainConfig::with_sites(s.u32("K")? as usize)
    };
    Ok(base.with_detuning_ratio(s.f64("delta_ratio")?))
}

fn point_rows(i: usize, s: &Settings) -> Result<Vec<Row>, CliError> {
    let probes: Vec<usize> = s.list("probes")?;
    let n = s.u32("segments")?;
    let mut rows = Vec::new();
    for mode in modes(s)? {
        let base = chain(s, mode)?;
        let exposure: f64 = build_schedule(&base, n).iter().map(|x| x.duration).sum();
        let c = ChainConfig {
            omega: s.f64("omega_t")? / exposure,
            ..base
        };
        let r = run_transport_protocol(&c, &probes, n).map_err(|e| point_error(i, e))?;
        let ph = sensing_phase(&c, &probes, n).map_err(|e| point_error(i, e))?;
        let head = |section: &str| row![section, mode_name(mode), s.f64("delta_ratio").unwrap_or(f64::NAN), c.pulse_scale, n];
        for st in &r.steps {
            let kind = match st.kind {
                StepKind::Sense => "sense",
                StepKind::Pulse => "pulse",
            };
            let mut cells = head("step");
            cells.extend(row![st.index as u64, kind, st.fidelity, empty(), empty(), empty(), empty(), empty()]);
            rows.push((cells, None));
        }
        let mean_inf = r.steps.iter().map(|x| 1.0 - x.fidelity).sum::<f64>() / r.steps.len() as f64;
        let mut cells = head("summary");
        cells.extend(row![
            empty(),
            empty(),
            r.min_fidelity(),
            mean_inf,
            ph.raw_error,
            ph.calibrated_error,
            ph.control_offset,
            r.exposure_time
        ]);
        let flag = (ph.calibrated_error.abs() > PHASE_TOL).then(|| format!("phase:{:e}", ph.calibrated_error));
        rows.push((cells, flag));
    }
    Ok(rows)
}

/// Ratio 1000 on K = 4 against the instant-swap cycle.
fn limit_row() -> Result<Row, CliError> {
    let (ratio, n) = (1000.0, 3);
    let c = ChainConfig {
        omega: 0.05,
        tau: 10.0,
        mode: PulseMode::Simultaneous,
        min_detuning_ratio: 5.0,
        ..ChainConfig::with_sites(4)
    }
    .with_detuning_ratio(ratio);
    let r = run_transport_protocol(&c, &[0], n).map_err(|e| point_error(0, e))?;
    let ideal = run_cycle(&ProtocolParams {
        gamma: 0.0,
        omega: c.omega,
        p: 0.0,
        big_gamma: 0.0,
        probes: 1,
        block: 1,
        segments: n,
        cycle_time: r.exposure_time,
        total_time: r.exposure_time,
    })
    .map_err(|e| point_error(0, e))?;
    let diff = (r.coherence() - ideal.value()).norm();
    let cells = row![
        "limit",
        "simultaneous",
        ratio,
        c.pulse_scale,
        n,
        empty(),
        empty(),
        r.min_fidelity(),
        empty(),
        empty(),
        empty(),
        empty(),
        diff
    ];
    Ok((cells, (diff > LIMIT_TOL).then(|| format!("limit:{diff:e}"))))
}

pub fn run(run: &RunConfig) -> Result<Table, CliError> {
    let per_point = run.map_points(point_rows)?;
    let mut table = Table::new(COLUMNS.to_vec());
    for (cells, flag) in per_point.into_iter().flatten() {
        table.push(cells, flag);
    }
    if run.settings.bool("limit")? {
        let (cells, flag) = limit_row()?;
        table.push(cells, flag);
    }
    Ok(table)
}
