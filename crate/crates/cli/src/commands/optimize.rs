//! Regime optima per grid point, then the break-even root, Ramsey ratios,
//! the high-frequency unit contour and its intercepts.

use telesense::optimizer::{
    break_even_p, contour_m_at, contour_p_at, high_freq_optimum, optimum_for_regime,
    ramsey_ratio_long_t, Optimum, OptimizerError, Regime, Resources, Scheme,
};

use crate::config::{key, KeySpec, Kind, Settings};
use crate::table::{Cell, Table};
use crate::{empty, point_error, row, CliError, RunConfig};

pub const KEYS: &[KeySpec] = &[
    key("gamma", "1", Kind::Real),
    key("p", "1e-4", Kind::Real),
    key("big_gamma", "0", Kind::Real),
    key("L", "16", Kind::Int),
    key("T", "10000", Kind::Real),
    key("M", "auto", Kind::Text),
    key("ratio_p", "1e-4,1e-3,1e-2", Kind::Text),
    key("contour_points", "9", Kind::Int),
    key("contour_max", "0.4", Kind::Real),
    key("scans", "true", Kind::Text),
];

pub const COLUMNS: &[&str] = &[
    "section", "regime", "scheme", "p", "gamma_ratio", "t_opt", "n_opt", "m_opt", "delta_omega",
    "table_value", "value",
];

/// An optimum is flagged when a neighbour improves on it by more than this.
pub const CERTIFICATE_TOL: f64 = 1e-12;

/// Gamma/gamma and p of the quoted threshold pair.
pub const CORNER: (f64, f64) = (0.130, 0.0123);

fn resources(s: &Settings) -> Result<Resources, CliError> {
    let block = match s.string("M") {
        "auto" => None,
        _ => Some(s.u32("M")?),
    };
    Ok(Resources {
        gamma: s.f64("gamma")?,
        p: s.f64("p")?,
        big_gamma: s.f64("big_gamma")?,
        probes: s.u32("L")?,
        total_time: s.f64("T")?,
        block,
    })
}

type Row = (Vec<Cell>, Option<String>);

fn optimum_row(res: &Resources, o: &Optimum) -> Row {
    let cert = o.certificate(res);
    let flag = (cert > CERTIFICATE_TOL).then(|| format!("certificate:{cert:e}"));
    (
        row![
            "optimum",
            o.regime.to_string(),
            o.scheme.to_string(),
            res.p,
            res.big_gamma / res.gamma,
            o.t_opt,
            o.n_opt,
            o.m_opt,
            o.delta_omega,
            o.table_value,
            cert
        ],
        flag,
    )
}

fn scan_row(section: &str, label: &str, p: Option<f64>, ratio: Option<f64>, value: f64) -> Row {
    (
        row![
            section,
            label,
            empty(),
            p,
            ratio,
            empty(),
            empty(),
            empty(),
            empty(),
            empty(),
            value
        ],
        None,
    )
}

pub fn run(run: &RunConfig) -> Result<Table, CliError> {
    let per_point = run.map_points(|i, s| {
        let res = resources(s)?;
        let mut rows = Vec::new();
        for regime in [Regime::Noiseless, Regime::ShortT, Regime::LongT] {
            for scheme in [Scheme::Separable, Scheme::Entangled] {
                match optimum_for_regime(&res, regime, scheme) {
                    Ok(o) => rows.push(optimum_row(&res, &o)),
                    Err(e @ (OptimizerError::RegimeMismatch { .. } | OptimizerError::BlockExceedsProbes { .. })) => {
                        log::info!("grid point {i}: {scheme} {regime} skipped: {e}");
                    }
                    Err(e) => return Err(point_error(i, e)),
                }
            }
        }
        match high_freq_optimum(res.gamma, res.big_gamma, res.p, res.total_time, res.probes) {
            Ok(o) => rows.push(optimum_row(&res, &o)),
            Err(OptimizerError::RegimeMismatch { reason, .. }) => {
                log::info!("grid point {i}: high-frequency optimum skipped: {reason}")
            }
            Err(e) => return Err(point_error(i, e)),
        }
        Ok(rows)
    })?;
    let mut table = Table::new(COLUMNS.to_vec());
    for (cells, flag) in per_point.into_iter().flatten() {
        table.push(cells, flag);
    }

    if run.settings.bool("scans")? {
        let s = &run.settings;
        let mut scans = vec![scan_row("break_even", "long-T separable", None, None, break_even_p())];
        for p in s.list::<f64>("ratio_p")? {
            let r = ramsey_ratio_long_t(p).map_err(|e| point_error(0, e))?;
            scans.push(scan_row("ratio", "long-T separable", Some(p), None, r));
        }
        let points = s.u32("contour_points")?.max(2);
        let top = s.f64("contour_max")?;
        for k in 0..points {
            let m = top * f64::from(k) / f64::from(points - 1);
            let p = contour_p_at(m).unwrap_or(f64::NAN);
            scans.push(scan_row("contour", "unit ratio", Some(p), Some(m), p));
        }
        let axis_p = contour_p_at(0.0).unwrap_or(f64::NAN);
        let axis_m = contour_m_at(1e-6).unwrap_or(f64::NAN);
        let corner_p = contour_p_at(CORNER.0).unwrap_or(f64::NAN);
        let corner_m = contour_m_at(CORNER.1).unwrap_or(f64::NAN);
        scans.push(scan_row("intercept", "axis:p", Some(axis_p), Some(0.0), axis_p));
        scans.push(scan_row("intercept", "axis:gamma_ratio", Some(1e-6), Some(axis_m), axis_m));
        scans.push(scan_row("intercept", "corner:p", Some(corner_p), Some(CORNER.0), corner_p));
        scans.push(scan_row("intercept", "corner:gamma_ratio", Some(CORNER.1), Some(corner_m), corner_m));
        for (cells, flag) in scans {
            table.push(cells, flag);
        }
    }
    Ok(table)
}
