//! Sweep axes `name:min:max:points:log|lin` and their Cartesian grid.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep axis {0:?} must look like name:min:max:points:log|lin")]
    Shape(String),
    #[error("sweep axis bound {0:?} is not a finite number")]
    Bound(String),
    #[error("sweep axis needs an integer point count in 2..={MAX_POINTS} (got {0:?})")]
    Points(String),
    #[error("sweep scale must be `log` or `lin` (got {0:?})")]
    Scale(String),
    #[error("lin sweep span {min}..{max} overflows")]
    Span { min: f64, max: f64 },
    #[error("log sweep needs 0 < min and 0 < max (got {min}, {max})")]
    LogBounds { min: f64, max: f64 },
    #[error("cannot sweep `{name}`; sweepable keys: {valid}")]
    UnknownName { name: String, valid: String },
}

/// Largest point count of one axis.
pub const MAX_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Lin,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl FromStr for SweepAxis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let [name, min, max, points, scale] = parts[..] else {
            return Err(SweepError::Shape(s.to_string()));
        };
        if name.is_empty() {
            return Err(SweepError::Shape(s.to_string()));
        }
        let bound = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| SweepError::Bound(v.to_string()))
        };
        let (min, max) = (bound(min)?, bound(max)?);
        let points = points
            .parse::<usize>()
            .ok()
            .filter(|n| (2..=MAX_POINTS).contains(n))
            .ok_or_else(|| SweepError::Points(points.to_string()))?;
        let scale = match scale {
            "lin" => Scale::Lin,
            "log" => Scale::Log,
            other => return Err(SweepError::Scale(other.to_string())),
        };
        if scale == Scale::Log && !(min > 0.0 && max > 0.0) {
            return Err(SweepError::LogBounds { min, max });
        }
        if scale == Scale::Lin && !(max - min).is_finite() {
            return Err(SweepError::Span { min, max });
        }
        Ok(Self {
            name: name.to_string(),
            min,
            max,
            points,
            scale,
        })
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = match self.scale {
            Scale::Lin => "lin",
            Scale::Log => "log",
        };
        write!(f, "{}:{:e}:{:e}:{}:{scale}", self.name, self.min, self.max, self.points)
    }
}

impl SweepAxis {
    /// Grid values; both end points are exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.points {
                    return self.max;
                }
                let u = i as f64 / last;
                match self.scale {
                    Scale::Lin => self.min + u * (self.max - self.min),
                    Scale::Log => (self.min.ln() + u * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Cartesian product, first axis slowest. No axes gives one empty point.
pub fn grid(axes: &[SweepAxis]) -> Vec<Vec<(String, f64)>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        let values = axis.values();
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push((axis.name.clone(), v));
                    p
                })
            })
            .collect()
    })
}
