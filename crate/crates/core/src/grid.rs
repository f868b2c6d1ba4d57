//! Time grids, written `min:max:points[:log]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest number of grid points accepted.
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// `points` times from `min` to `max` inclusive, evenly or geometrically spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl TGrid {
    pub fn new(min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min >= 0.0 && max >= min) {
            return Err(domain(format!("need 0 <= min <= max, got {min}:{max}")));
        }
        if points == 0 || points > MAX_GRID_POINTS {
            return Err(domain(format!(
                "grid points must be in 1..={MAX_GRID_POINTS}"
            )));
        }
        if points > 1 && max == min {
            return Err(domain("a grid with several points needs max > min"));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(domain("a log grid needs min > 0"));
        }
        Ok(Self {
            min,
            max,
            points,
            spacing,
        })
    }

    /// A geometric grid with the given density of points per factor of ten.
    pub fn per_decade(min: f64, max: f64, per_decade: usize) -> Result<Self> {
        if !(min > 0.0 && max > min) {
            return Err(domain("a log grid needs 0 < min < max"));
        }
        let points = ((max / min).log10() * per_decade as f64).ceil() as usize + 1;
        Self::new(min, max, points, Spacing::Log)
    }

    pub fn times(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let steps = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    return self.max;
                }
                let frac = i as f64 / steps;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * frac,
                    Spacing::Log => self.min * (self.max / self.min).powf(frac),
                }
            })
            .collect()
    }
}

impl fmt::Display for TGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.points)?;
        if self.spacing == Spacing::Log {
            f.write_str(":log")?;
        }
        Ok(())
    }
}

impl FromStr for TGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.trim().split(':').collect();
        let spacing = match fields.as_slice() {
            [_, _, _] => Spacing::Linear,
            [_, _, _, "log"] => Spacing::Log,
            [_, _, _, "lin"] => Spacing::Linear,
            _ => {
                return Err(Error::Parse(format!(
                    "expected min:max:points[:log], got {s:?}"
                )))
            }
        };
        let number = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {v:?} in grid {s:?}")))
        };
        let points = fields[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad point count in grid {s:?}")))?;
        TGrid::new(number(fields[0])?, number(fields[1])?, points, spacing)
            .map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grid() {
        let g: TGrid = "0:40:81".parse().unwrap();
        let t = g.times();
        assert_eq!(t.len(), 81);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[80], 40.0);
        assert!((t[1] - 0.5).abs() < 1e-12);
        assert_eq!(g.to_string().parse::<TGrid>().unwrap(), g);
    }

    #[test]
    fn log_grid() {
        let g: TGrid = "1:100:3:log".parse().unwrap();
        let t = g.times();
        assert!((t[1] - 10.0).abs() < 1e-9);
        assert_eq!(t[2], 100.0);
        assert_eq!(TGrid::per_decade(1.0, 10.0, 40).unwrap().points, 41);
    }

    #[test]
    fn rejects_bad_grids() {
        for bad in [
            "",
            "1:2",
            "0:1:5:log",
            "2:1:5",
            "0:1:0",
            "a:1:2",
            "0:1:2:cubic",
            "0:inf:3",
            "NaN:1:2",
            "0:0:3",
        ] {
            assert!(bad.parse::<TGrid>().is_err(), "{bad}");
        }
        assert_eq!("3:3:1".parse::<TGrid>().unwrap().times(), vec![3.0]);
    }
}
