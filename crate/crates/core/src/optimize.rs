//! One-dimensional maximisation of unimodal objectives.
//!
//! A coarse grid locates the cell holding the maximum, then golden-section
//! search shrinks that bracket below the tolerance. The exact variant
//! evaluates the objective on the binary value of each probe point as a
//! rational, so comparisons never suffer float cancellation near a flat
//! optimum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rat;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const GRID_CELLS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("objective returned {value} at {x}")]
    NonFiniteEvaluation { x: f64, value: f64 },
    #[error("invalid search interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

/// A real number known to lie within `error_bound` of `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error_bound: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            error_bound: 0.0,
        }
    }

    /// A closed form evaluated in double precision with a handful of
    /// correctly rounded operations.
    pub fn closed_form(value: f64) -> Self {
        Estimate {
            value,
            error_bound: 16.0 * f64::EPSILON * value.abs().max(f64::MIN_POSITIVE),
        }
    }

    pub fn within(&self, x: f64, tol: f64) -> bool {
        (self.value - x).abs() <= tol + self.error_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    /// Final bracket; for a unimodal objective it contains the maximiser.
    pub bracket: (f64, f64),
    /// All grid evaluations were equal.
    pub flat: bool,
    pub evaluations: usize,
}

impl Maximum {
    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.argmax,
            error_bound: (self.argmax - self.bracket.0).max(self.bracket.1 - self.argmax),
        }
    }
}

fn search<T: PartialOrd + PartialEq>(
    mut eval: impl FnMut(f64) -> Result<T, OptimizeError>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(Maximum, T), OptimizeError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(OptimizeError::InvalidInterval { lo, hi });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(OptimizeError::InvalidTolerance(tol));
    }
    let mut evaluations = 0usize;
    let mut f = |x: f64| {
        evaluations += 1;
        eval(x)
    };

    let step = (hi - lo) / GRID_CELLS as f64;
    let grid: Vec<f64> = (0..=GRID_CELLS)
        .map(|k| {
            if k == GRID_CELLS {
                hi
            } else {
                lo + step * k as f64
            }
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        values.push(f(x)?);
    }
    let mut best = 0;
    for k in 1..values.len() {
        if values[k] > values[best] {
            best = k;
        }
    }
    let flat = values.iter().all(|v| *v == values[0]);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID_CELLS)];

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        if c >= d {
            // Bracket below float resolution.
            break;
        }
    }
    let mut argmax = 0.5 * (a + b);
    let mut value = f(argmax)?;
    // A maximum on the boundary is reported at the boundary itself.
    for (end, fend) in [(lo, &values[0]), (hi, &values[GRID_CELLS])] {
        if (end == a || end == b) && *fend >= value {
            let v = f(end)?;
            argmax = end;
            value = v;
        }
    }
    Ok((
        Maximum {
            argmax,
            value: f64::NAN,
            bracket: (a, b),
            flat,
            evaluations,
        },
        value,
    ))
}

/// Maximises a unimodal `f` on `[lo, hi]`; the returned argmax is within
/// `tol` of the true maximiser.
pub fn maximize_concave(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Maximum, OptimizeError> {
    let (mut m, value) = search(
        |x| {
            let y = f(x);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(OptimizeError::NonFiniteEvaluation { x, value: y })
            }
        },
        lo,
        hi,
        tol,
    )?;
    m.value = value;
    Ok(m)
}

/// Same search, but `f` is evaluated exactly at each probe point.
pub fn maximize_concave_exact(
    mut f: impl FnMut(&Rat) -> Rat,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Maximum, OptimizeError> {
    let (mut m, value) = search(
        |x| {
            let r = Rat::from_f64(x)
                .map_err(|_| OptimizeError::NonFiniteEvaluation { x, value: f64::NAN })?;
            Ok(f(&r))
        },
        lo,
        hi,
        tol,
    )?;
    m.value = value.to_f64();
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let m = maximize_concave(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10).unwrap();
        assert!((m.argmax - 0.3).abs() < 1e-9);
        assert!(!m.flat);
        assert!(m.bracket.0 <= 0.3 && 0.3 <= m.bracket.1);
    }

    #[test]
    fn boundary_maxima() {
        let m = maximize_concave(|x| -x, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(m.argmax, 0.0);
        assert!(m.estimate().error_bound <= 1e-12);
        let m = maximize_concave(|x| x, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(m.argmax, 1.0);
    }

    #[test]
    fn flat_objective_is_flagged() {
        let m = maximize_concave(|_| 1.0, 0.0, 1.0, 1e-9).unwrap();
        assert!(m.flat);
        assert!((0.0..=1.0).contains(&m.argmax));
    }

    #[test]
    fn non_finite_is_an_error() {
        let err =
            maximize_concave(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, 1e-6).unwrap_err();
        assert!(matches!(err, OptimizeError::NonFiniteEvaluation { .. }));
        assert!(maximize_concave(|x| x, 1.0, 0.0, 1e-6).is_err());
        assert!(maximize_concave(|x| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exact_search_resolves_flat_peaks() {
        // eps - eps^2 peaks at 1/2; its float evaluation is flat within
        // ~1e-8 of the peak, the exact one is not.
        let m = maximize_concave_exact(|e| e - e.pow(2), 0.0, 1.0, 1e-13).unwrap();
        assert!((m.argmax - 0.5).abs() < 1e-12);
    }
}
