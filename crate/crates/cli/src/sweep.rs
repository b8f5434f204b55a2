//! One-parameter operator families and critical-length sweeps over them.

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use eclen::{critical_length_roots, CritLenConfig, LengthStatus, Root, RootSet};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Family {
    /// `(x² − 1)(x² + b²)`
    HypTrig,
    /// `(x² + 1)(x² + b²)`
    DoubleTrig,
    /// roots `±1 ± i·b`
    Damped,
    /// `x^{n−1}(x² + 1)`, parameter `n` rounded to an integer
    Cycloidal,
    /// `x^{n−1}(x² + b²)` for fixed `n = 4`: the scaling law
    Scaled,
}

impl Family {
    pub fn roots(self, p: f64) -> Result<RootSet, CliError> {
        let pos = |v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Data(format!("parameter {v} must be positive")))
            }
        };
        let r = match self {
            Family::HypTrig => vec![
                Root::new(-1.0, 0.0, 1),
                Root::new(1.0, 0.0, 1),
                Root::new(0.0, pos(p)?, 1),
            ],
            Family::DoubleTrig => {
                let b = pos(p)?;
                if b == 1.0 {
                    vec![Root::new(0.0, 1.0, 2)]
                } else {
                    vec![Root::new(0.0, 1.0, 1), Root::new(0.0, b, 1)]
                }
            }
            Family::Damped => vec![Root::new(-1.0, pos(p)?, 1), Root::new(1.0, pos(p)?, 1)],
            Family::Cycloidal => {
                let n = p.round();
                if !(1.0..=40.0).contains(&n) {
                    return Err(CliError::Data(format!("cycloidal order {p} outside 1..40")));
                }
                let mut r = vec![Root::new(0.0, 1.0, 1)];
                if n > 1.0 {
                    r.push(Root::new(0.0, 0.0, n as usize - 1));
                }
                r
            }
            Family::Scaled => vec![Root::new(0.0, pos(p)?, 1), Root::new(0.0, 0.0, 3)],
        };
        Ok(RootSet::new(r)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub param: f64,
    /// `inf` for kernels with real roots only; `NaN` when the search failed.
    pub value: f64,
    pub mu: usize,
    pub ell0: f64,
}

pub fn params(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![from];
    }
    (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Rows in parameter order whatever the worker count.
pub fn sweep(
    fam: Family,
    ps: &[f64],
    cfg: &CritLenConfig,
    design: bool,
) -> Result<Vec<SweepRow>, CliError> {
    ps.par_iter()
        .map(|&p| {
            let mut roots = fam.roots(p)?;
            if design {
                roots = deflate(&roots)?;
            }
            Ok(match critical_length_roots(&roots, cfg) {
                Ok(r) => SweepRow {
                    param: p,
                    value: match r.status {
                        LengthStatus::Infinite => f64::INFINITY,
                        LengthStatus::Finite => r.value.unwrap_or(f64::NAN),
                    },
                    mu: r.mu,
                    ell0: r.ell0,
                },
                Err(_) => SweepRow {
                    param: p,
                    value: f64::NAN,
                    mu: 0,
                    ell0: f64::NAN,
                },
            })
        })
        .collect()
}

/// Roots of `p(x)/x`; the kernel must contain constants.
pub fn deflate(roots: &RootSet) -> Result<RootSet, CliError> {
    let mut found = false;
    let mut out = Vec::new();
    for r in roots.entries() {
        if r.re == 0.0 && r.im == 0.0 {
            found = true;
            if r.mult > 1 {
                out.push(Root::new(0.0, 0.0, r.mult - 1));
            }
        } else {
            out.push(*r);
        }
    }
    if !found {
        return Err(eclen::Error::NotDesignSpace.into());
    }
    Ok(RootSet::new(out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_degrees() {
        assert_eq!(Family::HypTrig.roots(2.0).unwrap().degree(), 4);
        assert_eq!(Family::DoubleTrig.roots(1.0).unwrap().degree(), 4);
        assert_eq!(Family::Cycloidal.roots(3.0).unwrap().degree(), 4);
        assert!(Family::Damped.roots(-1.0).is_err());
    }

    #[test]
    fn scaling_sweep_is_ordered() {
        let ps = params(0.5, 2.0, 4);
        let rows = sweep(Family::Scaled, &ps, &CritLenConfig::default(), false).unwrap();
        for (r, p) in rows.iter().zip(&ps) {
            assert_eq!(r.param, *p);
        }
        for w in rows.windows(2) {
            assert!(w[1].value < w[0].value);
        }
        assert!((rows[0].value * 0.5 - rows[3].value * 2.0).abs() < 1e-7);
    }
}
