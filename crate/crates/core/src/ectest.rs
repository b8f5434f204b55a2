//! The EC test: Step 0 determinants, positivity of level-0 expansions, then
//! the dimension-diminishing recursion on the expansion coefficients.

use serde::{Deserialize, Serialize};

use crate::bernlike::{
    engine_locals, global_bernstein_like_with, level0_expansions, BernsteinLikeBasis, GammaTensor,
};
use crate::space::PiecewiseSpace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    EC,
    NotEC,
    Inconclusive,
}

/// Where a test stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage")]
pub enum Failure {
    /// A Step 0 determinant vanished.
    Step0 {
        i: usize,
        j: usize,
        ratio: f64,
    },
    /// A non-pattern coefficient is not positive (or sits in the dead-band).
    Level {
        level: usize,
        i: usize,
        k: usize,
        r: usize,
        value: f64,
    },
    LocalBasis {
        section: usize,
        reason: String,
    },
    Numerical {
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ECTestConfig {
    /// Row-scaled zero/positive threshold.
    pub tol_zero: f64,
    /// Row-normalised determinant threshold for Step 0.
    pub tol_det: f64,
    pub keep_levels: bool,
}

impl Default for ECTestConfig {
    fn default() -> Self {
        Self {
            tol_zero: 1e-9,
            tol_det: 1e-12,
            keep_levels: false,
        }
    }
}

/// Outcome of [`positivity_verdict`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Positivity {
    Pass,
    Fail {
        i: usize,
        k: usize,
        r: usize,
        value: f64,
    },
    Deadband {
        i: usize,
        k: usize,
        r: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ECTestReport {
    pub verdict: Verdict,
    pub failure: Option<Failure>,
    /// Smallest scaled non-pattern coefficient per tested level.
    pub margins: Vec<f64>,
    pub step0_ratios: Vec<f64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<GammaTensor>>,
    /// Global level-0 basis (jets at `a`) scaled so that every row of the
    /// level-0 tensor has maximum 1.
    #[serde(skip)]
    pub basis: Option<BernsteinLikeBasis>,
}

impl ECTestReport {
    fn stop(verdict: Verdict, failure: Failure, step0: Vec<f64>, warnings: Vec<String>) -> Self {
        Self {
            verdict,
            failure: Some(failure),
            margins: vec![],
            step0_ratios: step0,
            warnings,
            levels: None,
            basis: None,
        }
    }

    pub fn space(&self) -> Option<&PiecewiseSpace> {
        self.basis.as_ref().and_then(|b| b.space())
    }
}

/// One level of the recursion: with `c_{i,r} = Σ_{l≥i} γ_{l,k,r} / Σ_l γ_{l,k,r}`,
/// the next level is `γ'_{i,k,r} = c_{i+1,r+1} - c_{i+1,r}`.
pub fn gamma_step(g: &GammaTensor) -> Result<GammaTensor> {
    let m = g.size;
    if m < 2 {
        return Err(Error::InvalidArgument(
            "tensor of size 1 has no next level".into(),
        ));
    }
    let mut out = GammaTensor::zeros(g.level + 1, m - 1, g.sections);
    let mut tail = vec![vec![0.0; m]; m + 1];
    for k in 0..g.sections {
        for r in 0..m {
            let total: f64 = (0..m).map(|l| g.get(l, k, r)).sum();
            let scale = (0..m).map(|l| g.get(l, k, r).abs()).fold(0.0, f64::max);
            if !(total.abs() > 1e-300 && total.abs() > 1e-14 * scale) {
                return Err(Error::ZeroDenominator {
                    level: g.level,
                    k,
                    r,
                });
            }
            for i in 0..m {
                let s: f64 = (i..m).map(|l| g.get(l, k, r)).sum();
                tail[i][r] = s / total;
            }
        }
        for i in 0..m - 1 {
            for r in 0..m - 1 {
                out.set(i, k, r, tail[i + 1][r + 1] - tail[i + 1][r]);
            }
        }
    }
    out.clear_pattern();
    Ok(out)
}

/// Positivity decision with the dead-band `[τ/10, 10τ]` on row-scaled
/// values. Pattern entries are exempt. Fails are reported before
/// dead-band hits, each lexicographically first in `(i, k, r)`.
pub fn positivity_verdict(g: &GammaTensor, tol: f64) -> Positivity {
    let mut dead = None;
    for i in 0..g.size {
        for k in 0..g.sections {
            let scale = g.row_scale(i, k);
            for r in 0..g.size {
                if g.is_pattern(i, k, r) {
                    continue;
                }
                let v = g.get(i, k, r);
                let m = if scale > 0.0 { v / scale } else { 0.0 };
                if m < tol / 10.0 {
                    return Positivity::Fail { i, k, r, value: v };
                }
                if m <= tol * 10.0 && dead.is_none() {
                    dead = Some(Positivity::Deadband { i, k, r, value: v });
                }
            }
        }
    }
    dead.unwrap_or(Positivity::Pass)
}

/// Smallest row-scaled non-pattern entry.
pub fn margin(g: &GammaTensor) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..g.size {
        for k in 0..g.sections {
            let scale = g.row_scale(i, k);
            for r in 0..g.size {
                if !g.is_pattern(i, k, r) {
                    let m = if scale > 0.0 {
                        g.get(i, k, r) / scale
                    } else {
                        0.0
                    };
                    best = best.min(m);
                }
            }
        }
    }
    best
}

/// Run the full test on `sp`. Each section is assumed EC on its own
/// interval; a failing local basis is reported as inconclusive.
pub fn ec_test(sp: &PiecewiseSpace, cfg: &ECTestConfig) -> ECTestReport {
    let warnings = sp.warnings().to_vec();
    let step0 = crate::bernlike::step0_ratios(sp);
    let mut global = match global_bernstein_like_with(sp, cfg.tol_det) {
        Ok(g) => g,
        Err(Error::NoBasisEvidence { i, j, ratio }) => {
            return ECTestReport::stop(
                Verdict::NotEC,
                Failure::Step0 { i, j, ratio },
                step0,
                warnings,
            )
        }
        Err(e) => {
            return ECTestReport::stop(
                Verdict::Inconclusive,
                Failure::Numerical {
                    reason: e.to_string(),
                },
                step0,
                warnings,
            )
        }
    };
    let locals = match engine_locals(sp) {
        Ok(l) => l,
        Err(e) => {
            let section = local_failure_section(sp);
            return ECTestReport::stop(
                Verdict::Inconclusive,
                Failure::LocalBasis {
                    section,
                    reason: e.to_string(),
                },
                step0,
                warnings,
            );
        }
    };
    let mut g = match level0_expansions(&global, &locals) {
        Ok(g) => g,
        Err(e) => {
            return ECTestReport::stop(
                Verdict::Inconclusive,
                Failure::Numerical {
                    reason: e.to_string(),
                },
                step0,
                warnings,
            )
        }
    };
    // rescale each global column so that its largest coefficient is 1
    for i in 0..g.size {
        let s = (0..g.sections)
            .map(|k| g.row_scale(i, k))
            .fold(0.0, f64::max);
        if s > 0.0 {
            for k in 0..g.sections {
                for r in 0..g.size {
                    let v = g.get(i, k, r) / s;
                    g.set(i, k, r, v);
                }
            }
            global.columns[i] /= s;
        }
    }
    let mut warnings = warnings;
    let resid = g.pattern_residual();
    if resid > cfg.tol_zero {
        warnings.push(format!("level-0 pattern residual {resid:.3e}"));
    }
    g.clear_pattern();

    let n = sp.n();
    let mut report = ECTestReport {
        verdict: Verdict::EC,
        failure: None,
        margins: Vec::with_capacity(n),
        step0_ratios: step0,
        warnings,
        levels: None,
        basis: None,
    };
    let mut levels = Vec::new();
    for p in 0..n {
        report.margins.push(margin(&g));
        match positivity_verdict(&g, cfg.tol_zero) {
            Positivity::Pass => {}
            Positivity::Fail { i, k, r, value } => {
                report.verdict = Verdict::NotEC;
                report.failure = Some(Failure::Level {
                    level: p,
                    i,
                    k,
                    r,
                    value,
                });
            }
            Positivity::Deadband { i, k, r, value } => {
                report.verdict = Verdict::Inconclusive;
                report.failure = Some(Failure::Level {
                    level: p,
                    i,
                    k,
                    r,
                    value,
                });
            }
        }
        if report.failure.is_some() {
            break;
        }
        let next = if p + 1 < n {
            Some(gamma_step(&g))
        } else {
            None
        };
        levels.push(std::mem::replace(&mut g, GammaTensor::zeros(0, 0, 0)));
        match next {
            Some(Ok(t)) => g = t,
            Some(Err(e)) => {
                report.verdict = Verdict::Inconclusive;
                report.failure = Some(Failure::Numerical {
                    reason: e.to_string(),
                });
                break;
            }
            None => {}
        }
    }
    if report.failure.is_some() && g.size > 0 {
        levels.push(g);
    }
    if cfg.keep_levels {
        report.levels = Some(levels);
    }
    report.basis = Some(global);
    report
}

fn local_failure_section(sp: &PiecewiseSpace) -> usize {
    sp.sections()
        .iter()
        .position(|s| {
            crate::bernlike::local_bernstein_like_with(
                &s.fam,
                s.start,
                s.end,
                crate::bernlike::Normalization::Midpoint,
            )
            .is_err()
        })
        .unwrap_or(0)
}

/// Verdict only, for callers that do not need the report.
pub fn verdict(sp: &PiecewiseSpace, cfg: &ECTestConfig) -> Verdict {
    ec_test(
        sp,
        &ECTestConfig {
            keep_levels: false,
            ..*cfg
        },
    )
    .verdict
}
