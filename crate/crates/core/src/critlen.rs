//! Critical length of `ker L`: a rough estimate with many equal sections,
//! then bisection on the length with two equal sections.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ectest::{verdict, ECTestConfig, Verdict};
use crate::expfam::{build_family, find_roots, DEFAULT_CLUSTER_TOL};
use crate::space::PiecewiseSpace;
use crate::{CharPoly, Error, FamilyBasis, Result, RootSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CritLenConfig {
    /// `ℓ0 = ell0_factor · π / M_L`.
    pub ell0_factor: f64,
    pub tol_dicho: f64,
    pub k_max: usize,
    pub cluster_tol: f64,
    pub test: ECTestConfig,
}

/// Thresholds used by the length search. The decisive coefficient often
/// vanishes quadratically at the critical length, so a dead-band of width
/// `τ` biases the result by about `sqrt(τ)`; the search therefore decides
/// on sign, just above the rounding floor.
pub const SEARCH_TOL_ZERO: f64 = 1e-16;
pub const SEARCH_TOL_DET: f64 = 1e-16;

impl Default for CritLenConfig {
    fn default() -> Self {
        Self {
            ell0_factor: 0.95,
            tol_dicho: 1e-10,
            k_max: 64,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            test: ECTestConfig {
                tol_zero: SEARCH_TOL_ZERO,
                tol_det: SEARCH_TOL_DET,
                keep_levels: false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthStatus {
    Finite,
    Infinite,
}

/// One test run of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub h: f64,
    pub sections: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalLengthResult {
    pub status: LengthStatus,
    /// Midpoint of the final bracket; `None` when infinite.
    pub value: Option<f64>,
    /// `[h_pass, h_fail]`.
    pub bracket: Option<[f64; 2]>,
    pub mu: usize,
    pub ell0: f64,
    pub max_imag: f64,
    pub design: bool,
    pub trace: Vec<Probe>,
}

/// Largest imaginary part among the roots; 0 when all are real.
pub fn max_imag(r: &RootSet) -> f64 {
    r.max_imag()
}

fn probe(fam: &FamilyBasis, h: f64, parts: usize, cfg: &ECTestConfig) -> Result<Probe> {
    let sp = PiecewiseSpace::uniform_equal(fam, 0.0, h, parts)?;
    Ok(Probe {
        h,
        sections: parts,
        verdict: verdict(&sp, cfg),
    })
}

/// First `k ≥ 1` such that `[0, (k+1)ℓ0]` cut at multiples of `ℓ0` is not
/// certified EC. Returns `μ` and the probes run.
pub fn rough_estimate(
    fam: &FamilyBasis,
    ell0: f64,
    k_max: usize,
    cfg: &ECTestConfig,
) -> Result<(usize, Vec<Probe>)> {
    let mut trace = Vec::new();
    for k in 1..=k_max {
        let pr = probe(fam, (k + 1) as f64 * ell0, k + 1, cfg)?;
        trace.push(pr);
        if pr.verdict != Verdict::EC {
            return Ok((k, trace));
        }
    }
    Err(Error::Exhausted(k_max))
}

/// Bisection of `[μℓ0, (μ+1)ℓ0]`; every probe uses two equal sections.
/// Inconclusive probes count as failures.
pub fn dichotomy(
    fam: &FamilyBasis,
    mu: usize,
    ell0: f64,
    tol: f64,
    cfg: &ECTestConfig,
) -> Result<CriticalLengthResult> {
    if mu == 0 {
        return Err(Error::InvalidArgument("mu must be at least 1".into()));
    }
    let mut lo = mu as f64 * ell0;
    let mut hi = (mu + 1) as f64 * ell0;
    let mut trace = Vec::new();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pr = probe(fam, mid, 2, cfg)?;
        trace.push(pr);
        if pr.verdict == Verdict::EC {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalLengthResult {
        status: LengthStatus::Finite,
        value: Some(0.5 * (lo + hi)),
        bracket: Some([lo, hi]),
        mu,
        ell0,
        max_imag: 0.0,
        design: false,
        trace,
    })
}

fn infinite(design: bool) -> CriticalLengthResult {
    CriticalLengthResult {
        status: LengthStatus::Infinite,
        value: None,
        bracket: None,
        mu: 0,
        ell0: f64::INFINITY,
        max_imag: 0.0,
        design,
        trace: vec![],
    }
}

/// Critical length of the kernel with the given roots.
pub fn critical_length_roots(roots: &RootSet, cfg: &CritLenConfig) -> Result<CriticalLengthResult> {
    if !(cfg.ell0_factor > 0.0 && cfg.ell0_factor < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ell0 factor {} must lie in (0, 1)",
            cfg.ell0_factor
        )));
    }
    if !(cfg.tol_dicho > 0.0) {
        return Err(Error::InvalidArgument(
            "dichotomy tolerance must be positive".into(),
        ));
    }
    let m = max_imag(roots);
    if m == 0.0 {
        return Ok(infinite(false));
    }
    let fam = build_family(roots);
    let ell0 = cfg.ell0_factor * PI / m;
    let (mu, mut trace) = rough_estimate(&fam, ell0, cfg.k_max, &cfg.test)?;
    let mut res = dichotomy(&fam, mu, ell0, cfg.tol_dicho, &cfg.test)?;
    trace.append(&mut res.trace);
    res.trace = trace;
    res.max_imag = m;
    Ok(res)
}

pub fn critical_length(p: &CharPoly, cfg: &CritLenConfig) -> Result<CriticalLengthResult> {
    critical_length_roots(&find_roots(p, cfg.cluster_tol)?, cfg)
}

/// Critical length for design of `p̂`, i.e. the critical length of `p̂ / x`.
pub fn critical_length_for_design(
    p_hat: &CharPoly,
    cfg: &CritLenConfig,
) -> Result<CriticalLengthResult> {
    let deflated = p_hat.deflate_x().ok_or(Error::NotDesignSpace)?;
    let mut res = critical_length(&deflated, cfg)?;
    res.design = true;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Root;

    fn poly(c: &[f64]) -> CharPoly {
        CharPoly::new(c.to_vec()).unwrap()
    }

    #[test]
    fn max_imag_examples() {
        let r = RootSet::new(vec![Root::new(0.0, 2.5, 1), Root::new(0.0, 0.0, 3)]).unwrap();
        assert_eq!(max_imag(&r), 2.5);
        assert_eq!(
            max_imag(&RootSet::new(vec![Root::new(1.0, 0.0, 2)]).unwrap()),
            0.0
        );
        let r = RootSet::new(vec![Root::new(0.0, 1.0, 1), Root::new(0.0, 3.0, 1)]).unwrap();
        assert_eq!(max_imag(&r), 3.0);
    }

    #[test]
    fn rough_estimates() {
        let cfg = ECTestConfig::default();
        let ell0 = 0.95 * PI;
        let f = build_family(&find_roots(&poly(&[1.0, 0.0]), 1e-8).unwrap());
        assert_eq!(rough_estimate(&f, ell0, 64, &cfg).unwrap().0, 1);
        let f = build_family(&find_roots(&poly(&[0.0, 0.0, 1.0, 0.0]), 1e-8).unwrap());
        assert_eq!(rough_estimate(&f, ell0, 64, &cfg).unwrap().0, 2);
        let f = build_family(&find_roots(&poly(&[-1.0, 0.0]), 1e-8).unwrap());
        assert!(matches!(
            rough_estimate(&f, 1.0, 8, &cfg),
            Err(Error::Exhausted(8))
        ));
    }

    #[test]
    fn circle_is_pi() {
        let r = critical_length(&poly(&[1.0, 0.0]), &CritLenConfig::default()).unwrap();
        let v = r.value.unwrap();
        assert!((v - PI).abs() < 1e-8, "{v}");
        let [lo, hi] = r.bracket.unwrap();
        assert!(lo < hi && hi - lo <= 1e-10);
        assert!(r.mu as f64 * r.ell0 < v && v <= (r.mu + 1) as f64 * r.ell0);
    }

    #[test]
    fn real_roots_are_infinite() {
        let r = critical_length(&poly(&[-1.0, 0.0]), &CritLenConfig::default()).unwrap();
        assert_eq!(r.status, LengthStatus::Infinite);
        assert!(r.value.is_none());
    }

    #[test]
    fn boundary_at_two_pi_fails() {
        let f = build_family(&find_roots(&poly(&[0.0, 1.0, 0.0]), 1e-8).unwrap());
        let pr = probe(&f, 2.0 * PI, 2, &ECTestConfig::default()).unwrap();
        assert_ne!(pr.verdict, Verdict::EC);
        let r = critical_length(&poly(&[0.0, 1.0, 0.0]), &CritLenConfig::default()).unwrap();
        let [lo, hi] = r.bracket.unwrap();
        // rounding blurs the last few digits just below the boundary
        assert!(lo < 2.0 * PI && hi >= 2.0 * PI - 1e-6);
    }

    #[test]
    fn design_deflation() {
        let cfg = CritLenConfig::default();
        let r = critical_length_for_design(&poly(&[0.0, 1.0, 0.0]), &cfg).unwrap();
        assert!(r.design && (r.value.unwrap() - PI).abs() < 1e-8);
        let r = critical_length_for_design(&poly(&[0.0, 0.0, 0.0, 1.0, 0.0]), &cfg).unwrap();
        assert!((r.value.unwrap() - 2.0 * PI).abs() < 1e-7);
        assert!(matches!(
            critical_length_for_design(&poly(&[1.0, 0.0]), &cfg),
            Err(Error::NotDesignSpace)
        ));
    }

    #[test]
    fn scaling_by_b() {
        let cfg = CritLenConfig::default();
        let unit = critical_length(&poly(&[0.0, 0.0, 1.0, 0.0]), &cfg)
            .unwrap()
            .value
            .unwrap();
        for b in [0.5, 2.0] {
            let p = poly(&[0.0, 0.0, b * b, 0.0]);
            let v = critical_length(&p, &cfg).unwrap().value.unwrap();
            assert!((v - unit / b).abs() < 1e-8, "b = {b}: {v} vs {}", unit / b);
        }
    }
}
