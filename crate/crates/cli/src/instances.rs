//! Random small piecewise spaces for comparing the EC test with the
//! brute-force determinant scan.
//!
//! Every section is shorter than `π/b`, where `b` is the largest imaginary
//! part of a root, so each section is EC on its own; whether the whole
//! space is EC then depends only on how the sections fit together.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use eclen::{
    ec_test, oracles::brute_force_ec, ECTestConfig, PiecewiseSpace, Root, RootSet, Verdict,
};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct Instance {
    pub roots: RootSet,
    pub space: PiecewiseSpace,
}

impl Instance {
    pub fn label(&self) -> String {
        let roots: Vec<String> = self
            .roots
            .entries()
            .iter()
            .map(|r| {
                if r.im == 0.0 {
                    format!("{:.3}:{}", r.re, r.mult)
                } else {
                    format!("{:.3},{:.3}:{}", r.re, r.im, r.mult)
                }
            })
            .collect();
        let knots: Vec<String> = self
            .space
            .knots()
            .iter()
            .map(|k| format!("{k:.3}"))
            .collect();
        format!("{} | {}", roots.join(" "), knots.join(" "))
    }
}

/// Kernel of dimension `n + 1 ≤ 4` with one oscillating pair, on one to
/// four sections.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let n = rng.random_range(1..=3usize);
    let b: f64 = rng.random_range(0.5..2.0);
    let shift: f64 = rng.random_range(-0.8..0.8);
    let kind = rng.random_range(0..3u8);
    let mut roots = vec![Root::new(if kind == 1 { shift } else { 0.0 }, b, 1)];
    if n > 1 {
        roots.push(Root::new(if kind == 2 { shift } else { 0.0 }, 0.0, n - 1));
    }
    let roots = RootSet::new(roots).expect("valid roots");
    let fam = eclen::build_family(&roots);
    let sections = rng.random_range(1..=4usize);
    let mut ends = vec![0.0];
    for _ in 0..sections {
        let l: f64 = rng.random_range(0.2..0.95);
        ends.push(ends.last().unwrap() + l * PI / b);
    }
    let h = *ends.last().unwrap();
    let space =
        PiecewiseSpace::uniform(&fam, 0.0, &ends[1..ends.len() - 1], h).expect("valid knots");
    Instance { roots, space }
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub label: String,
    pub test: Verdict,
    pub brute: Verdict,
    /// Inconclusive test verdicts are not compared.
    pub agree: Option<bool>,
}

pub fn compare(inst: &Instance, cfg: &ECTestConfig, grid: usize) -> Result<Comparison, CliError> {
    let test = ec_test(&inst.space, cfg).verdict;
    let brute = brute_force_ec(&inst.space, grid)?;
    let agree = (test != Verdict::Inconclusive).then_some(test == brute);
    Ok(Comparison {
        label: inst.label(),
        test,
        brute,
        agree,
    })
}
