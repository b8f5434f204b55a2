//! Design-side objects built from a Bernstein-like basis: the normalised
//! (Bernstein) basis, transition functions, the derived basis, the weight
//! functions implied by a successful test, and an integral-recurrence check.
//!
//! The weights come from the tower `w_p = Σ_i V^p_i`, `B^p_l = V^p_l / w_p`,
//! `V^{p+1}_i = D(Σ_{l>i} B^p_l)`, all carried as Taylor jets so that no
//! derivative is ever taken numerically.

use nalgebra::DVector;

use crate::bernlike::{local_bernstein_like, BasisCoords, BernsteinLikeBasis};
use crate::ectest::{ECTestReport, Verdict};
use crate::jet::Jet;
use crate::space::PiecewiseSpace;
use crate::{Error, FamilyBasis, Result};

/// Threshold under which an expansion coefficient of unity counts as zero,
/// relative to the largest one.
pub const TOL_ZERO: f64 = 1e-9;
/// Sup-norm deviation from 1 tolerated when checking that constants belong
/// to the space.
const CONSTANT_TOL: f64 = 1e-9;
const CHECK_POINTS: usize = 33;

/// `B_i = α_i V_i`, summing to one.
#[derive(Debug, Clone)]
pub struct NormalizedBasis {
    pub alphas: Vec<f64>,
    pub base: BernsteinLikeBasis,
}

impl NormalizedBasis {
    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn a(&self) -> f64 {
        self.base.c
    }

    pub fn b(&self) -> f64 {
        self.base.d
    }

    /// Coordinates of `B_i`.
    pub fn column(&self, i: usize) -> DVector<f64> {
        &self.base.columns[i] * self.alphas[i]
    }

    pub fn coords(&self) -> &BasisCoords {
        &self.base.coords
    }

    /// Derivatives `0..=max_order` of `B_i` at `x`.
    pub fn derivatives(&self, i: usize, x: f64, max_order: usize) -> Result<Vec<f64>> {
        let d = self.base.derivatives(i, x, max_order)?;
        Ok(d.into_iter().map(|v| v * self.alphas[i]).collect())
    }

    /// `(B_0(x), ..., B_n(x))`.
    pub fn values(&self, x: f64) -> Result<Vec<f64>> {
        (0..self.dim())
            .map(|i| Ok(self.base.value(i, x)? * self.alphas[i]))
            .collect()
    }
}

fn sample_points(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    let h = (b - a) / (count - 1) as f64;
    (0..count).map(move |s| if s + 1 == count { b } else { a + h * s as f64 })
}

/// Coefficients of the constant function 1 in `blb`.
pub fn expand_unity(blb: &BernsteinLikeBasis) -> Result<Vec<f64>> {
    let jets = blb.jets_at_start();
    let mut e0 = DVector::<f64>::zeros(jets.nrows());
    e0[0] = 1.0;
    let alphas = jets.lu().solve(&e0).ok_or(Error::SingularExpansion(0))?;
    let mut dev: f64 = 0.0;
    for x in sample_points(blb.c, blb.d, CHECK_POINTS) {
        let mut s = 0.0;
        for (i, al) in alphas.iter().enumerate() {
            s += al * blb.value(i, x)?;
        }
        dev = dev.max((s - 1.0).abs());
    }
    if !(dev <= CONSTANT_TOL) {
        return Err(Error::ConstantsAbsent(dev));
    }
    let top = alphas.amax();
    for (index, &value) in alphas.iter().enumerate() {
        if !(value > TOL_ZERO * top) {
            return Err(Error::NotGoodForDesign { index, value });
        }
    }
    Ok(alphas.iter().copied().collect())
}

fn normalize(base: BernsteinLikeBasis) -> Result<NormalizedBasis> {
    let alphas = expand_unity(&base)?;
    let nb = NormalizedBasis { alphas, base };
    let (a, b) = (nb.a(), nb.b());
    let h = (b - a) / 129.0;
    for s in 1..=128 {
        let x = a + h * s as f64;
        for (index, v) in nb.values(x)?.into_iter().enumerate() {
            if v < 0.0 {
                return Err(Error::NotPositive { index, x });
            }
        }
    }
    Ok(nb)
}

/// Bernstein basis of `ker L` on `[a, b]`.
pub fn bernstein_basis(fam: &FamilyBasis, a: f64, b: f64) -> Result<NormalizedBasis> {
    normalize(local_bernstein_like(fam, a, b)?)
}

/// Bernstein basis of a piecewise space relative to its ends.
pub fn bernstein_basis_piecewise(sp: &PiecewiseSpace) -> Result<NormalizedBasis> {
    normalize(crate::bernlike::global_bernstein_like(sp)?)
}

/// Coordinates of `B*_i = Σ_{k≥i} B_k`, `i = 0..=n`.
pub fn transition_functions(nb: &NormalizedBasis) -> Vec<DVector<f64>> {
    let dim = nb.dim();
    let mut out = vec![DVector::<f64>::zeros(nb.base.columns[0].len()); dim];
    let mut acc = DVector::<f64>::zeros(nb.base.columns[0].len());
    for i in (0..dim).rev() {
        acc += nb.column(i);
        out[i] = acc.clone();
    }
    out
}

/// `V̄_i = D B*_{i+1}`, `i = 0..n`: a Bernstein-like basis of the derived
/// space, written as antiderivatives in the parent coordinates.
pub fn derived_basis(nb: &NormalizedBasis) -> BernsteinLikeBasis {
    let columns = transition_functions(nb).into_iter().skip(1).collect();
    BernsteinLikeBasis {
        c: nb.a(),
        d: nb.b(),
        coords: BasisCoords::Derived(Box::new(nb.base.coords.clone())),
        columns,
    }
}

/// Points of `Σ B_i(x) P_i` at `samples` equally spaced parameters,
/// endpoints included.
pub fn eval_curve(
    nb: &NormalizedBasis,
    control: &[Vec<f64>],
    samples: usize,
) -> Result<Vec<Vec<f64>>> {
    if control.len() != nb.dim() {
        return Err(Error::DimensionMismatch(control.len(), nb.dim()));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "a curve needs at least two samples".into(),
        ));
    }
    let d = control[0].len();
    if let Some(p) = control.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch(d, p.len()));
    }
    sample_points(nb.a(), nb.b(), samples)
        .map(|x| {
            let bx = nb.values(x)?;
            let mut pt = vec![0.0; d];
            for (bi, p) in bx.iter().zip(control) {
                for (q, pc) in pt.iter_mut().zip(p) {
                    *q += bi * pc;
                }
            }
            Ok(pt)
        })
        .collect()
}

/// Level bases and weights at one point: `v[p][i] = V^p_i(x)` and
/// `w[p] = Σ_i V^p_i(x)`, before normalisation.
#[derive(Debug, Clone)]
pub struct Tower {
    pub v: Vec<Vec<f64>>,
    pub w: Vec<f64>,
}

impl Tower {
    /// `B^p_l(x)`.
    pub fn bernstein(&self, p: usize) -> Vec<f64> {
        self.v[p].iter().map(|v| v / self.w[p]).collect()
    }
}

/// Weight functions `w_0, ..., w_n` generated by an EC test, each rescaled
/// so that `w_p(a) = 1`.
#[derive(Debug, Clone)]
pub struct WeightSystem {
    basis: BernsteinLikeBasis,
    scale: Vec<f64>,
}

impl WeightSystem {
    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn a(&self) -> f64 {
        self.basis.c
    }

    pub fn b(&self) -> f64 {
        self.basis.d
    }

    /// Unnormalised tower at `x`.
    pub fn tower(&self, x: f64) -> Result<Tower> {
        let n = self.n();
        let mut level: Vec<Jet> = (0..=n)
            .map(|i| Ok(Jet::from_derivatives(&self.basis.derivatives(i, x, n)?)))
            .collect::<Result<_>>()?;
        let mut v = Vec::with_capacity(n + 1);
        let mut w = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let order = n - p;
            let mut sum = Jet::zero(order);
            for j in &level {
                sum.add_assign(j);
            }
            v.push(level.iter().map(Jet::value).collect());
            w.push(sum.value());
            if p == n {
                break;
            }
            if !(sum.value() > 0.0) {
                return Err(Error::NotPositive { index: p, x });
            }
            let b: Vec<Jet> = level.iter().map(|j| j.div(&sum)).collect();
            let mut next = Vec::with_capacity(order);
            let mut tail = Jet::zero(order);
            for l in (1..=order).rev() {
                tail.add_assign(&b[l]);
                next.push(tail.derivative());
            }
            next.reverse();
            level = next;
        }
        Ok(Tower { v, w })
    }

    /// `(w_0(x), ..., w_n(x))` with `w_p(a) = 1`.
    pub fn weights(&self, x: f64) -> Result<Vec<f64>> {
        let t = self.tower(x)?;
        Ok(t.w.iter().zip(&self.scale).map(|(w, s)| w / s).collect())
    }
}

/// Weights implied by a successful test whose levels were kept.
pub fn weight_system(report: &ECTestReport) -> Result<WeightSystem> {
    if report.verdict != Verdict::EC {
        return Err(Error::NotEC);
    }
    let basis = match (&report.levels, &report.basis) {
        (Some(_), Some(b)) => b.clone(),
        _ => return Err(Error::LevelsMissing),
    };
    let mut ws = WeightSystem {
        basis,
        scale: vec![],
    };
    ws.scale = ws.tower(ws.a())?.w;
    if let Some(p) = ws.scale.iter().position(|w| !(*w > 0.0)) {
        return Err(Error::NotPositive {
            index: p,
            x: ws.a(),
        });
    }
    Ok(ws)
}

const QUAD_TOL: f64 = 1e-9;
const QUAD_DEPTH: usize = 40;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate of a vector integral and the largest
/// component difference from the embedded 7-point Gauss rule.
fn kronrod15<F>(f: &F, lo: f64, hi: f64) -> Result<(Vec<f64>, f64)>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let fc = f(c)?;
    let mut k: Vec<f64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut g: Vec<f64> = fc.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let f1 = f(c - r * XGK[j])?;
        let f2 = f(c + r * XGK[j])?;
        for m in 0..k.len() {
            let s = f1[m] + f2[m];
            k[m] += WGK[j] * s;
            if j % 2 == 1 {
                g[m] += WG[j / 2] * s;
            }
        }
    }
    let mut err: f64 = 0.0;
    for m in 0..k.len() {
        k[m] *= r;
        err = err.max((k[m] - g[m] * r).abs());
    }
    Ok((k, err))
}

fn adaptive<F>(f: &F, lo: f64, hi: f64, tol: f64, depth: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let (k, err) = kronrod15(f, lo, hi)?;
    if err <= tol {
        return Ok(k);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure(lo, hi));
    }
    let mid = 0.5 * (lo + hi);
    let mut left = adaptive(f, lo, mid, 0.5 * tol, depth - 1)?;
    let right = adaptive(f, mid, hi, 0.5 * tol, depth - 1)?;
    for (l, r) in left.iter_mut().zip(right) {
        *l += r;
    }
    Ok(left)
}

/// Rebuilds every level `p < n` Bernstein basis from the next level with
///
/// `B^p_l(x) = I_{l-1}(x) - I_l(x)`, `I_i(x) = ∫_a^x V^{p+1}_i / ∫_a^b V^{p+1}_i`,
///
/// (`I_{-1} = 1`, `I_{n-p} = 0`) and returns the largest deviation from the
/// directly computed basis over `quad_points` equally spaced points.
pub fn irr_check(ws: &WeightSystem, report: &ECTestReport, quad_points: usize) -> Result<f64> {
    if report.verdict != Verdict::EC {
        return Err(Error::NotEC);
    }
    if report.levels.is_none() {
        return Err(Error::LevelsMissing);
    }
    if quad_points < 2 {
        return Err(Error::InvalidArgument(
            "need at least two comparison points".into(),
        ));
    }
    let n = ws.n();
    let (a, b) = (ws.a(), ws.b());
    let integrand = |t: f64| -> Result<Vec<f64>> {
        let tw = ws.tower(t)?;
        Ok(tw.v[1..].iter().flatten().copied().collect())
    };
    let mut cuts: Vec<f64> = sample_points(a, b, quad_points).collect();
    if let Some(sp) = ws.basis.space() {
        cuts.extend(sp.knots().into_iter().filter(|k| *k > a && *k < b));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let width = n * (n + 1) / 2;
    let mut running = vec![0.0; width];
    let mut cumulative = vec![(a, running.clone())];
    for w in cuts.windows(2) {
        let part = adaptive(
            &integrand,
            w[0],
            w[1],
            QUAD_TOL * (w[1] - w[0]) / (b - a),
            QUAD_DEPTH,
        )?;
        for (r, p) in running.iter_mut().zip(part) {
            *r += p;
        }
        cumulative.push((w[1], running.clone()));
    }
    let total = running;
    let offset = |p: usize| (1..p).map(|q| n + 1 - q).sum::<usize>();
    let mut worst: f64 = 0.0;
    for (x, integ) in cumulative {
        if !sample_points(a, b, quad_points).any(|s| s == x) {
            continue;
        }
        let tw = ws.tower(x)?;
        worst = worst.max((tw.bernstein(n)[0] - 1.0).abs());
        for p in 0..n {
            let m = n - p;
            let o = offset(p + 1);
            let ratio = |i: usize| integ[o + i] / total[o + i];
            let direct = tw.bernstein(p);
            for (l, d) in direct.iter().enumerate() {
                let upper = if l == 0 { 1.0 } else { ratio(l - 1) };
                let lower = if l == m { 0.0 } else { ratio(l) };
                worst = worst.max((upper - lower - d).abs());
            }
        }
    }
    Ok(worst)
}
