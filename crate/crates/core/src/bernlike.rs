//! Bernstein-like bases by endpoint vanishing conditions, and level-0
//! expansion coefficients of a global basis in local ones.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::expfam::eval_derivatives;
use crate::linalg::{hadamard_ratio, inverse, null_vector};
use crate::space::PiecewiseSpace;
use crate::{CoefVec, Error, FamilyBasis, Result};

/// Default relative determinant threshold for Step 0.
pub const DEFAULT_TOL_DET: f64 = 1e-12;
/// Relative size under which a leading endpoint derivative counts as zero.
const EXACTNESS_TOL: f64 = 1e-12;
/// Spectral gap under which a nullspace is taken to be more than a line.
const GAP_TOL: f64 = 1e-13;

/// Coordinates the columns of a [`BernsteinLikeBasis`] are written in.
#[derive(Debug, Clone)]
pub enum BasisCoords {
    /// Family coefficients, evaluated at `x - origin`.
    Family { fam: FamilyBasis, origin: f64 },
    /// Jets `(F(a), ..., F^{(n)}(a))` at the left end of a piecewise space.
    Space(PiecewiseSpace),
    /// Coordinates of an antiderivative in the inner coordinates; the
    /// represented function is its derivative.
    Derived(Box<BasisCoords>),
}

impl BasisCoords {
    /// Derivatives `0..=max_order` at `x` of the function with coordinates `v`.
    pub fn eval(&self, v: &DVector<f64>, x: f64, max_order: usize) -> Result<Vec<f64>> {
        match self {
            BasisCoords::Family { fam, origin } => eval_derivatives(fam, v, x - origin, max_order),
            BasisCoords::Space(sp) => sp.eval_jet(v, x, max_order),
            BasisCoords::Derived(inner) => Ok(inner.eval(v, x, max_order + 1)?[1..].to_vec()),
        }
    }
}

/// Column scaling applied after the endpoint conditions are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    UnitNorm,
    /// Value 1 at the midpoint of the interval.
    Midpoint,
}

#[derive(Debug, Clone)]
pub struct BernsteinLikeBasis {
    pub c: f64,
    pub d: f64,
    pub coords: BasisCoords,
    pub columns: Vec<DVector<f64>>,
}

impl BernsteinLikeBasis {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn n(&self) -> usize {
        self.dim() - 1
    }

    /// Derivatives `0..=max_order` of column `i` at `x`.
    pub fn derivatives(&self, i: usize, x: f64, max_order: usize) -> Result<Vec<f64>> {
        self.eval_vec(&self.columns[i], x, max_order)
    }

    pub fn value(&self, i: usize, x: f64) -> Result<f64> {
        Ok(self.derivatives(i, x, 0)?[0])
    }

    /// Evaluate an arbitrary coordinate vector in this basis' coordinates.
    pub fn eval_vec(&self, v: &DVector<f64>, x: f64, max_order: usize) -> Result<Vec<f64>> {
        self.coords.eval(v, x, max_order)
    }

    /// Jets `(F(c), ..., F^{(n)}(c))` of all columns at the left end.
    pub fn jets_at_start(&self) -> DMatrix<f64> {
        let n = self.n();
        let m = self.columns_matrix();
        match &self.coords {
            BasisCoords::Family { fam, origin } => fam.derivative_matrix(self.c - origin, n) * m,
            BasisCoords::Space(_) => m,
            BasisCoords::Derived(_) => {
                let mut out = DMatrix::<f64>::zeros(n + 1, self.dim());
                for (j, col) in self.columns.iter().enumerate() {
                    let d = self
                        .coords
                        .eval(col, self.c, n)
                        .expect("start of the basis interval");
                    for (r, v) in d.into_iter().enumerate() {
                        out[(r, j)] = v;
                    }
                }
                out
            }
        }
    }

    pub fn columns_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.columns)
    }

    pub fn space(&self) -> Option<&PiecewiseSpace> {
        match &self.coords {
            BasisCoords::Space(sp) => Some(sp),
            _ => None,
        }
    }
}

/// `diag(s^r / r!)`: jets to Taylor coefficients in the variable `x / s`.
/// Working in these coordinates keeps the polynomial part of a family at
/// unit scale whatever the interval length.
fn taylor_scaling(dim: usize, s: f64) -> DVector<f64> {
    let mut d = DVector::<f64>::zeros(dim);
    let mut v = 1.0;
    for r in 0..dim {
        if r > 0 {
            v *= s / r as f64;
        }
        d[r] = v;
    }
    d
}

/// `D P D^{-1}` for the scaling above.
pub(crate) fn scaled_map(p: &DMatrix<f64>, s: f64) -> (DMatrix<f64>, DVector<f64>) {
    let d = taylor_scaling(p.nrows(), s);
    let mut q = p.clone();
    for r in 0..q.nrows() {
        for c in 0..q.ncols() {
            q[(r, c)] *= d[r] / d[c];
        }
    }
    (q, d)
}

/// Jets at the left end of the Bernstein-like basis of a space whose jets
/// are carried from left to right end by `p` over a length `s`. Column `i`
/// has its first `i` components zero and the first `n - i` components of
/// `p * v` zero. Leading endpoint derivatives under `exact_tol` (relative)
/// are treated as vanishing.
fn endpoint_basis(p: &DMatrix<f64>, s: f64, exact_tol: f64) -> Result<Vec<DVector<f64>>> {
    let (p, d) = scaled_map(p, s);
    let dim = p.nrows();
    let n = dim - 1;
    let mut out = Vec::with_capacity(dim);
    for i in 0..=n {
        let mut v = DVector::<f64>::zeros(dim);
        if i == n {
            v[n] = 1.0;
        } else {
            let sub = p.view((0, i), (n - i, dim - i)).into_owned();
            let (w, gap) = null_vector(&sub);
            if gap < GAP_TOL {
                return Err(Error::RankDeficient(i));
            }
            v.rows_mut(i, dim - i).copy_from(&w);
        }
        // exact vanishing orders at both ends
        let lead_a = v[i];
        let right = &p * &v;
        let row = p.row(n - i);
        let lead_b = right[n - i] / row.norm().max(f64::MIN_POSITIVE);
        if lead_a.abs() <= exact_tol * v.norm() || lead_b.abs() <= exact_tol * v.norm() {
            return Err(Error::RankDeficient(i));
        }
        if lead_a < 0.0 {
            v = -v;
        }
        out.push(v.component_div(&d));
    }
    Ok(out)
}

/// Bernstein-like basis of `fam` on `[c, d]`, columns of unit norm in
/// family coordinates with origin `c`.
pub fn local_bernstein_like(fam: &FamilyBasis, c: f64, d: f64) -> Result<BernsteinLikeBasis> {
    local_bernstein_like_with(fam, c, d, Normalization::UnitNorm)
}

pub fn local_bernstein_like_with(
    fam: &FamilyBasis,
    c: f64,
    d: f64,
    norm: Normalization,
) -> Result<BernsteinLikeBasis> {
    if !(d > c) {
        return Err(Error::InvalidKnots(format!("need c < d, got [{c}, {d}]")));
    }
    let n = fam.dim() - 1;
    let m0 = fam.derivative_matrix(0.0, n);
    let inv = inverse(&m0).ok_or(Error::SingularExpansion(0))?;
    let p = fam.derivative_matrix(d - c, n) * &inv;
    let jets = endpoint_basis(&p, d - c, EXACTNESS_TOL)?;
    let mid = fam.term_values(0.5 * (d - c));
    let mut columns = Vec::with_capacity(jets.len());
    for (i, y) in jets.iter().enumerate() {
        let v = &inv * y;
        let s = match norm {
            Normalization::UnitNorm => v.norm(),
            Normalization::Midpoint => {
                let m = mid.dot(&v);
                if !(m > 0.0) {
                    return Err(Error::NotPositive {
                        index: i,
                        x: 0.5 * (c + d),
                    });
                }
                m
            }
        };
        columns.push(v / s);
    }
    Ok(BernsteinLikeBasis {
        c,
        d,
        coords: BasisCoords::Family {
            fam: fam.clone(),
            origin: c,
        },
        columns,
    })
}

/// Sample check that every column is positive on the open interval.
pub fn verify_positive(basis: &BernsteinLikeBasis, samples: usize) -> Result<()> {
    let h = (basis.d - basis.c) / (samples + 1) as f64;
    for s in 1..=samples {
        let x = basis.c + h * s as f64;
        for i in 0..basis.dim() {
            if !(basis.value(i, x)? > 0.0) {
                return Err(Error::NotPositive { index: i, x });
            }
        }
    }
    Ok(())
}

pub(crate) fn step0_matrix(p: &DMatrix<f64>, i: usize) -> DMatrix<f64> {
    let dim = p.nrows();
    let j = dim - i;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for r in 0..i {
        m[(r, r)] = 1.0;
    }
    for r in 0..j {
        m.set_row(i + r, &p.row(r));
    }
    m
}

/// Jet map of the polynomials of degree `< dim` over `[0, 1]` in scaled
/// Taylor coordinates: `binom(c, r)`.
pub(crate) fn pascal(dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for c in 0..dim {
        let mut v = 1.0;
        for r in 0..=c {
            m[(r, c)] = v;
            v = v * (c - r) as f64 / (r + 1) as f64;
        }
    }
    m
}

/// Step 0 determinants for `i = 1..=n` (with `j = n + 1 - i`), on the basis
/// whose scaled Taylor coefficients at `a` are the unit vectors. Each value
/// is the row-normalised ratio `|det| / prod(row norms)` divided by the same
/// ratio for polynomials of the same dimension, so short intervals give
/// values near 1 whatever `n`.
pub fn step0_ratios(sp: &PiecewiseSpace) -> Vec<f64> {
    let (p, _) = scaled_map(&sp.total_jet_map(), sp.b() - sp.a());
    let reference = pascal(sp.dim());
    (1..=sp.n())
        .map(|i| {
            hadamard_ratio(&step0_matrix(&p, i)) / hadamard_ratio(&step0_matrix(&reference, i))
        })
        .collect()
}

/// Global Bernstein-like basis relative to the ends of `sp`, written as jets
/// at `a`, with unit-norm columns.
pub fn global_bernstein_like(sp: &PiecewiseSpace) -> Result<BernsteinLikeBasis> {
    global_bernstein_like_with(sp, DEFAULT_TOL_DET)
}

pub fn global_bernstein_like_with(sp: &PiecewiseSpace, tol_det: f64) -> Result<BernsteinLikeBasis> {
    let n = sp.n();
    for (idx, ratio) in step0_ratios(sp).into_iter().enumerate() {
        if !(ratio > tol_det) {
            let i = idx + 1;
            return Err(Error::NoBasisEvidence {
                i,
                j: n + 1 - i,
                ratio,
            });
        }
    }
    let p = sp.total_jet_map();
    let columns = endpoint_basis(&p, sp.b() - sp.a(), 0.0)?
        .into_iter()
        .map(|v| v.normalize())
        .collect();
    Ok(BernsteinLikeBasis {
        c: sp.a(),
        d: sp.b(),
        coords: BasisCoords::Space(sp.clone()),
        columns,
    })
}

/// Expansion coefficients `γ[i][k][r]` at one level. Index ranges:
/// `i, r in 0..size`, `k in 0..sections`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTensor {
    pub level: usize,
    pub size: usize,
    pub sections: usize,
    data: Vec<f64>,
}

impl GammaTensor {
    pub fn zeros(level: usize, size: usize, sections: usize) -> Self {
        Self {
            level,
            size,
            sections,
            data: vec![0.0; size * size * sections],
        }
    }

    /// Build from nested `[i][k][r]` vectors.
    pub fn from_nested(level: usize, g: &[Vec<Vec<f64>>]) -> Self {
        let size = g.len();
        let sections = g[0].len();
        let mut t = Self::zeros(level, size, sections);
        for (i, gi) in g.iter().enumerate() {
            for (k, gik) in gi.iter().enumerate() {
                for (r, v) in gik.iter().enumerate() {
                    t.set(i, k, r, *v);
                }
            }
        }
        t
    }

    fn idx(&self, i: usize, k: usize, r: usize) -> usize {
        (i * self.sections + k) * self.size + r
    }

    pub fn get(&self, i: usize, k: usize, r: usize) -> f64 {
        self.data[self.idx(i, k, r)]
    }

    pub fn set(&mut self, i: usize, k: usize, r: usize, v: f64) {
        let j = self.idx(i, k, r);
        self.data[j] = v;
    }

    /// Entries forced to zero: `r < i` on the first section, `r > i` on the
    /// last one.
    pub fn is_pattern(&self, i: usize, k: usize, r: usize) -> bool {
        (k == 0 && r < i) || (k + 1 == self.sections && r > i)
    }

    /// Largest pattern entry relative to its row maximum.
    pub fn pattern_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.size {
            for k in 0..self.sections {
                let s = self.row_scale(i, k);
                for r in 0..self.size {
                    if self.is_pattern(i, k, r) && s > 0.0 {
                        worst = worst.max(self.get(i, k, r).abs() / s);
                    }
                }
            }
        }
        worst
    }

    pub fn clear_pattern(&mut self) {
        for i in 0..self.size {
            for k in 0..self.sections {
                for r in 0..self.size {
                    if self.is_pattern(i, k, r) {
                        self.set(i, k, r, 0.0);
                    }
                }
            }
        }
    }

    pub fn row_scale(&self, i: usize, k: usize) -> f64 {
        (0..self.size)
            .map(|r| self.get(i, k, r).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.size)
            .map(|i| {
                (0..self.sections)
                    .map(|k| (0..self.size).map(|r| self.get(i, k, r)).collect())
                    .collect()
            })
            .collect()
    }
}

/// `γ⁰`: coefficients of each global column restricted to section `k` in
/// the local basis `locals[k]`. The global basis must be written as jets of
/// a piecewise space.
pub fn level0_expansions(
    global: &BernsteinLikeBasis,
    locals: &[BernsteinLikeBasis],
) -> Result<GammaTensor> {
    let sp = global.space().ok_or_else(|| {
        Error::InvalidArgument("global basis must live on a piecewise space".into())
    })?;
    if locals.len() != sp.sections().len() {
        return Err(Error::DimensionMismatch(sp.sections().len(), locals.len()));
    }
    let y = global.columns_matrix();
    let jets = sp.knot_jets(&y);
    let size = global.dim();
    let mut g = GammaTensor::zeros(0, size, locals.len());
    for (k, loc) in locals.iter().enumerate() {
        let lk = loc.jets_at_start();
        let lu = lk.clone().lu();
        let coef = lu.solve(&jets[k]).ok_or(Error::SingularExpansion(k))?;
        let resid = (&lk * &coef - &jets[k]).norm();
        if !(resid <= 1e-8 * jets[k].norm().max(f64::MIN_POSITIVE)) {
            return Err(Error::SingularExpansion(k));
        }
        for i in 0..size {
            for r in 0..size {
                g.set(i, k, r, coef[(r, i)]);
            }
        }
    }
    Ok(g)
}

/// Local bases used by the test: midpoint-normalised, in family coordinates
/// at each section start.
pub fn engine_locals(sp: &PiecewiseSpace) -> Result<Vec<BernsteinLikeBasis>> {
    sp.sections()
        .iter()
        .map(|s| local_bernstein_like_with(&s.fam, s.start, s.end, Normalization::Midpoint))
        .collect()
}

/// Convenience for callers holding family coefficients.
pub fn family_basis(
    fam: &FamilyBasis,
    origin: f64,
    c: f64,
    d: f64,
    columns: Vec<CoefVec>,
) -> BernsteinLikeBasis {
    BernsteinLikeBasis {
        c,
        d,
        coords: BasisCoords::Family {
            fam: fam.clone(),
            origin,
        },
        columns,
    }
}
