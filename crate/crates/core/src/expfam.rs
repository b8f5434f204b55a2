//! Exponential-polynomial kernels of constant-coefficient operators.
//!
//! The kernel of `L = D^{n+1} + a_n D^n + ... + a_0` is spanned by the real
//! functions `x^j e^{αx} cos βx` and `x^j e^{αx} sin βx` (plus `x^j e^{αx}`
//! for real roots), one block per root of the characteristic polynomial.
//! Members are stored as coefficient vectors over that canonical family and
//! differentiated exactly through a fixed matrix.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default relative tolerance used to merge numerically coincident roots.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Monic characteristic polynomial `x^{n+1} + a_n x^n + ... + a_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    coeffs: Vec<f64>,
}

impl CharPoly {
    /// `coeffs` holds `a_0..a_n`; the leading 1 is implied.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial("degree must be at least 1".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `x^k`, including the implied leading one.
    fn coef(&self, k: usize) -> f64 {
        if k == self.coeffs.len() {
            1.0
        } else {
            self.coeffs[k]
        }
    }

    /// `p^{(order)}(z)` together with the sum of absolute values of its terms.
    pub fn eval_deriv_complex(&self, z: Complex<f64>, order: usize) -> (Complex<f64>, f64) {
        let d = self.degree();
        if order > d {
            return (Complex::new(0.0, 0.0), 0.0);
        }
        let mut acc = Complex::new(0.0, 0.0);
        let mut scale = 0.0;
        let za = z.norm();
        // Horner on the differentiated coefficients
        for k in (order..=d).rev() {
            let mut f = 1.0;
            for t in 0..order {
                f *= (k - t) as f64;
            }
            let c = self.coef(k) * f;
            acc = acc * z + c;
            scale = scale * za + c.abs();
        }
        (acc, scale)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_deriv_complex(Complex::new(x, 0.0), 0).0.re
    }

    /// Expand `Π (x - r)^m` over a root set (conjugates included).
    pub fn from_roots(roots: &RootSet) -> Self {
        let mut poly = vec![1.0]; // ascending powers
        let mul = |poly: &mut Vec<f64>, factor: &[f64]| {
            let mut out = vec![0.0; poly.len() + factor.len() - 1];
            for (i, a) in poly.iter().enumerate() {
                for (j, b) in factor.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            *poly = out;
        };
        for r in roots.entries() {
            let factor: Vec<f64> = if r.im == 0.0 {
                vec![-r.re, 1.0]
            } else {
                vec![r.re * r.re + r.im * r.im, -2.0 * r.re, 1.0]
            };
            for _ in 0..r.mult {
                mul(&mut poly, &factor);
            }
        }
        poly.pop();
        Self { coeffs: poly }
    }

    /// `p(x)/x` when `p(0) = 0` exactly.
    pub fn deflate_x(&self) -> Option<Self> {
        if self.coeffs[0] != 0.0 || self.degree() < 2 {
            return None;
        }
        Some(Self {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// Polynomial whose roots are those of `self` multiplied by `b`.
    pub fn scale_roots(&self, b: f64) -> Self {
        let d = self.degree();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * b.powi((d - i) as i32))
            .collect();
        Self { coeffs }
    }
}

/// One root of the characteristic polynomial. Conjugate pairs are stored
/// once with `im > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    pub mult: usize,
}

impl Root {
    pub fn new(re: f64, im: f64, mult: usize) -> Self {
        Self { re, im, mult }
    }

    /// Number of real kernel functions contributed by this entry.
    pub fn real_count(&self) -> usize {
        if self.im == 0.0 {
            self.mult
        } else {
            2 * self.mult
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    entries: Vec<Root>,
}

impl RootSet {
    pub fn new(mut entries: Vec<Root>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidRoots("empty root set".into()));
        }
        for r in &entries {
            if !r.re.is_finite() || !r.im.is_finite() {
                return Err(Error::InvalidRoots("non-finite root".into()));
            }
            if r.im < 0.0 {
                return Err(Error::InvalidRoots(format!(
                    "negative imaginary part {} (pairs are stored with im > 0)",
                    r.im
                )));
            }
            if r.mult == 0 {
                return Err(Error::InvalidRoots("zero multiplicity".into()));
            }
        }
        entries.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        // merge exact duplicates
        let mut merged: Vec<Root> = Vec::with_capacity(entries.len());
        for r in entries {
            match merged.last_mut() {
                Some(last) if last.re == r.re && last.im == r.im => last.mult += r.mult,
                _ => merged.push(r),
            }
        }
        Ok(Self { entries: merged })
    }

    pub fn entries(&self) -> &[Root] {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(Root::real_count).sum()
    }

    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|r| r.im).fold(0.0, f64::max)
    }

    pub fn all_real(&self) -> bool {
        self.entries.iter().all(|r| r.im == 0.0)
    }

    /// Roots multiplied by a positive factor.
    pub fn scaled(&self, b: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|r| Root::new(r.re * b, r.im * b, r.mult))
            .collect();
        Self { entries }
    }

    /// Root set of `x * p(x)`.
    pub fn with_extra_zero(&self) -> Self {
        let mut e = self.entries.clone();
        e.push(Root::new(0.0, 0.0, 1));
        Self::new(e).expect("valid by construction")
    }
}

fn complex_root_scale(c: Complex<f64>) -> f64 {
    c.norm()
}

/// Roots of `p` with multiplicities.
///
/// Exact zero roots (vanishing low-order coefficients) are split off first.
/// The rest come from the eigenvalues of the companion matrix; eigenvalues
/// belonging to an m-fold root scatter on a circle of radius about
/// `eps^{1/m}` (times the root conditioning), so candidate clusters are accepted when their refined centre
/// annihilates `p, p', ..., p^{(m-1)}`. Clusters closer than
/// `cluster_tol * max|root|` always merge.
pub fn find_roots(p: &CharPoly, cluster_tol: f64) -> Result<RootSet> {
    if !(cluster_tol > 0.0) {
        return Err(Error::InvalidArgument(
            "cluster_tol must be positive".into(),
        ));
    }
    let zeros = p.coeffs.iter().take_while(|&&c| c == 0.0).count();
    let mut roots: Vec<Root> = Vec::new();
    if zeros > 0 {
        roots.push(Root::new(0.0, 0.0, zeros));
    }
    let q = CharPoly {
        coeffs: p.coeffs[zeros..].to_vec(),
    };
    let d = p.degree() - zeros;
    if d == 1 {
        roots.push(Root::new(-q.coeffs[0], 0.0, 1));
    } else if d >= 2 {
        roots.extend(cluster_roots(&q, cluster_tol)?);
    }
    // merge entries that landed within the clustering tolerance of each other
    let scale = roots.iter().map(|r| r.re.hypot(r.im)).fold(1.0, f64::max);
    let mut merged: Vec<Root> = Vec::new();
    for r in roots {
        if let Some(m) = merged.iter_mut().find(|m| {
            (m.re - r.re).hypot(m.im - r.im) <= cluster_tol * scale
                && (m.im == 0.0) == (r.im == 0.0)
        }) {
            if r.mult > m.mult {
                m.re = r.re;
                m.im = r.im;
            }
            m.mult += r.mult;
        } else {
            merged.push(r);
        }
    }
    let set = RootSet::new(merged)?;
    if set.degree() != p.degree() {
        return Err(Error::MultiplicityMismatch {
            expected: p.degree(),
            found: set.degree(),
        });
    }
    Ok(set)
}

fn cluster_roots(q: &CharPoly, cluster_tol: f64) -> Result<Vec<Root>> {
    let d = q.degree();
    let mut eig = companion_eigenvalues(&q.coeffs)?;
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    eig.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let scale = eig
        .iter()
        .map(|z| complex_root_scale(*z))
        .fold(1.0, f64::max);
    let eps = f64::EPSILON;

    let mut assigned = vec![false; d];
    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for idx in 0..d {
        if assigned[idx] {
            continue;
        }
        let mut order: Vec<usize> = (0..d).filter(|&j| !assigned[j]).collect();
        order.sort_by(|&x, &y| {
            let dx = (eig[x] - eig[idx]).norm();
            let dy = (eig[y] - eig[idx]).norm();
            dx.partial_cmp(&dy).unwrap().then(x.cmp(&y))
        });
        let mut accepted: Option<(usize, Complex<f64>)> = None;
        for m in (1..=order.len()).rev() {
            let members = &order[..m];
            let centroid = members.iter().map(|&j| eig[j]).sum::<Complex<f64>>() / m as f64;
            if m == 1 {
                accepted = Some((1, polish_simple(q, centroid)));
                break;
            }
            let radius = (cluster_tol).max(1000.0 * eps.powf(1.0 / m as f64)) * scale;
            if members.iter().any(|&j| (eig[j] - centroid).norm() > radius) {
                continue;
            }
            let tight = members
                .iter()
                .all(|&j| (eig[j] - centroid).norm() <= cluster_tol * scale);
            let r = refine_multiple(q, centroid, m, scale);
            if tight || annihilates(q, r, m) {
                accepted = Some((m, r));
                break;
            }
        }
        let (m, r) = accepted.expect("m = 1 always accepted");
        for &j in &order[..m] {
            assigned[j] = true;
        }
        clusters.push((r, m));
    }

    let snap = 1e-12 * scale;
    let mut out = Vec::new();
    for (mut r, m) in clusters {
        if r.re.abs() < 1e-14 * scale {
            r.re = 0.0;
        }
        if r.im.abs() <= snap.max(cluster_tol * scale * 1e-2) {
            out.push(Root::new(r.re, 0.0, m));
        } else if r.im > 0.0 {
            out.push(Root::new(r.re, r.im, m));
        }
    }
    Ok(out)
}

/// Companion matrix of a monic polynomial given by `a_0..a_{d-1}`.
fn companion(coeffs: &[f64]) -> DMatrix<f64> {
    let d = coeffs.len();
    let mut comp = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -coeffs[i];
    }
    comp
}

/// Coefficients of `q(y) = p(y + s)` (monic, ascending, leading one implied).
fn taylor_shift(coeffs: &[f64], s: f64) -> Vec<f64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    c.push(1.0);
    let d = c.len();
    for i in 0..d {
        for j in (i..d - 1).rev() {
            c[j] += s * c[j + 1];
        }
    }
    c.pop();
    c
}

/// Roots through a bounded Schur iteration on the companion matrix. The
/// shifted QR sweep can stall on very symmetric companions (`x^4 + 4`); a
/// shift of the variable breaks the symmetry.
fn companion_eigenvalues(coeffs: &[f64]) -> Result<Vec<Complex<f64>>> {
    let scale = coeffs.iter().fold(1.0f64, |m, c| {
        m.max(c.abs().powf(1.0 / coeffs.len() as f64))
    });
    for attempt in 0..6 {
        let shift = 0.0731 * attempt as f64 * scale;
        let m = companion(&taylor_shift(coeffs, shift));
        if let Some(schur) = Schur::try_new(m, f64::EPSILON, 10_000) {
            let eig: Vec<Complex<f64>> = schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z + Complex::new(shift, 0.0))
                .collect();
            if eig.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Ok(eig);
            }
        }
    }
    Err(Error::NonFinite)
}

fn polish_simple(q: &CharPoly, z: Complex<f64>) -> Complex<f64> {
    let (f, _) = q.eval_deriv_complex(z, 0);
    let (df, _) = q.eval_deriv_complex(z, 1);
    if df.norm() == 0.0 {
        return z;
    }
    let cand = z - f / df;
    let (fc, _) = q.eval_deriv_complex(cand, 0);
    if cand.re.is_finite() && cand.im.is_finite() && fc.norm() <= f.norm() {
        cand
    } else {
        z
    }
}

/// Newton on `p^{(m-1)}`, whose simple root coincides with an m-fold root of p.
fn refine_multiple(q: &CharPoly, start: Complex<f64>, m: usize, scale: f64) -> Complex<f64> {
    let mut z = start;
    for _ in 0..60 {
        let (f, _) = q.eval_deriv_complex(z, m - 1);
        let (df, _) = q.eval_deriv_complex(z, m);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        if !(step.re.is_finite() && step.im.is_finite()) || step.norm() > scale {
            return start;
        }
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    z
}

fn annihilates(q: &CharPoly, z: Complex<f64>, m: usize) -> bool {
    (0..m).all(|j| {
        let (v, s) = q.eval_deriv_complex(z, j);
        v.norm() <= 1e-8 * s.max(f64::MIN_POSITIVE)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermKind {
    Exp,
    Cos,
    Sin,
}

/// One family function `x^j e^{αx} cos βx` (or `sin`, or plain exponential).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub power: usize,
    pub alpha: f64,
    pub beta: f64,
    pub kind: TermKind,
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        let base = x.powi(self.power as i32) * (self.alpha * x).exp();
        match self.kind {
            TermKind::Exp => base,
            TermKind::Cos => base * (self.beta * x).cos(),
            TermKind::Sin => base * (self.beta * x).sin(),
        }
    }
}

/// Canonical real basis of a kernel together with its exact
/// differentiation matrix (`diff_op * v` is the coefficient vector of `F'`).
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBasis {
    terms: Vec<Term>,
    diff_op: DMatrix<f64>,
    roots: RootSet,
}

/// Coefficients of a member of a [`FamilyBasis`].
pub type CoefVec = DVector<f64>;

impl FamilyBasis {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn diff_op(&self) -> &DMatrix<f64> {
        &self.diff_op
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    fn index_of(&self, power: usize, alpha: f64, beta: f64, kind: TermKind) -> Option<usize> {
        self.terms
            .iter()
            .position(|t| t.power == power && t.alpha == alpha && t.beta == beta && t.kind == kind)
    }

    /// Whether the constant function belongs to the family.
    pub fn contains_constants(&self) -> bool {
        self.index_of(0, 0.0, 0.0, TermKind::Exp).is_some()
    }

    pub fn term_values(&self, x: f64) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.terms.iter().map(|t| t.eval(x)))
    }

    /// Rows are derivative orders `0..=max_order`, columns family terms.
    pub fn derivative_matrix(&self, x: f64, max_order: usize) -> DMatrix<f64> {
        let dim = self.dim();
        let mut out = DMatrix::<f64>::zeros(max_order + 1, dim);
        let mut row = self.term_values(x).transpose();
        for k in 0..=max_order {
            out.set_row(k, &row);
            if k < max_order {
                row = &row * &self.diff_op;
            }
        }
        out
    }

    /// Default cap on requested derivative orders.
    pub fn order_cap(&self) -> usize {
        2 * self.dim()
    }
}

/// Build the canonical real family from a root set. Terms are ordered by
/// `(β, α, kind, j)`, so real exponentials come first.
pub fn build_family(r: &RootSet) -> FamilyBasis {
    let mut terms = Vec::with_capacity(r.degree());
    for root in r.entries() {
        for j in 0..root.mult {
            if root.im == 0.0 {
                terms.push(Term {
                    power: j,
                    alpha: root.re,
                    beta: 0.0,
                    kind: TermKind::Exp,
                });
            } else {
                terms.push(Term {
                    power: j,
                    alpha: root.re,
                    beta: root.im,
                    kind: TermKind::Cos,
                });
                terms.push(Term {
                    power: j,
                    alpha: root.re,
                    beta: root.im,
                    kind: TermKind::Sin,
                });
            }
        }
    }
    terms.sort_by(|a, b| {
        (a.beta, a.alpha)
            .partial_cmp(&(b.beta, b.alpha))
            .unwrap()
            .then(a.kind.cmp(&b.kind))
            .then(a.power.cmp(&b.power))
    });
    let dim = terms.len();
    let mut fam = FamilyBasis {
        terms,
        diff_op: DMatrix::zeros(dim, dim),
        roots: r.clone(),
    };
    let mut d = DMatrix::<f64>::zeros(dim, dim);
    for (col, t) in fam.terms.iter().enumerate() {
        let (j, a, b) = (t.power, t.alpha, t.beta);
        let mut add = |power: usize, kind: TermKind, v: f64| {
            if v != 0.0 {
                let row = fam
                    .index_of(power, a, b, kind)
                    .expect("family closed under D");
                d[(row, col)] += v;
            }
        };
        match t.kind {
            TermKind::Exp => {
                if j > 0 {
                    add(j - 1, TermKind::Exp, j as f64);
                }
                add(j, TermKind::Exp, a);
            }
            TermKind::Cos => {
                if j > 0 {
                    add(j - 1, TermKind::Cos, j as f64);
                }
                add(j, TermKind::Cos, a);
                add(j, TermKind::Sin, -b);
            }
            TermKind::Sin => {
                if j > 0 {
                    add(j - 1, TermKind::Sin, j as f64);
                }
                add(j, TermKind::Sin, a);
                add(j, TermKind::Cos, b);
            }
        }
    }
    fam.diff_op = d;
    fam
}

/// `[F(x), F'(x), ..., F^{(max_order)}(x)]` through powers of the
/// differentiation matrix. Orders above [`FamilyBasis::order_cap`] are refused.
pub fn eval_derivatives(
    fam: &FamilyBasis,
    v: &CoefVec,
    x: f64,
    max_order: usize,
) -> Result<Vec<f64>> {
    if max_order > fam.order_cap() {
        return Err(Error::OrderTooHigh {
            requested: max_order,
            cap: fam.order_cap(),
        });
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument("x must be finite".into()));
    }
    let vals = fam.term_values(x);
    let mut w = v.clone();
    let mut out = Vec::with_capacity(max_order + 1);
    for k in 0..=max_order {
        let y = vals.dot(&w);
        if !y.is_finite() {
            return Err(Error::Overflow(x));
        }
        out.push(y);
        if k < max_order {
            w = fam.diff_op() * w;
        }
    }
    Ok(out)
}
