//! Independent reference values: Bessel zeros, closed-form critical-length
//! equations for four-dimensional kernels, first zeros of Wronskians of the
//! Taylor-normalised solution, and a brute-force two-point determinant scan.
//! None of these share code paths with the EC test beyond family evaluation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bernlike::{pascal, scaled_map, step0_matrix};
use crate::ectest::Verdict;
use crate::expfam::eval_derivatives;
use crate::linalg::signed_hadamard;
use crate::space::PiecewiseSpace;
use crate::{build_family, find_roots, CharPoly, Error, Result, DEFAULT_CLUSTER_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BesselSeries,
    Bisection,
    ClosedForm,
    WronskianScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub bracket: [f64; 2],
    pub method: Method,
}

/// Equations whose first root in a stated bracket is a critical length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClosedForm {
    /// `(x² − a²)(x² + b²)`: `(b²−a²) sinh(ax) sin(bx) = 2ab(1 − cosh(ax) cos(bx))`.
    Zh3,
    /// `(x² + a²)(x² + b²)`, `a < b ≤ 3a`: `b sin(ax) = a sin(bx)`.
    DtrigLow,
    /// `(x² + a²)(x² + b²)`, `b ≥ 3a`: `(b−a) sin((b+a)x/2) + (b+a) sin((b−a)x/2) = 0`.
    DtrigHigh,
    /// roots `±a ± ib`: `b tanh(ax) = a tan(bx)`.
    Zs9,
    /// One trigonometric section of length `T = a` followed by a hyperbolic
    /// one: the largest admissible `H` solves `cot T + coth H = 0`.
    Ht1,
}

const BRACKET_REL: f64 = 1e-12;

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> [f64; 2] {
    let mut flo = f(lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BRACKET_REL * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            return [lo, hi];
        }
        let fm = f(mid);
        if fm == 0.0 {
            return [mid, mid];
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

fn bracketed(f: impl Fn(f64) -> f64, lo: f64, hi: f64, method: Method) -> Result<OracleValue> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo * fhi < 0.0) {
        return Err(Error::NoSignChange(hi));
    }
    let bracket = bisect(f, lo, hi);
    Ok(OracleValue {
        value: 0.5 * (bracket[0] + bracket[1]),
        bracket,
        method,
    })
}

/// First sign change of `f` on a grid of `(0, limit]`, refined.
fn first_sign_change(
    f: impl Fn(f64) -> f64,
    step: f64,
    limit: f64,
    method: Method,
) -> Result<OracleValue> {
    let mut x = step;
    let mut fx = f(x);
    while x < limit {
        let y = (x + step).min(limit);
        let fy = f(y);
        if fy == 0.0 {
            return Ok(OracleValue {
                value: y,
                bracket: [y, y],
                method,
            });
        }
        if fx * fy < 0.0 {
            return bracketed(&f, x, y, method);
        }
        x = y;
        fx = fy;
    }
    Err(Error::NoSignChange(limit))
}

/// `J_α(x) / (x/2)^α`, which has the zeros of `J_α` on `x > 0`.
fn bessel_reduced(alpha: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut t = 1.0 / gamma(alpha + 1.0);
    let mut sum = t;
    let mut m = 1.0;
    loop {
        t *= q / (m * (m + alpha));
        sum += t;
        if t.abs() < 1e-18 * sum.abs() && m > 0.5 * x {
            return sum;
        }
        m += 1.0;
    }
}

/// `J_α(x)` by its power series.
pub fn bessel_j(alpha: f64, x: f64) -> f64 {
    bessel_reduced(alpha, x) * (0.5 * x).powf(alpha)
}

/// First positive zero `j_{α,1}` of `J_α`, `0 ≤ α ≤ 10`.
pub fn bessel_first_zero(order: f64) -> Result<OracleValue> {
    if !(0.0..=10.0).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "Bessel order {order} outside [0, 10]"
        )));
    }
    first_sign_change(
        |x| bessel_reduced(order, x),
        PI / 64.0,
        30.0,
        Method::BesselSeries,
    )
}

pub fn solve_closed_form(case: ClosedForm, a: f64, b: f64) -> Result<OracleValue> {
    let regime = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRegime(format!("{what}: a = {a}, b = {b}")))
        }
    };
    match case {
        ClosedForm::Zh3 => {
            regime(a > 0.0 && b > 0.0, "need a, b > 0")?;
            let f = |x: f64| {
                (b * b - a * a) * (a * x).sinh() * (b * x).sin()
                    - 2.0 * a * b * (1.0 - (a * x).cosh() * (b * x).cos())
            };
            bracketed(f, PI / b, 2.0 * PI / b, Method::Bisection)
        }
        ClosedForm::DtrigLow => {
            regime(a > 0.0 && a < b && b <= 3.0 * a, "need 0 < a < b <= 3a")?;
            let f = |x: f64| b * (a * x).sin() - a * (b * x).sin();
            first_sign_change(f, PI / (64.0 * b), 2.0 * PI / a, Method::Bisection)
        }
        ClosedForm::DtrigHigh => {
            regime(a > 0.0 && b >= 3.0 * a, "need 0 < 3a <= b")?;
            let f =
                |x: f64| (b - a) * (0.5 * (b + a) * x).sin() + (b + a) * (0.5 * (b - a) * x).sin();
            first_sign_change(f, PI / (64.0 * b), 2.0 * PI / a, Method::Bisection)
        }
        ClosedForm::Zs9 => {
            regime(a > 0.0 && b > 0.0, "need a, b > 0")?;
            let f = |x: f64| b * (a * x).tanh() - a * (b * x).tan();
            let hi = 1.5 * PI / b;
            bracketed(f, PI / b, hi - 1e-12 * hi, Method::Bisection)
        }
        ClosedForm::Ht1 => {
            let c = -1.0 / a.tan();
            regime(a > 0.0 && a < PI && c > 1.0, "need cot T < -1")?;
            let h = (1.0 / c).atanh();
            Ok(OracleValue {
                value: h,
                bracket: [h, h],
                method: Method::ClosedForm,
            })
        }
    }
}

/// Value and first derivative carried through a determinant.
#[derive(Debug, Clone, Copy)]
struct Dual(f64, f64);

impl Dual {
    fn sub(self, o: Dual) -> Dual {
        Dual(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: Dual) -> Dual {
        Dual(self.0 * o.0, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: Dual) -> Dual {
        Dual(self.0 / o.0, (self.1 * o.0 - self.0 * o.1) / (o.0 * o.0))
    }
}

fn dual_det(mut m: Vec<Vec<Dual>>) -> Dual {
    let n = m.len();
    let mut det = Dual(1.0, 0.0);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].0.abs().total_cmp(&m[j][c].0.abs()))
            .unwrap();
        if m[p][c].0 == 0.0 {
            return Dual(0.0, 0.0);
        }
        if p != c {
            m.swap(p, c);
            det = Dual(-det.0, -det.1);
        }
        let piv = m[c][c];
        det = det.mul(piv);
        for r in c + 1..n {
            let f = m[r][c].div(piv);
            for k in c..n {
                m[r][k] = m[r][k].sub(f.mul(m[c][k]));
            }
        }
    }
    det
}

/// First positive zero of the Wronskian `W(S, S', ..., S^{(k)})`, where `S`
/// solves `L S = 0` with `S(0) = ... = S^{(n-1)}(0) = 0`, `S^{(n)}(0) = 1`.
/// Sign changes are refined by bisection; a touching zero is accepted when
/// `W'` changes sign where `|W|` falls below `1e-8` of its running maximum.
/// `None` when no zero is found up to `h_max`.
pub fn wronskian_scan(
    p: &CharPoly,
    k: usize,
    h_max: f64,
    step: f64,
) -> Result<Option<OracleValue>> {
    let n = p.degree() - 1;
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "Wronskian order {k} exceeds n = {n}"
        )));
    }
    if !(h_max > 0.0 && step > 0.0) {
        return Err(Error::InvalidArgument(
            "scan range and step must be positive".into(),
        ));
    }
    let fam = build_family(&find_roots(p, DEFAULT_CLUSTER_TOL)?);
    let mut e = DVector::<f64>::zeros(n + 1);
    e[n] = 1.0;
    let s = fam
        .derivative_matrix(0.0, n)
        .lu()
        .solve(&e)
        .ok_or(Error::SingularExpansion(0))?;
    let w = |h: f64| -> Result<Dual> {
        let d = eval_derivatives(&fam, &s, h, 2 * k + 1)?;
        let m = (0..=k)
            .map(|i| (0..=k).map(|j| Dual(d[i + j], d[i + j + 1])).collect())
            .collect();
        Ok(dual_det(m))
    };
    let val = |h: f64| w(h).map(|d| d.0).unwrap_or(f64::NAN);
    let slope = |h: f64| w(h).map(|d| d.1).unwrap_or(f64::NAN);
    let mut x = step;
    let mut wx = w(x)?;
    let mut peak = wx.0.abs();
    while x < h_max {
        let y = (x + step).min(h_max);
        let wy = w(y)?;
        if wy.0 == 0.0 {
            return Ok(Some(OracleValue {
                value: y,
                bracket: [y, y],
                method: Method::WronskianScan,
            }));
        }
        if wx.0 * wy.0 < 0.0 {
            let b = bisect(val, x, y);
            return Ok(Some(OracleValue {
                value: 0.5 * (b[0] + b[1]),
                bracket: b,
                method: Method::WronskianScan,
            }));
        }
        if wx.1 * wy.1 < 0.0 && wx.0 * wx.1 < 0.0 {
            let b = bisect(slope, x, y);
            let m = 0.5 * (b[0] + b[1]);
            if val(m).abs() <= 1e-8 * peak {
                return Ok(Some(OracleValue {
                    value: m,
                    bracket: b,
                    method: Method::WronskianScan,
                }));
            }
        }
        peak = peak.max(wy.0.abs());
        x = y;
        wx = wy;
    }
    Ok(None)
}

/// Smallest first Wronskian zero over `k = 0..=kmax`.
pub fn wronskian_min(
    p: &CharPoly,
    kmax: usize,
    h_max: f64,
    step: f64,
) -> Result<Option<OracleValue>> {
    let mut best: Option<OracleValue> = None;
    for k in 0..=kmax {
        if let Some(v) = wronskian_scan(p, k, h_max, step)? {
            if best.is_none_or(|b| v.value < b.value) {
                best = Some(v);
            }
        }
    }
    Ok(best)
}

const BRUTE_ZERO: f64 = 1e-10;

/// Golden-section minimum of `f` on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// Two-point Hermite determinants `det(U(x), ..., U^{(i-1)}(x), U(y), ...,
/// U^{(j-1)}(y))`, `i + j = n + 1`, at all grid pairs `x < y`, each relative
/// to the polynomial value for the same pair. `NotEC` when any of them is
/// near zero or of the wrong sign. Local minima along `y` are refined, so
/// zeros that touch without a sign change are found too. Sampling can still
/// miss a short failure, so `EC` here is evidence rather than proof.
pub fn brute_force_ec(sp: &PiecewiseSpace, grid: usize) -> Result<Verdict> {
    let n = sp.n();
    if n > 4 || grid > 400 || grid < 1 {
        return Err(Error::InvalidArgument(format!(
            "brute force limited to n <= 4 and 1 <= grid <= 400 (n = {n}, grid = {grid})"
        )));
    }
    let (a, b) = (sp.a(), sp.b());
    let pts: Vec<f64> = (0..=grid)
        .map(|s| {
            if s == grid {
                b
            } else {
                a + (b - a) * s as f64 / grid as f64
            }
        })
        .collect();
    let mats: Vec<DMatrix<f64>> = pts
        .iter()
        .map(|x| sp.jet_matrix_at(*x))
        .collect::<Result<_>>()?;
    let reference = pascal(n + 1);
    let refs: Vec<f64> = (1..=n)
        .map(|i| signed_hadamard(&step0_matrix(&reference, i)))
        .collect();
    let ratio = |inv: &DMatrix<f64>, x: f64, ym: &DMatrix<f64>, y: f64, i: usize| {
        let (p, _) = scaled_map(&(ym * inv), y - x);
        signed_hadamard(&step0_matrix(&p, i)) / refs[i - 1]
    };
    for x in 0..pts.len() {
        let inv = mats[x]
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::SingularExpansion(0))?;
        for i in 1..=n {
            let row: Vec<f64> = (x + 1..pts.len())
                .map(|y| ratio(&inv, pts[x], &mats[y], pts[y], i))
                .collect();
            if row.iter().any(|r| !(*r > BRUTE_ZERO)) {
                return Ok(Verdict::NotEC);
            }
            for k in 1..row.len().saturating_sub(1) {
                if row[k] < row[k - 1] && row[k] <= row[k + 1] {
                    let (lo, hi) = (pts[x + k], pts[x + k + 2]);
                    let at = |y: f64| match sp.jet_matrix_at(y) {
                        Ok(ym) => ratio(&inv, pts[x], &ym, y, i),
                        Err(_) => f64::NAN,
                    };
                    if !(golden_min(at, lo, hi) > BRUTE_ZERO) {
                        return Ok(Verdict::NotEC);
                    }
                }
            }
        }
    }
    Ok(Verdict::EC)
}
