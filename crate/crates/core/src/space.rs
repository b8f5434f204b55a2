//! Piecewise spaces: local kernels glued with C^n continuity at knots.
//!
//! Every section holds a kernel of some constant-coefficient operator, so it
//! is closed under translation. The EC test therefore works with Taylor
//! data ("jets") `(F, F', ..., F^{(n)})` at section starts: a jet is carried
//! across a section by `M(len) M(0)^{-1}` and across a knot unchanged, which
//! is exactly C^n gluing. Family-coefficient transfer maps are kept as well
//! for evaluation of [`GlobalMember`]s.

use std::cell::OnceCell;

use nalgebra::{DMatrix, DVector};

use crate::expfam::{build_family, eval_derivatives, find_roots, DEFAULT_CLUSTER_TOL};
use crate::linalg::{cond2, hadamard_ratio, inverse, solve};
use crate::{CharPoly, CoefVec, Error, FamilyBasis, Result, RootSet};

/// Warning threshold for matching-matrix condition numbers.
pub const TRANSFER_COND_WARN: f64 = 1e12;
const TRANSFER_COND_SINGULAR: f64 = 1e15;

/// An operator given either by its characteristic polynomial or its roots.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Coeffs(CharPoly),
    Roots(RootSet),
}

impl Operator {
    pub fn roots(&self, cluster_tol: f64) -> Result<RootSet> {
        match self {
            Operator::Coeffs(p) => find_roots(p, cluster_tol),
            Operator::Roots(r) => Ok(r.clone()),
        }
    }

    pub fn family(&self, cluster_tol: f64) -> Result<FamilyBasis> {
        Ok(build_family(&self.roots(cluster_tol)?))
    }

    pub fn degree(&self) -> usize {
        match self {
            Operator::Coeffs(p) => p.degree(),
            Operator::Roots(r) => r.degree(),
        }
    }
}

/// One piece `[start, end]` of a piecewise space. Family functions are
/// evaluated at `x - origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub fam: FamilyBasis,
    pub start: f64,
    pub end: f64,
    pub origin: f64,
}

impl Section {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone)]
pub struct PiecewiseSpace {
    sections: Vec<Section>,
    transfers: Vec<DMatrix<f64>>,
    transfer_conditions: Vec<f64>,
    warnings: Vec<String>,
    jet_maps: Vec<DMatrix<f64>>,
    taylor_inv: Vec<DMatrix<f64>>,
}

fn check_knots(a: f64, knots: &[f64], b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidKnots(format!(
            "need finite a < b, got [{a}, {b}]"
        )));
    }
    let mut prev = a;
    for &t in knots {
        if !(t > prev && t < b) {
            return Err(Error::InvalidKnots(format!(
                "knots must increase strictly inside ({a}, {b})"
            )));
        }
        prev = t;
    }
    Ok(())
}

impl PiecewiseSpace {
    /// Restriction of `ker L` to `[a, b]` cut at `knots`. All sections share
    /// one family and origin, so every transfer map is the identity.
    pub fn make_uniform(p: &CharPoly, a: f64, knots: &[f64], b: f64) -> Result<Self> {
        let fam = build_family(&find_roots(p, DEFAULT_CLUSTER_TOL)?);
        Self::uniform(&fam, a, knots, b)
    }

    pub fn uniform(fam: &FamilyBasis, a: f64, knots: &[f64], b: f64) -> Result<Self> {
        check_knots(a, knots, b)?;
        let mut pts = vec![a];
        pts.extend_from_slice(knots);
        pts.push(b);
        let sections = pts
            .windows(2)
            .map(|w| Section {
                fam: fam.clone(),
                start: w[0],
                end: w[1],
                origin: a,
            })
            .collect();
        Self::from_sections(sections)
    }

    /// Uniform space on `[a, b]` cut into `parts` equal sections.
    pub fn uniform_equal(fam: &FamilyBasis, a: f64, b: f64, parts: usize) -> Result<Self> {
        let parts = parts.max(1);
        let h = (b - a) / parts as f64;
        let knots: Vec<f64> = (1..parts).map(|j| a + h * j as f64).collect();
        Self::uniform(fam, a, &knots, b)
    }

    /// C^n connection of consecutive kernels starting at `start`.
    pub fn make_spliced(start: f64, pieces: &[(Operator, f64)]) -> Result<Self> {
        let fams = pieces
            .iter()
            .map(|(op, len)| Ok((op.family(DEFAULT_CLUSTER_TOL)?, *len)))
            .collect::<Result<Vec<_>>>()?;
        Self::spliced(start, &fams)
    }

    pub fn spliced(start: f64, pieces: &[(FamilyBasis, f64)]) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidKnots("no sections".into()));
        }
        let mut t = start;
        let mut sections = Vec::with_capacity(pieces.len());
        for (fam, len) in pieces {
            if !(len.is_finite() && *len > 0.0) {
                return Err(Error::InvalidKnots(format!(
                    "section length {len} must be positive"
                )));
            }
            sections.push(Section {
                fam: fam.clone(),
                start: t,
                end: t + len,
                origin: t,
            });
            t += len;
        }
        Self::from_sections(sections)
    }

    pub fn from_sections(sections: Vec<Section>) -> Result<Self> {
        let dim = sections[0].fam.dim();
        for s in &sections {
            if s.fam.dim() != dim {
                return Err(Error::DimensionMismatch(dim, s.fam.dim()));
            }
            if !(s.end > s.start) {
                return Err(Error::InvalidKnots("empty section".into()));
            }
        }
        for w in sections.windows(2) {
            if w[0].end != w[1].start {
                return Err(Error::InvalidKnots("sections must be contiguous".into()));
            }
        }
        let n = dim - 1;
        let mut transfers = Vec::new();
        let mut conds = Vec::new();
        let mut warnings = Vec::new();
        for (k, w) in sections.windows(2).enumerate() {
            let x = w[0].end;
            let left = w[0].fam.derivative_matrix(x - w[0].origin, n);
            let same = w[0].fam == w[1].fam && w[0].origin == w[1].origin;
            let right = if same {
                left.clone()
            } else {
                w[1].fam.derivative_matrix(x - w[1].origin, n)
            };
            let cond = cond2(&right);
            if !(cond < TRANSFER_COND_SINGULAR) {
                return Err(Error::SingularTransfer { knot: k + 1, cond });
            }
            if cond > TRANSFER_COND_WARN {
                warnings.push(format!(
                    "matching matrix at knot {} has condition number {cond:.3e}",
                    k + 1
                ));
            }
            let t = if same {
                DMatrix::identity(dim, dim)
            } else {
                solve(&right, &left).ok_or(Error::SingularTransfer { knot: k + 1, cond })?
            };
            transfers.push(t);
            conds.push(cond);
        }
        let mut jet_maps = Vec::with_capacity(sections.len());
        let mut taylor_inv = Vec::with_capacity(sections.len());
        for s in &sections {
            let m0 = s.fam.derivative_matrix(0.0, n);
            let inv = inverse(&m0).ok_or(Error::SingularTransfer {
                knot: 0,
                cond: f64::INFINITY,
            })?;
            jet_maps.push(s.fam.derivative_matrix(s.len(), n) * &inv);
            taylor_inv.push(inv);
        }
        Ok(Self {
            sections,
            transfers,
            transfer_conditions: conds,
            warnings,
            jet_maps,
            taylor_inv,
        })
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn transfers(&self) -> &[DMatrix<f64>] {
        &self.transfers
    }

    pub fn transfer_conditions(&self) -> &[f64] {
        &self.transfer_conditions
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn dim(&self) -> usize {
        self.sections[0].fam.dim()
    }

    /// `n`, one less than the dimension.
    pub fn n(&self) -> usize {
        self.dim() - 1
    }

    /// Number of interior knots.
    pub fn q(&self) -> usize {
        self.sections.len() - 1
    }

    pub fn a(&self) -> f64 {
        self.sections[0].start
    }

    pub fn b(&self) -> f64 {
        self.sections[self.sections.len() - 1].end
    }

    /// `t_0 = a, t_1, ..., t_{q+1} = b`.
    pub fn knots(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.sections.iter().map(|s| s.start).collect();
        v.push(self.b());
        v
    }

    /// Section owning `x`; knots belong to the section on their left.
    pub fn section_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.a() && x <= self.b()) {
            return None;
        }
        self.sections.iter().position(|s| x <= s.end)
    }

    /// Jet map across the whole section `k`.
    pub fn jet_map(&self, k: usize) -> &DMatrix<f64> {
        &self.jet_maps[k]
    }

    /// Jet map from the start of section `k` to offset `s` inside it.
    pub fn jet_propagator(&self, k: usize, s: f64) -> DMatrix<f64> {
        self.sections[k].fam.derivative_matrix(s, self.n()) * &self.taylor_inv[k]
    }

    /// Product of jet maps: jets at `a` to jets at `b`.
    pub fn total_jet_map(&self) -> DMatrix<f64> {
        let mut p = DMatrix::identity(self.dim(), self.dim());
        for m in &self.jet_maps {
            p = m * p;
        }
        p
    }

    /// Jets (columns of `y`) carried from `a` to every knot `t_0..t_{q+1}`.
    pub fn knot_jets(&self, y: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(self.sections.len() + 1);
        let mut cur = y.clone();
        out.push(cur.clone());
        for m in &self.jet_maps {
            cur = m * cur;
            out.push(cur.clone());
        }
        out
    }

    /// Local family coefficients (origin at the section start) of the member
    /// whose jet at `t_k` is `y`.
    pub fn local_coeffs(&self, k: usize, y: &DVector<f64>) -> CoefVec {
        &self.taylor_inv[k] * y
    }

    /// Derivatives `0..=max_order` at `x` of the member with jet `y_a` at `a`.
    pub fn eval_jet(&self, y_a: &DVector<f64>, x: f64, max_order: usize) -> Result<Vec<f64>> {
        let k = self.section_of(x).ok_or(Error::OutOfDomain(x))?;
        let mut y = y_a.clone();
        for m in &self.jet_maps[..k] {
            y = m * y;
        }
        let c = self.local_coeffs(k, &y);
        eval_derivatives(
            &self.sections[k].fam,
            &c,
            x - self.sections[k].start,
            max_order,
        )
    }

    /// Derivatives `0..=n` at `x` of the basis whose jets at `a` are the unit
    /// vectors (rows: order, columns: basis index).
    pub fn jet_matrix_at(&self, x: f64) -> Result<DMatrix<f64>> {
        let k = self.section_of(x).ok_or(Error::OutOfDomain(x))?;
        let mut p = DMatrix::identity(self.dim(), self.dim());
        for m in &self.jet_maps[..k] {
            p = m * p;
        }
        Ok(self.jet_propagator(k, x - self.sections[k].start) * p)
    }

    /// Row-normalised Wronskian determinant of a basis at `x`; nonzero on a
    /// W-space.
    pub fn wronskian_ratio_at(&self, x: f64) -> Result<f64> {
        Ok(hadamard_ratio(&self.jet_matrix_at(x)?))
    }

    fn section_derivatives(&self, k: usize, x: f64) -> DMatrix<f64> {
        let s = &self.sections[k];
        s.fam.derivative_matrix(x - s.origin, self.n())
    }
}

/// A member of a piecewise space, stored by its section-0 coefficients.
/// Coefficients on later sections are propagated lazily through the
/// transfer maps and cached.
#[derive(Debug, Clone)]
pub struct GlobalMember {
    c0: CoefVec,
    cache: OnceCell<Vec<CoefVec>>,
}

impl GlobalMember {
    pub fn new(c0: CoefVec) -> Self {
        Self {
            c0,
            cache: OnceCell::new(),
        }
    }

    /// Member with jet `y_a` at the left end of the space.
    pub fn from_jet(sp: &PiecewiseSpace, y_a: &DVector<f64>) -> Result<Self> {
        let m = sp.section_derivatives(0, sp.a());
        let c0 = m.lu().solve(y_a).ok_or(Error::SingularExpansion(0))?;
        Ok(Self::new(c0))
    }

    pub fn c0(&self) -> &CoefVec {
        &self.c0
    }

    pub fn jet_at_a(&self, sp: &PiecewiseSpace) -> DVector<f64> {
        sp.section_derivatives(0, sp.a()) * &self.c0
    }

    fn coeffs(&self, sp: &PiecewiseSpace) -> &[CoefVec] {
        self.cache.get_or_init(|| {
            let mut out = vec![self.c0.clone()];
            for t in sp.transfers() {
                let next = t * out.last().unwrap();
                out.push(next);
            }
            out
        })
    }
}

/// Derivative of order `order <= n` of a member at `x`.
pub fn eval_member(sp: &PiecewiseSpace, m: &GlobalMember, x: f64, order: usize) -> Result<f64> {
    if order > sp.n() {
        return Err(Error::OrderTooHigh {
            requested: order,
            cap: sp.n(),
        });
    }
    let k = sp.section_of(x).ok_or(Error::OutOfDomain(x))?;
    let s = &sp.sections[k];
    let c = &m.coeffs(sp)[k];
    Ok(eval_derivatives(&s.fam, c, x - s.origin, order)?[order])
}

/// Same as [`eval_member`] but evaluated from the section on the right of a
/// knot; used to check continuity.
pub fn eval_member_right(
    sp: &PiecewiseSpace,
    m: &GlobalMember,
    knot: usize,
    order: usize,
) -> Result<f64> {
    let s = &sp.sections[knot];
    let c = &m.coeffs(sp)[knot];
    Ok(eval_derivatives(&s.fam, c, s.start - s.origin, order)?[order])
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::{Root, RootSet};

    fn trig() -> FamilyBasis {
        build_family(&RootSet::new(vec![Root::new(0.0, 1.0, 1)]).unwrap())
    }

    fn cyc(n: usize, hyperbolic: bool) -> FamilyBasis {
        let mut e = vec![];
        if n >= 2 {
            e.push(Root::new(0.0, 0.0, n - 1));
        }
        if hyperbolic {
            e.push(Root::new(-1.0, 0.0, 1));
            e.push(Root::new(1.0, 0.0, 1));
        } else {
            e.push(Root::new(0.0, 1.0, 1));
        }
        build_family(&RootSet::new(e).unwrap())
    }

    #[test]
    fn uniform_has_identity_transfers() {
        let p = CharPoly::new(vec![1.0, 0.0]).unwrap();
        let sp = PiecewiseSpace::make_uniform(&p, 0.0, &[1.0], 2.0).unwrap();
        assert_eq!(sp.sections().len(), 2);
        assert_eq!(sp.transfers()[0], DMatrix::identity(2, 2));

        let p3 = CharPoly::new(vec![0.0, 1.0, 0.0]).unwrap();
        let l0 = 2.9;
        let sp3 = PiecewiseSpace::make_uniform(&p3, 0.0, &[l0, 2.0 * l0], 3.0 * l0).unwrap();
        assert_eq!(sp3.sections().len(), 3);
        assert!(sp3
            .transfers()
            .iter()
            .all(|t| *t == DMatrix::identity(3, 3)));

        let single = PiecewiseSpace::make_uniform(&p, 0.0, &[], 1.0).unwrap();
        assert_eq!(single.q(), 0);
        assert!(single.transfers().is_empty());
    }

    #[test]
    fn bad_knots_rejected() {
        let p = CharPoly::new(vec![1.0, 0.0]).unwrap();
        assert!(PiecewiseSpace::make_uniform(&p, 0.0, &[1.5, 1.0], 2.0).is_err());
        assert!(PiecewiseSpace::make_uniform(&p, 0.0, &[2.0], 2.0).is_err());
    }

    #[test]
    fn spliced_trig_hyperbolic_matches_taylor_data() {
        let sp =
            PiecewiseSpace::spliced(0.0, &[(cyc(1, false), 2.5), (cyc(1, true), 1.0)]).unwrap();
        assert_eq!(sp.transfers().len(), 1);
        // member with F(t1) = 1, F'(t1) = 0 built from Taylor data at t1
        let t1 = 2.5;
        let m_left = trig().derivative_matrix(t1, 1);
        let c0 = m_left
            .lu()
            .solve(&DVector::from_vec(vec![1.0, 0.0]))
            .unwrap();
        let m = GlobalMember::new(c0);
        for order in 0..=1 {
            let l = eval_member(&sp, &m, t1, order).unwrap();
            let r = eval_member_right(&sp, &m, 1, order).unwrap();
            assert!(
                (l - r).abs() <= 1e-9 * (1.0 + l.abs()),
                "order {order}: {l} vs {r}"
            );
        }
        assert!((eval_member(&sp, &m, t1, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hth_splice_has_two_transfers() {
        let sp = PiecewiseSpace::spliced(
            0.0,
            &[
                (cyc(8, true), 2.0),
                (cyc(8, false), 3.14),
                (cyc(8, true), 2.0),
            ],
        )
        .unwrap();
        assert_eq!(sp.sections().len(), 3);
        assert_eq!(sp.transfers().len(), 2);
        assert_eq!(sp.dim(), 9);
    }

    #[test]
    fn order_above_n_is_refused() {
        let p = CharPoly::new(vec![1.0, 0.0]).unwrap();
        let sp = PiecewiseSpace::make_uniform(&p, 0.0, &[1.0], 2.0).unwrap();
        let m = GlobalMember::new(DVector::from_vec(vec![1.0, 0.0]));
        assert!(eval_member(&sp, &m, 0.5, 2).is_err());
        assert!(matches!(
            eval_member(&sp, &m, 2.5, 0),
            Err(Error::OutOfDomain(_))
        ));
        // cos seen from both sides of the knot
        let l = eval_member(&sp, &m, 1.0, 0).unwrap();
        let r = eval_member_right(&sp, &m, 1, 0).unwrap();
        assert!((l - r).abs() < 1e-12 && (l - 1f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn uniform_eval_equals_family_eval() {
        let fam = cyc(4, false);
        let sp = PiecewiseSpace::uniform(&fam, 0.0, &[1.0, 2.5], 4.0).unwrap();
        let c = DVector::from_vec(vec![0.3, -1.0, 0.5, 2.0, -0.7]);
        let m = GlobalMember::new(c.clone());
        for i in 0..=40 {
            let x = 4.0 * i as f64 / 40.0;
            for order in 0..=4 {
                let direct = eval_derivatives(&fam, &c, x, order).unwrap()[order];
                let via = eval_member(&sp, &m, x, order).unwrap();
                assert!((direct - via).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }
    }

    #[test]
    fn jets_and_members_agree_on_spliced_space() {
        let sp = PiecewiseSpace::spliced(
            0.0,
            &[
                (cyc(3, false), 1.5),
                (cyc(3, true), 1.0),
                (cyc(3, false), 0.7),
            ],
        )
        .unwrap();
        let y = DVector::from_vec(vec![0.2, -0.4, 1.0, 0.3]);
        let m = GlobalMember::from_jet(&sp, &y).unwrap();
        for i in 0..=32 {
            let x = sp.b() * i as f64 / 32.0;
            let d = sp.eval_jet(&y, x, 3).unwrap();
            for (order, dv) in d.iter().enumerate() {
                let v = eval_member(&sp, &m, x, order).unwrap();
                assert!(
                    (v - dv).abs() <= 1e-9 * (1.0 + v.abs()),
                    "x {x} order {order}"
                );
            }
        }
        // continuity at both knots
        for knot in 1..=2 {
            let x = sp.knots()[knot];
            for order in 0..=3 {
                let l = eval_member(&sp, &m, x, order).unwrap();
                let r = eval_member_right(&sp, &m, knot, order).unwrap();
                assert!((l - r).abs() <= 1e-9 * (1.0 + l.abs()));
            }
        }
    }

    #[test]
    fn w_space_sanity() {
        let sp =
            PiecewiseSpace::spliced(0.0, &[(cyc(4, false), 3.0), (cyc(4, true), 2.0)]).unwrap();
        for i in 0..=20 {
            let x = sp.b() * i as f64 / 20.0;
            assert!(sp.wronskian_ratio_at(x).unwrap() > 1e-12);
        }
    }
}
