//! Critical lengths of kernels of linear differential operators with
//! constant real coefficients.
//!
//! The crate decides whether a piecewise-assembled space of
//! exponential-polynomial functions is an Extended Chebyshev (EC) space on a
//! closed bounded interval. The decision is made by propagating positivity
//! of local expansion coefficients of a global Bernstein-like basis through
//! successive generalised derivatives. On top of that test sit the
//! critical-length search (rough estimate followed by dichotomy), the
//! design-side byproducts (Bernstein bases, weight systems, integral
//! recurrences) and a handful of independent oracles.
//!
//! ```
//! use eclen::{critical_length, CharPoly, CritLenConfig};
//!
//! // kernel of D^2 + 1 is spanned by cos and sin: critical length pi
//! let p = CharPoly::new(vec![1.0, 0.0]).unwrap();
//! let res = critical_length(&p, &CritLenConfig::default()).unwrap();
//! assert!((res.value.unwrap() - std::f64::consts::PI).abs() < 1e-7);
//! ```

pub mod bernlike;
pub mod critlen;
pub mod design;
pub mod ectest;
mod error;
pub mod expfam;
pub mod jet;
mod linalg;
pub mod oracles;
pub mod space;

pub use bernlike::{BasisCoords, BernsteinLikeBasis, GammaTensor};
pub use critlen::{
    critical_length, critical_length_for_design, critical_length_roots, max_imag, CritLenConfig,
    CriticalLengthResult, LengthStatus, Probe,
};
pub use design::{
    bernstein_basis, bernstein_basis_piecewise, derived_basis, eval_curve, expand_unity, irr_check,
    transition_functions, weight_system, NormalizedBasis, WeightSystem,
};
pub use ectest::{ec_test, ECTestConfig, ECTestReport, Failure, Verdict};
pub use error::{Error, Result};
pub use expfam::{
    build_family, find_roots, CharPoly, CoefVec, FamilyBasis, Root, RootSet, TermKind,
    DEFAULT_CLUSTER_TOL,
};
pub use oracles::{
    bessel_first_zero, brute_force_ec, solve_closed_form, wronskian_min, wronskian_scan,
    ClosedForm, Method, OracleValue,
};
pub use space::{GlobalMember, Operator, PiecewiseSpace, Section};
