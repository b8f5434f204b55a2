//! Operators shared by the benchmarks.

use eclen::CharPoly;

/// `x^{n-1}(x^2 + 1)`, whose kernel is `1, x, ..., x^{n-2}, cos, sin`.
pub fn cycloidal(n: usize) -> CharPoly {
    let mut c = vec![0.0; n + 1];
    c[n - 1] = 1.0;
    CharPoly::new(c).expect("valid polynomial")
}

/// `(x^2 - 1)(x^2 + b^2)`.
pub fn hyperbolic_trig(b: f64) -> CharPoly {
    CharPoly::new(vec![-b * b, 0.0, b * b - 1.0, 0.0]).expect("valid polynomial")
}
