//! Truncated Taylor series at a point.
//!
//! A [`Jet`] of order `m` carries `f(x), f'(x), ..., f^{(m)}(x)` through
//! products, quotients and differentiation without any numerical
//! differencing. Quotients by positive weights and derivatives are exactly
//! the operations generalised derivatives are built from.

/// Taylor coefficients `f^{(k)}(x) / k!`, `k = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut fact = 1.0;
        let c = d
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    fact *= k as f64;
                }
                v / fact
            })
            .collect();
        Self { c }
    }

    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Self { c }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            c: vec![0.0; order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    fact *= k as f64;
                }
                v * fact
            })
            .collect()
    }

    pub fn add_assign(&mut self, other: &Jet) {
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += b;
        }
    }

    pub fn scaled(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let m = self.order().min(other.order());
        let mut c = vec![0.0; m + 1];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = (0..=k).map(|j| self.c[j] * other.c[k - j]).sum();
        }
        Jet { c }
    }

    /// Series quotient; `other.value()` must be nonzero.
    pub fn div(&self, other: &Jet) -> Jet {
        let m = self.order().min(other.order());
        let g0 = other.c[0];
        let mut q = vec![0.0; m + 1];
        for k in 0..=m {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= other.c[j] * q[k - j];
            }
            q[k] = s / g0;
        }
        Jet { c: q }
    }

    /// Derivative; the order drops by one. Order-0 jets differentiate to 0.
    pub fn derivative(&self) -> Jet {
        if self.c.len() <= 1 {
            return Jet { c: vec![0.0] };
        }
        Jet {
            c: (1..self.c.len()).map(|k| k as f64 * self.c[k]).collect(),
        }
    }

    pub fn truncated(&self, order: usize) -> Jet {
        Jet {
            c: self.c[..=order.min(self.order())].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_of_sin_by_cos_is_tan() {
        let x: f64 = 0.3;
        let s = Jet::from_derivatives(&[x.sin(), x.cos(), -x.sin(), -x.cos()]);
        let c = Jet::from_derivatives(&[x.cos(), -x.sin(), -x.cos(), x.sin()]);
        let t = s.div(&c).derivatives();
        let sec2 = 1.0 / (x.cos() * x.cos());
        assert!((t[0] - x.tan()).abs() < 1e-15);
        assert!((t[1] - sec2).abs() < 1e-14);
        assert!((t[2] - 2.0 * sec2 * x.tan()).abs() < 1e-13);
    }

    #[test]
    fn derivative_shifts() {
        let j = Jet::from_derivatives(&[1.0, 2.0, 3.0]);
        assert_eq!(j.derivative().derivatives(), vec![2.0, 3.0]);
        assert_eq!(
            j.derivative().derivative().derivative().derivatives(),
            vec![0.0]
        );
    }

    #[test]
    fn product_rule() {
        let f = Jet::from_derivatives(&[2.0, 1.0, 0.5]);
        let g = Jet::from_derivatives(&[3.0, -1.0, 4.0]);
        let p = f.mul(&g).derivatives();
        assert!((p[0] - 6.0).abs() < 1e-15);
        assert!((p[1] - (1.0 * 3.0 + 2.0 * -1.0)).abs() < 1e-15);
        assert!((p[2] - (0.5 * 3.0 + 2.0 * 1.0 * -1.0 + 2.0 * 4.0)).abs() < 1e-14);
    }
}
