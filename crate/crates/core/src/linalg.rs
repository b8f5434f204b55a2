//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// |det(m)| divided by the product of its row norms, in [0, 1].
pub(crate) fn hadamard_ratio(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let mut denom = 1.0;
    for r in m.row_iter() {
        let nr = r.norm();
        if nr == 0.0 {
            return 0.0;
        }
        denom *= nr;
    }
    (m.clone().lu().determinant() / denom).abs()
}

/// Signed determinant normalised by row norms.
pub(crate) fn signed_hadamard(m: &DMatrix<f64>) -> f64 {
    let mut denom = 1.0;
    for r in m.row_iter() {
        let nr = r.norm();
        if nr == 0.0 {
            return 0.0;
        }
        denom *= nr;
    }
    m.clone().lu().determinant() / denom
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// 2-norm condition number; infinite when singular.
pub(crate) fn cond2(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Unit vector spanning the null space of a wide `rows x (rows+1)` matrix.
/// Rows are normalised first. Returns the vector and the ratio of the
/// smallest non-null singular value to the largest one.
pub(crate) fn null_vector(a: &DMatrix<f64>) -> (DVector<f64>, f64) {
    let cols = a.ncols();
    let mut sq = DMatrix::<f64>::zeros(cols, cols);
    for (i, row) in a.row_iter().enumerate().take(cols - 1) {
        let nr = row.norm();
        let scale = if nr > 0.0 { 1.0 / nr } else { 0.0 };
        for j in 0..cols {
            sq[(i, j)] = row[j] * scale;
        }
    }
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let sv = &svd.singular_values;
    let mut idx: Vec<usize> = (0..cols).collect();
    idx.sort_by(|&x, &y| {
        sv[x]
            .partial_cmp(&sv[y])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let null = v_t.row(idx[0]).transpose();
    let gap = if cols >= 2 {
        let max = sv[idx[cols - 1]];
        if max > 0.0 {
            sv[idx[1]] / max
        } else {
            0.0
        }
    } else {
        1.0
    };
    (null, gap)
}

pub(crate) fn solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().lu().solve(rhs)
}

pub(crate) fn inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().lu().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_vector_of_simple_row() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let (v, gap) = null_vector(&a);
        assert!((v[0] - v[1]).abs() < 1e-14);
        assert!((v.norm() - 1.0).abs() < 1e-14);
        assert!(gap > 0.5);
    }

    #[test]
    fn hadamard_ratio_bounds() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        assert!((hadamard_ratio(&m) - 1.0).abs() < 1e-15);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(hadamard_ratio(&s) < 1e-15);
    }
}
