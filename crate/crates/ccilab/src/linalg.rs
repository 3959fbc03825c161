//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// Trace norm as the sum of singular values.
pub fn trace_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let h = (m + m.adjoint()) * C64::from(0.5);
    let n = h.nrows();
    // nalgebra's QR iteration can return NaN on some zero-diagonal inputs;
    // a shift by a multiple of the identity sidesteps it.
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let mut eig = h.clone().symmetric_eigen();
    for k in [0.37, -0.61, 1.13] {
        if eig.eigenvalues.iter().all(|x| x.is_finite()) {
            break;
        }
        let shift = k * scale;
        eig = (&h + DMatrix::<C64>::identity(n, n) * C64::from(shift)).symmetric_eigen();
        eig.eigenvalues.add_scalar_mut(-shift);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

/// Kronecker product of a 2x2 label operator with a field operator.
pub fn kron2(a: &Matrix2<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let k = b.nrows();
    DMatrix::from_fn(2 * k, 2 * k, |r, col| a[(r / k, col / k)] * b[(r % k, col % k)])
}

pub fn outer(u: &DVector<C64>, v: &DVector<C64>) -> DMatrix<C64> {
    u * v.adjoint()
}

/// Hermitian square root of a positive semidefinite matrix.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| C64::from(x.max(0.0).sqrt())),
    ));
    &vecs * d * vecs.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_norm_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(-2.0, 0.0), c(0.5, 0.0)]));
        assert!((trace_norm(&m) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(vals[0], 0.0), c(vals[1], 0.0)]));
        assert!(max_abs_diff(&(&vecs * d * vecs.adjoint()), &m) < 1e-12);
    }

    #[test]
    fn kron_places_blocks() {
        let a = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let b = DMatrix::from_element(2, 2, c(3.0, 0.0));
        let k = kron2(&a, &b);
        assert_eq!(k[(0, 2)], c(3.0, 0.0));
        assert_eq!(k[(2, 0)], c(0.0, 0.0));
    }
}
