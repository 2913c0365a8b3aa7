//! Small dense operators and matrix utilities.

use crate::error::{Error, Result};
use crate::scalar::{c, cabs, cr, CMatrix, Real, C};

pub fn pauli_x<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Raising operator `|0><1|` (`|0>` is spin up / excited).
pub fn sigma_plus<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
}

/// Lowering operator `|1><0|`.
pub fn sigma_minus<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Computational-basis projector `|k><k|` of dimension `dim`.
pub fn projector<T: Real>(dim: usize, k: usize) -> CMatrix<T> {
    let mut m = CMatrix::zeros(dim, dim);
    m[(k, k)] = c(1.0, 0.0);
    m
}

/// Truncated bosonic annihilation operator on `n_levels` Fock states.
pub fn annihilation<T: Real>(n_levels: usize) -> CMatrix<T> {
    let mut a = CMatrix::zeros(n_levels, n_levels);
    for m in 1..n_levels {
        a[(m - 1, m)] = cr(T::lit(m as f64).sqrt());
    }
    a
}

pub fn dagger<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.adjoint()
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| cabs(*x - *y))
        .fold(T::zero(), |acc, v| acc.max(v))
}

/// `max |A - A†|`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max(cabs(m[(i, j)] - m[(j, i)].conj()));
        }
    }
    worst
}

pub fn ensure_hermitian<T: Real>(m: &CMatrix<T>, tol: T) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect(m);
    if defect > tol || !defect.is_finite() {
        return Err(Error::NotHermitian(defect.to_f64_lossy()));
    }
    Ok(())
}

/// `max |U†U - I|`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// `a * b` as four real products, which nalgebra routes to its blocked real kernel.
pub fn cmatmul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.ncols(), b.nrows(), "cmatmul dimension mismatch");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, C::new)
}

/// Ratio `s2 / s1` of the two largest singular values.
///
/// A 1x1 or rank-deficient input returns 0 for the missing second value.
pub fn singular_ratio<T: Real>(m: &CMatrix<T>) -> Result<T> {
    if m.iter().all(|z| z.norm_sqr() == T::zero()) {
        return Err(Error::Numerical("singular ratio of the zero matrix".into()));
    }
    let mut s: Vec<T> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let s1 = s[0];
    let s2 = s.get(1).copied().unwrap_or_else(T::zero);
    Ok((s2 / s1).min(T::one()).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;
    use proptest::prelude::*;

    #[test]
    fn singular_ratio_examples() {
        // |0><+|
        let s = 1.0 / 2f64.sqrt();
        let m = CMatrix::<f64>::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(singular_ratio(&m).unwrap() < 1e-15);
        assert!((singular_ratio(&CMatrix::<f64>::identity(4, 4)).unwrap() - 1.0).abs() < 1e-15);
        let d = CMatrix::<f64>::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((singular_ratio(&d).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn split_product_matches_complex_product() {
        let a = CMatrix::<f64>::from_fn(5, 3, |i, j| c(i as f64 - 0.5 * j as f64, 0.25 * (i * j) as f64 - 1.0));
        let b = CMatrix::<f64>::from_fn(3, 4, |i, j| c(0.1 * j as f64, i as f64 - j as f64));
        assert!((cmatmul(&a, &b) - &a * &b).norm() < 1e-12);
    }

    #[test]
    fn singular_ratio_rejects_zero() {
        assert!(singular_ratio(&CMatrix::<f64>::zeros(3, 3)).is_err());
    }

    #[test]
    fn pauli_algebra() {
        let i = C::<f64>::new(0.0, 1.0);
        let xy = pauli_x::<f64>() * pauli_y::<f64>();
        assert!(max_abs_diff(&xy, &(pauli_z::<f64>() * i)) < 1e-15);
        assert!(max_abs_diff(&(sigma_plus::<f64>() + sigma_minus::<f64>()), &pauli_x()) < 1e-15);
    }

    #[test]
    fn annihilation_matrix_elements() {
        let a = annihilation::<f64>(4);
        assert!((a[(2, 3)].re - 3f64.sqrt()).abs() < 1e-15);
        let n = a.adjoint() * &a;
        for m in 0..4 {
            assert!((n[(m, m)].re - m as f64).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn singular_ratio_is_scale_invariant(
            entries in proptest::collection::vec(-1.0f64..1.0, 18),
            re in 0.1f64..10.0,
            im in -10.0f64..10.0,
        ) {
            let m = CMatrix::<f64>::from_fn(3, 3, |r, k| c(entries[2 * (3 * r + k)], entries[2 * (3 * r + k) + 1]));
            prop_assume!(m.norm() > 1e-3);
            let scaled = &m * C::new(re, im);
            let a = singular_ratio(&m).unwrap();
            let b = singular_ratio(&scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
