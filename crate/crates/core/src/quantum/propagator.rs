//! Time-evolution operators: spectral propagators for Hermitian generators
//! and a Padé scaling-and-squaring exponential for general (Liouvillian) ones.

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::quantum::ops::ensure_hermitian;
use crate::scalar::{cabs, cis, CMatrix, Real, C};

/// Hermiticity tolerance for propagator inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigendecomposition `H = V Λ V†` kept so that `exp(-iτH)` can be formed
/// for any `τ` without re-diagonalising.
#[derive(Debug, Clone)]
pub struct SpectralPropagator<T: Real> {
    eigenvalues: DVector<T>,
    eigenvectors: CMatrix<T>,
}

impl<T: Real> SpectralPropagator<T> {
    pub fn new(h: &CMatrix<T>) -> Result<Self> {
        ensure_hermitian(h, T::lit(HERMITIAN_TOL))?;
        // symmetrise so the eigensolver sees an exactly Hermitian input
        let sym = (h + h.adjoint()) * C::new(T::lit(0.5), T::zero());
        let eig = SymmetricEigen::new(sym);
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix<T> {
        &self.eigenvectors
    }

    /// `exp(-i τ H)`.
    pub fn unitary(&self, tau: T) -> CMatrix<T> {
        let phases = self
            .eigenvalues
            .map(|e| cis(-(tau * e)));
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Applies a real function to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C::new(f(self.eigenvalues[j]), T::zero());
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// `exp(-iτH)` for Hermitian `H`.
pub fn unitary_propagator<T: Real>(h: &CMatrix<T>, tau: T) -> Result<CMatrix<T>> {
    Ok(SpectralPropagator::new(h)?.unitary(tau))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm<T: Real>(a: &CMatrix<T>) -> T {
    a.column_iter()
        .map(|col| col.iter().fold(T::zero(), |s, z| s + cabs(*z)))
        .fold(T::zero(), |m, v| m.max(v))
}

/// Matrix exponential `exp(A)` by scaling and squaring with a degree-13
/// Padé approximant.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expm needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = one_norm(a).to_f64_lossy();
    if !norm.is_finite() {
        return Err(Error::Numerical("expm of a non-finite matrix".into()));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scale = C::new(T::lit(0.5f64.powi(squarings as i32)), T::zero());
    let a = a * scale;

    let b = |k: usize| C::new(T::lit(PADE13[k]), T::zero());
    let ident = CMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &ident * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &ident * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Numerical("singular Padé denominator in expm".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}
