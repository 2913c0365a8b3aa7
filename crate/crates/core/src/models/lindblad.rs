//! Liouvillian superoperators on column-stacked density matrices,
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use crate::error::{Error, Result};
use crate::quantum::layout::{tensor_embed, SubsystemLayout};
use crate::quantum::ops::{ensure_hermitian, sigma_minus, sigma_plus};
use crate::quantum::propagator::{expm, HERMITIAN_TOL};
use crate::scalar::{cr, CMatrix, Real, C};

/// `-i[H, ·]`.
pub fn hamiltonian_superop<T: Real>(h: &CMatrix<T>) -> CMatrix<T> {
    let n = h.nrows();
    let id = CMatrix::<T>::identity(n, n);
    let i = C::new(T::zero(), T::one());
    (id.kronecker(h) - h.transpose().kronecker(&id)) * (-i)
}

/// `D[O]ρ = OρO† - ½{O†O, ρ}`.
pub fn dissipator<T: Real>(o: &CMatrix<T>) -> CMatrix<T> {
    let n = o.nrows();
    let id = CMatrix::<T>::identity(n, n);
    let odo = o.adjoint() * o;
    let half = cr(T::lit(0.5));
    o.map(|z| z.conj()).kronecker(o) - id.kronecker(&odo) * half - odo.transpose().kronecker(&id) * half
}

/// Liouvillian of `-i[H,ρ] + κ Σ_i [(1+n_th) D[σ⁻_i] + n_th D[σ⁺_i]]` over
/// every two-level site of `layout`.
pub fn build_lindblad_superop<T: Real>(
    h: &CMatrix<T>,
    kappa: T,
    n_th: T,
    layout: &SubsystemLayout,
) -> Result<CMatrix<T>> {
    ensure_hermitian(h, T::lit(HERMITIAN_TOL))?;
    if kappa < T::zero() || !kappa.is_finite() {
        return Err(Error::param("kappa", "decay rate must be finite and non-negative"));
    }
    if n_th < T::zero() || !n_th.is_finite() {
        return Err(Error::param("n_th", "bath occupation must be finite and non-negative"));
    }
    if h.nrows() != layout.dim() {
        return Err(Error::Dimension(format!(
            "Hamiltonian dimension {} vs layout {}",
            h.nrows(),
            layout.dim()
        )));
    }
    let mut l = hamiltonian_superop(h);
    if kappa > T::zero() {
        let down = cr(kappa * (T::one() + n_th));
        let up = cr(kappa * n_th);
        for site in 0..layout.num_sites() {
            if layout.local_dims()[site] != 2 {
                return Err(Error::Dimension(format!("site {site} is not a two-level system")));
            }
            let sm = tensor_embed(&sigma_minus::<T>(), site, layout)?;
            l += dissipator(&sm) * down;
            if n_th > T::zero() {
                let sp = tensor_embed(&sigma_plus::<T>(), site, layout)?;
                l += dissipator(&sp) * up;
            }
        }
    }
    Ok(l)
}

/// `exp(τ L)`.
pub fn lindblad_propagator<T: Real>(l: &CMatrix<T>, tau: T) -> Result<CMatrix<T>> {
    let n = l.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if !l.is_square() || d * d != n {
        return Err(Error::Dimension(format!(
            "superoperator must be square with a square dimension, got {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    expm(&(l * cr(tau)))
}

pub fn vectorize<T: Real>(rho: &CMatrix<T>) -> CMatrix<T> {
    CMatrix::from_column_slice(rho.len(), 1, rho.as_slice())
}

pub fn unvectorize<T: Real>(v: &CMatrix<T>, dim: usize) -> CMatrix<T> {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}
