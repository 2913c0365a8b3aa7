//! Resonant Jaynes–Cummings model on the layout `[atom, field]`.
//!
//! Atom basis: index 0 is `|e>`, index 1 is `|g>`, so `σ^z = diag(1, -1)`.

use crate::error::{Error, Result};
use crate::quantum::layout::SubsystemLayout;
use crate::quantum::ops::{annihilation, pauli_z, sigma_minus, sigma_plus};
use crate::quantum::state::ProbeState;
use crate::scalar::{cr, CMatrix, CVector, Real};

pub const EXCITED: usize = 0;
pub const GROUND: usize = 1;

/// Largest tolerated Poisson weight beyond the Fock cutoff.
pub const TRUNCATION_TOL: f64 = 1e-8;

pub fn jc_layout(n_max: usize) -> SubsystemLayout {
    SubsystemLayout::new(vec![2, n_max + 1]).expect("positive dims")
}

/// Default cutoff `ceil(α² + 6α + 10)`.
pub fn default_cutoff(alpha: f64) -> usize {
    let a = alpha.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

/// `H = ω a†a + (ω/2) σ^z + Ω (σ⁺a + σ⁻a†)` with ħ = 1.
pub fn build_jc<T: Real>(omega: T, coupling: T, n_max: usize) -> Result<CMatrix<T>> {
    if n_max < 1 {
        return Err(Error::param("n_max", "Fock cutoff must be at least 1"));
    }
    let levels = n_max + 1;
    let a = annihilation::<T>(levels);
    let ad = a.adjoint();
    let id_atom = CMatrix::<T>::identity(2, 2);
    let id_field = CMatrix::<T>::identity(levels, levels);
    let number = &ad * &a;
    let h = id_atom.kronecker(&number) * cr(omega)
        + pauli_z::<T>().kronecker(&id_field) * cr(omega * T::lit(0.5))
        + (sigma_plus::<T>().kronecker(&a) + sigma_minus::<T>().kronecker(&ad)) * cr(coupling);
    Ok(h)
}

/// Conserved excitation number `a†a + |e><e|`.
pub fn excitation_number<T: Real>(n_max: usize) -> CMatrix<T> {
    let levels = n_max + 1;
    let a = annihilation::<T>(levels);
    let mut excited = CMatrix::<T>::zeros(2, 2);
    excited[(EXCITED, EXCITED)] = cr(T::one());
    CMatrix::<T>::identity(2, 2).kronecker(&(a.adjoint() * &a))
        + excited.kronecker(&CMatrix::identity(levels, levels))
}

/// Poisson weight of the coherent state beyond the cutoff.
pub fn truncation_tail(alpha: f64, n_max: usize) -> f64 {
    let a2 = alpha * alpha;
    // log-space terms e^{-α²} α^{2m} / m!
    let log_term = |m: usize| -> f64 {
        let lf: f64 = (1..=m).map(|k| (k as f64).ln()).sum();
        if a2 == 0.0 {
            if m == 0 { 0.0 } else { f64::NEG_INFINITY }
        } else {
            -a2 + m as f64 * a2.ln() - lf
        }
    };
    let mut tail = 0.0;
    for m in (n_max + 1).. {
        let t = log_term(m).exp();
        tail += t;
        if m as f64 > a2 && (t == 0.0 || t <= tail * 1e-17) {
            break;
        }
    }
    tail
}

/// Truncated, renormalised field coherent state `|α>` (real α).
pub fn coherent_state<T: Real>(alpha: f64, n_max: usize) -> Result<CVector<T>> {
    let tail = truncation_tail(alpha, n_max);
    if tail >= TRUNCATION_TOL {
        return Err(Error::param(
            "n_max",
            format!("Fock cutoff {n_max} leaves weight {tail:e} beyond truncation for alpha = {alpha}"),
        ));
    }
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut c = (-alpha * alpha / 2.0).exp();
    for m in 0..=n_max {
        if m > 0 {
            c *= alpha / (m as f64).sqrt();
        }
        amps.push(c);
    }
    let norm = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(CVector::from_iterator(
        n_max + 1,
        amps.into_iter().map(|x| cr(T::lit(x / norm))),
    ))
}

/// `|atom> ⊗ |field>` on the `[2, n_max+1]` layout.
pub fn atom_field_state<T: Real>(atom: usize, field: &CVector<T>) -> ProbeState<T> {
    let mut a = CVector::<T>::zeros(2);
    a[atom] = cr(T::one());
    ProbeState::Pure(a.kronecker(field))
}

/// Fock state `|m>` of the truncated field.
pub fn fock_state<T: Real>(m: usize, n_max: usize) -> Result<CVector<T>> {
    if m > n_max {
        return Err(Error::param("photons", format!("Fock state {m} exceeds cutoff {n_max}")));
    }
    let mut v = CVector::zeros(n_max + 1);
    v[m] = cr(T::one());
    Ok(v)
}
