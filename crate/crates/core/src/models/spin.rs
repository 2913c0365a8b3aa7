//! Open spin-1/2 chains. `|0>` is spin up (`σ_z = +1`), `|1>` spin down.

use crate::error::{Error, Result};
use crate::quantum::layout::{tensor_embed, SubsystemLayout};
use crate::quantum::ops::{pauli_x, pauli_y, pauli_z};
use crate::scalar::{cr, CMatrix, Real};

fn check_chain(n: usize) -> Result<SubsystemLayout> {
    if n < 2 {
        return Err(Error::param("n", format!("chain needs at least 2 sites, got {n}")));
    }
    Ok(SubsystemLayout::qubits(n))
}

fn bond<T: Real>(op: &CMatrix<T>, j: usize, layout: &SubsystemLayout) -> CMatrix<T> {
    let a = tensor_embed(op, j, layout).expect("site in range");
    let b = tensor_embed(op, j + 1, layout).expect("site in range");
    a * b
}

/// `H = -J Σ_j σ_j·σ_{j+1} + B σ_1^x` (field on the first site only).
pub fn build_heisenberg<T: Real>(n: usize, j: T, b: T) -> Result<CMatrix<T>> {
    let layout = check_chain(n)?;
    let dim = layout.dim();
    let mut h = CMatrix::<T>::zeros(dim, dim);
    let paulis = [pauli_x::<T>(), pauli_y::<T>(), pauli_z::<T>()];
    for site in 0..n - 1 {
        for p in &paulis {
            h -= bond(p, site, &layout) * cr(j);
        }
    }
    h += tensor_embed(&pauli_x::<T>(), 0, &layout)? * cr(b);
    Ok(h)
}

/// `H = -J Σ_j σ^z_j σ^z_{j+1} + B Σ_j σ^x_j`.
pub fn build_ising<T: Real>(n: usize, j: T, b: T) -> Result<CMatrix<T>> {
    let layout = check_chain(n)?;
    let dim = layout.dim();
    let mut h = CMatrix::<T>::zeros(dim, dim);
    let z = pauli_z::<T>();
    let x = pauli_x::<T>();
    for site in 0..n - 1 {
        h -= bond(&z, site, &layout) * cr(j);
    }
    for site in 0..n {
        h += tensor_embed(&x, site, &layout)? * cr(b);
    }
    Ok(h)
}

/// Total magnetisation `Σ_j σ^z_j`.
pub fn total_sigma_z<T: Real>(n: usize) -> CMatrix<T> {
    let layout = SubsystemLayout::qubits(n);
    let z = pauli_z::<T>();
    (0..n).fold(CMatrix::zeros(layout.dim(), layout.dim()), |acc, s| {
        acc + tensor_embed(&z, s, &layout).expect("site in range")
    })
}

/// Index of `|↓>^{⊗n}`.
pub fn all_down_index(n: usize) -> usize {
    (1usize << n) - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ops::{commutator, hermiticity_defect};
    use nalgebra::SymmetricEigen;

    fn sorted_spectrum(h: &CMatrix<f64>) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn heisenberg_pair_spectrum() {
        let h = build_heisenberg::<f64>(2, 1.0, 0.0).unwrap();
        let e = sorted_spectrum(&h);
        for (got, want) in e.iter().zip([-1.0, -1.0, -1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{e:?}");
        }
        assert!(commutator(&h, &total_sigma_z(2)).norm() < 1e-14);
    }

    #[test]
    fn heisenberg_four_sites_hermitian_traceless() {
        let h = build_heisenberg::<f64>(4, 1.0, 0.5).unwrap();
        assert_eq!(h.nrows(), 16);
        assert!(hermiticity_defect(&h) < 1e-12);
        assert!(h.trace().norm() < 1e-12);
    }

    #[test]
    fn ising_pair_spectrum_and_structure() {
        let h = build_ising::<f64>(2, 1.0, 0.0).unwrap();
        let e = sorted_spectrum(&h);
        for (got, want) in e.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(h[(r, c)].norm(), 0.0);
                }
            }
        }
        let h3 = build_ising::<f64>(3, 1.0, 1.0).unwrap();
        assert!(hermiticity_defect(&h3) < 1e-12);
        assert!(h3.trace().norm() < 1e-12);
    }

    #[test]
    fn short_chains_rejected() {
        assert!(build_heisenberg::<f64>(1, 1.0, 0.0).is_err());
        assert!(build_ising::<f64>(1, 1.0, 0.0).is_err());
    }
}
