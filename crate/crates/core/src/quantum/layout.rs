//! Tensor-product structure of the probe Hilbert space.
//!
//! Site 0 is the leftmost Kronecker factor, so for `[2, 2]` the basis order is
//! `|00>, |01>, |10>, |11>` and an operator at site 1 embeds as `I ⊗ op`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real, C};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    local_dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        if local_dims.is_empty() || local_dims.contains(&0) {
            return Err(Error::param(
                "local_dims",
                "layout needs at least one factor and every factor must be positive",
            ));
        }
        Ok(Self { local_dims })
    }

    /// `n` two-level sites.
    pub fn qubits(n: usize) -> Self {
        Self {
            local_dims: vec![2; n.max(1)],
        }
    }

    /// A single undivided factor of dimension `dim`.
    pub fn single(dim: usize) -> Self {
        Self {
            local_dims: vec![dim.max(1)],
        }
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn num_sites(&self) -> usize {
        self.local_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn local_dim(&self, site: usize) -> Result<usize> {
        self.local_dims.get(site).copied().ok_or_else(|| {
            Error::OutOfRange(format!(
                "site {site} in a layout with {} sites",
                self.local_dims.len()
            ))
        })
    }

    /// Distance in the flattened index between consecutive values of `site`.
    pub fn stride(&self, site: usize) -> usize {
        self.local_dims[site + 1..].iter().product()
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// Embeds a local operator at `site`, identity on every other factor.
pub fn tensor_embed<T: Real>(
    op: &CMatrix<T>,
    site: usize,
    layout: &SubsystemLayout,
) -> Result<CMatrix<T>> {
    let d = layout.local_dim(site)?;
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::Dimension(format!(
            "operator is {}x{} but site {site} has dimension {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    let left: usize = layout.local_dims()[..site].iter().product();
    let right = layout.stride(site);
    let out = kron(
        &kron(&CMatrix::<T>::identity(left, left), op),
        &CMatrix::<T>::identity(right, right),
    );
    Ok(out)
}

/// Applies a local operator to a state vector in place, `O(dim · d)` work.
///
/// `scratch` must hold at least `d` entries.
pub(crate) fn apply_local_vec<T: Real>(
    op: &CMatrix<T>,
    site: usize,
    layout: &SubsystemLayout,
    data: &mut [C<T>],
    scratch: &mut Vec<C<T>>,
) {
    let d = layout.local_dims()[site];
    let stride = layout.stride(site);
    let block = d * stride;
    scratch.resize(d, C::new(T::zero(), T::zero()));
    for base in (0..data.len()).step_by(block) {
        for inner in 0..stride {
            let off = base + inner;
            for k in 0..d {
                scratch[k] = data[off + k * stride];
            }
            for r in 0..d {
                let mut acc = C::new(T::zero(), T::zero());
                for k in 0..d {
                    acc += op[(r, k)] * scratch[k];
                }
                data[off + r * stride] = acc;
            }
        }
    }
}

/// `rho ← O rho O†` for a local operator `O`.
pub(crate) fn conjugate_local_mat<T: Real>(
    op: &CMatrix<T>,
    site: usize,
    layout: &SubsystemLayout,
    rho: &mut CMatrix<T>,
) {
    let mut scratch = Vec::new();
    let n = rho.nrows();
    // columns: rho ← O rho
    for j in 0..n {
        let col = rho.column_mut(j);
        let slice = col.data.into_slice_mut();
        apply_local_vec(op, site, layout, slice, &mut scratch);
    }
    // rows: rho ← rho O†, i.e. (O rho†)† on the transposed layout
    let op_conj: CMatrix<T> = op.map(|z| z.conj());
    let mut t = rho.transpose();
    for j in 0..n {
        let col = t.column_mut(j);
        let slice = col.data.into_slice_mut();
        apply_local_vec(&op_conj, site, layout, slice, &mut scratch);
    }
    *rho = t.transpose();
}

/// Partial trace keeping only `site`.
pub fn reduce_to_site<T: Real>(
    rho: &CMatrix<T>,
    site: usize,
    layout: &SubsystemLayout,
) -> Result<CMatrix<T>> {
    let d = layout.local_dim(site)?;
    if rho.nrows() != layout.dim() || rho.ncols() != layout.dim() {
        return Err(Error::Dimension(format!(
            "density matrix is {}x{}, layout dimension {}",
            rho.nrows(),
            rho.ncols(),
            layout.dim()
        )));
    }
    let stride = layout.stride(site);
    let block = d * stride;
    let mut out = DMatrix::from_element(d, d, C::new(T::zero(), T::zero()));
    for base in (0..layout.dim()).step_by(block) {
        for inner in 0..stride {
            let off = base + inner;
            for a in 0..d {
                for b in 0..d {
                    out[(a, b)] += rho[(off + a * stride, off + b * stride)];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ops::{max_abs_diff, pauli_z, projector};
    use crate::scalar::c;

    #[test]
    fn embed_projector_on_first_site() {
        let layout = SubsystemLayout::qubits(2);
        let p1 = projector::<f64>(2, 1);
        let m = tensor_embed(&p1, 0, &layout).unwrap();
        let expected = CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
        ]));
        assert!(max_abs_diff(&m, &expected) < 1e-15);
    }

    #[test]
    fn embed_identity_gives_identity() {
        let layout = SubsystemLayout::qubits(3);
        for site in 0..3 {
            let m = tensor_embed(&CMatrix::<f64>::identity(2, 2), site, &layout).unwrap();
            assert!(max_abs_diff(&m, &CMatrix::identity(8, 8)) < 1e-15);
        }
    }

    #[test]
    fn embed_sigma_z_on_second_site() {
        let layout = SubsystemLayout::qubits(2);
        let m = tensor_embed(&pauli_z::<f64>(), 1, &layout).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn embed_rejects_bad_site_and_dimension() {
        let layout = SubsystemLayout::qubits(2);
        assert!(matches!(
            tensor_embed(&pauli_z::<f64>(), 2, &layout),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            tensor_embed(&CMatrix::<f64>::identity(3, 3), 0, &layout),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn local_apply_matches_embedded_matrix() {
        let layout = SubsystemLayout::new(vec![2, 3, 2]).unwrap();
        let op = CMatrix::<f64>::from_fn(3, 3, |r, k| c((r + 2 * k) as f64, r as f64 - k as f64));
        let full = tensor_embed(&op, 1, &layout).unwrap();
        let v = crate::scalar::CVector::<f64>::from_fn(12, |i, _| c(i as f64, 1.0 - i as f64));
        let expected = &full * &v;
        let mut w = v.clone();
        let mut scratch = Vec::new();
        apply_local_vec(&op, 1, &layout, w.as_mut_slice(), &mut scratch);
        assert!((expected - w).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let layout = SubsystemLayout::new(vec![2, 3]).unwrap();
        let a = CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.25, 0.0), c(0.75, 0.0)]));
        let b = CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.5, 0.0),
            c(0.3, 0.0),
            c(0.2, 0.0),
        ]));
        let rho = kron(&a, &b);
        assert!(max_abs_diff(&reduce_to_site(&rho, 0, &layout).unwrap(), &a) < 1e-15);
        assert!(max_abs_diff(&reduce_to_site(&rho, 1, &layout).unwrap(), &b) < 1e-15);
    }
}
