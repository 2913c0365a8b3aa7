//! Probe states: pure vectors on unitary paths, density matrices on the
//! dissipative path.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::quantum::layout::{reduce_to_site, SubsystemLayout};
use crate::quantum::ops::hermiticity_defect;
use crate::scalar::{cr, CMatrix, CVector, Real, C};

/// Normalisation / Hermiticity tolerance for state validation.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeState<T: Real> {
    Pure(CVector<T>),
    Mixed(CMatrix<T>),
}

impl<T: Real> ProbeState<T> {
    /// Validated pure state.
    pub fn pure(amplitudes: CVector<T>) -> Result<Self> {
        let s = ProbeState::Pure(amplitudes);
        s.validate()?;
        Ok(s)
    }

    /// Validated density matrix.
    pub fn mixed(rho: CMatrix<T>) -> Result<Self> {
        let s = ProbeState::Mixed(rho);
        s.validate()?;
        Ok(s)
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::OutOfRange(format!("basis index {index} for dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = cr(T::one());
        Ok(ProbeState::Pure(v))
    }

    pub fn dim(&self) -> usize {
        match self {
            ProbeState::Pure(v) => v.len(),
            ProbeState::Mixed(m) => m.nrows(),
        }
    }

    pub fn is_pure_representation(&self) -> bool {
        matches!(self, ProbeState::Pure(_))
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::lit(STATE_TOL);
        match self {
            ProbeState::Pure(v) => {
                let n2 = v.norm_squared();
                if (n2 - T::one()).abs() > tol {
                    return Err(Error::Precondition(format!(
                        "pure state has squared norm {:e}",
                        n2.to_f64_lossy()
                    )));
                }
            }
            ProbeState::Mixed(m) => {
                if !m.is_square() {
                    return Err(Error::Dimension("density matrix must be square".into()));
                }
                let tr = m.trace();
                if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
                    return Err(Error::Precondition(format!(
                        "density matrix trace {:e}",
                        tr.re.to_f64_lossy()
                    )));
                }
                let defect = hermiticity_defect(m);
                if defect > tol {
                    return Err(Error::NotHermitian(defect.to_f64_lossy()));
                }
                let eig = SymmetricEigen::new(m.clone());
                let min = eig.eigenvalues.iter().copied().fold(T::one(), |a, b| a.min(b));
                if min < -tol {
                    return Err(Error::Precondition(format!(
                        "density matrix has eigenvalue {:e}",
                        min.to_f64_lossy()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_density(&self) -> CMatrix<T> {
        match self {
            ProbeState::Pure(v) => v * v.adjoint(),
            ProbeState::Mixed(m) => m.clone(),
        }
    }

    /// Total probability (squared norm or trace).
    pub fn weight(&self) -> T {
        match self {
            ProbeState::Pure(v) => v.norm_squared(),
            ProbeState::Mixed(m) => m.trace().re,
        }
    }

    pub(crate) fn scale_weight(&mut self, p: T) {
        match self {
            ProbeState::Pure(v) => *v *= cr(T::one() / p.sqrt()),
            ProbeState::Mixed(m) => *m *= cr(T::one() / p),
        }
    }

    /// Reduced density matrix of one subsystem.
    pub fn reduced(&self, site: usize, layout: &SubsystemLayout) -> Result<CMatrix<T>> {
        if layout.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "state dimension {} vs layout {}",
                self.dim(),
                layout.dim()
            )));
        }
        reduce_to_site(&self.to_density(), site, layout)
    }
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`; `|<a|b>|^2` for pure states.
pub fn fidelity<T: Real>(a: &ProbeState<T>, b: &ProbeState<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "fidelity between dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let f = match (a, b) {
        (ProbeState::Pure(x), ProbeState::Pure(y)) => x.dotc(y).norm_sqr(),
        (ProbeState::Pure(x), ProbeState::Mixed(r)) | (ProbeState::Mixed(r), ProbeState::Pure(x)) => {
            x.dotc(&(r * x)).re
        }
        (ProbeState::Mixed(r), ProbeState::Mixed(s)) => {
            let sqrt_r = psd_sqrt(r);
            let inner = &sqrt_r * s * &sqrt_r;
            let inner = (&inner + inner.adjoint()) * C::new(T::lit(0.5), T::zero());
            let eig = SymmetricEigen::new(inner);
            let tr = eig
                .eigenvalues
                .iter()
                .fold(T::zero(), |acc, &l| acc + l.max(T::zero()).sqrt());
            tr * tr
        }
    };
    Ok(f.max(T::zero()).min(T::one()))
}

fn psd_sqrt<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let sym = (m + m.adjoint()) * C::new(T::lit(0.5), T::zero());
    let eig = SymmetricEigen::new(sym);
    let mut v = eig.eigenvectors.clone();
    for (j, mut col) in v.column_iter_mut().enumerate() {
        col *= cr(eig.eigenvalues[j].max(T::zero()).sqrt());
    }
    v * eig.eigenvectors.adjoint()
}
