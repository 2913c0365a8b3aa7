//! Interval channels: the map applied to the probe between two measurements.

use crate::error::{Error, Result};
use crate::quantum::state::ProbeState;
use crate::scalar::{CMatrix, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub enum Channel<T: Real> {
    /// `ψ → Uψ`, `ρ → UρU†`.
    Unitary(CMatrix<T>),
    /// Superoperator acting on the column-stacked `vec(ρ)`; density matrices only.
    Superoperator(CMatrix<T>),
    /// Replacement channel: discards the input and prepares a fixed state.
    Prepare(ProbeState<T>),
}

/// `y = M x` over raw column-major storage.
#[inline]
pub(crate) fn matvec<T: Real>(m: &CMatrix<T>, x: &[C<T>], y: &mut [C<T>]) {
    let n = m.nrows();
    debug_assert_eq!(m.ncols(), x.len());
    debug_assert_eq!(n, y.len());
    let zero = C::new(T::zero(), T::zero());
    y.iter_mut().for_each(|v| *v = zero);
    for (col, &xj) in m.as_slice().chunks_exact(n).zip(x) {
        for (yi, &mij) in y.iter_mut().zip(col) {
            *yi += mij * xj;
        }
    }
}

impl<T: Real> Channel<T> {
    pub fn dim(&self) -> usize {
        match self {
            Channel::Unitary(u) => u.nrows(),
            Channel::Superoperator(s) => (s.nrows() as f64).sqrt().round() as usize,
            Channel::Prepare(s) => s.dim(),
        }
    }

    /// Evolves `state` through the channel, using `buf` as scratch storage.
    pub fn apply(&self, state: &mut ProbeState<T>, buf: &mut Vec<C<T>>) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "channel dimension {} vs state dimension {}",
                self.dim(),
                state.dim()
            )));
        }
        match (self, state) {
            (Channel::Prepare(fresh), state) => {
                *state = fresh.clone();
            }
            (Channel::Unitary(u), ProbeState::Pure(v)) => {
                buf.resize(v.len(), C::new(T::zero(), T::zero()));
                matvec(u, v.as_slice(), buf);
                v.as_mut_slice().copy_from_slice(buf);
            }
            (Channel::Unitary(u), ProbeState::Mixed(rho)) => {
                *rho = u * &*rho * u.adjoint();
            }
            (Channel::Superoperator(s), ProbeState::Mixed(rho)) => {
                buf.resize(s.nrows(), C::new(T::zero(), T::zero()));
                matvec(s, rho.as_slice(), buf);
                rho.as_mut_slice().copy_from_slice(buf);
            }
            (Channel::Superoperator(_), ProbeState::Pure(_)) => {
                return Err(Error::Unsupported(
                    "superoperator channels act on density matrices; supply a mixed initial state".into(),
                ));
            }
        }
        Ok(())
    }

    /// Convenience wrapper returning the evolved state.
    pub fn evolve(&self, state: &ProbeState<T>) -> Result<ProbeState<T>> {
        let mut out = state.clone();
        let mut buf = Vec::new();
        self.apply(&mut out, &mut buf)?;
        Ok(out)
    }
}
