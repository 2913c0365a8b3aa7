//! Projective measurements on one subsystem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::layout::{apply_local_vec, conjugate_local_mat, SubsystemLayout};
use crate::quantum::state::ProbeState;
use crate::scalar::{cabs, cr, CMatrix, CVector, Real, C};

/// Completeness / orthogonality tolerance for measurement bases.
pub const BASIS_TOL: f64 = 1e-12;

/// Local measurement basis, as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSpec {
    /// Computational basis of the measured site (`σ_z` eigenbasis for qubits).
    #[default]
    SigmaZ,
    /// `{|+>, |->}` for a qubit site.
    SigmaX,
    /// Explicit orthonormal basis; each vector is a list of `[re, im]` pairs.
    Custom { vectors: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone)]
enum Outcomes<T: Real> {
    /// Rank-one local projectors `|b_k><b_k|` at one site.
    Local {
        site: usize,
        basis: Vec<CVector<T>>,
        projectors: Vec<CMatrix<T>>,
    },
    /// Single outcome with projector `I` (no information, no collapse).
    Trivial,
}

/// A projective measurement `{Π_γ}` on the probe.
#[derive(Debug, Clone)]
pub struct MeasurementScheme<T: Real> {
    layout: SubsystemLayout,
    outcomes: Outcomes<T>,
}

impl<T: Real> MeasurementScheme<T> {
    /// Measures `site` in the given orthonormal local basis.
    pub fn local(layout: &SubsystemLayout, site: usize, basis: Vec<CVector<T>>) -> Result<Self> {
        let d = layout.local_dim(site)?;
        if basis.len() != d || basis.iter().any(|b| b.len() != d) {
            return Err(Error::Dimension(format!(
                "site {site} has dimension {d}; basis must hold {d} vectors of length {d}"
            )));
        }
        let tol = T::lit(BASIS_TOL);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let target = if i == j { T::one() } else { T::zero() };
                if cabs(a.dotc(b) - cr(target)) > tol {
                    return Err(Error::param("basis", "measurement basis is not orthonormal"));
                }
            }
        }
        let projectors: Vec<CMatrix<T>> = basis.iter().map(|b| b * b.adjoint()).collect();
        Ok(Self {
            layout: layout.clone(),
            outcomes: Outcomes::Local {
                site,
                basis,
                projectors,
            },
        })
    }

    /// Computational-basis measurement of one site.
    pub fn computational(layout: &SubsystemLayout, site: usize) -> Result<Self> {
        let d = layout.local_dim(site)?;
        let basis = (0..d)
            .map(|k| {
                let mut v = CVector::zeros(d);
                v[k] = cr(T::one());
                v
            })
            .collect();
        Self::local(layout, site, basis)
    }

    /// `σ_x` eigenbasis `{|+>, |->}` of a qubit site.
    pub fn sigma_x(layout: &SubsystemLayout, site: usize) -> Result<Self> {
        if layout.local_dim(site)? != 2 {
            return Err(Error::param("basis", "sigma_x basis needs a two-level site"));
        }
        let s = T::lit(0.5).sqrt();
        let plus = CVector::from_vec(vec![cr(s), cr(s)]);
        let minus = CVector::from_vec(vec![cr(s), cr(-s)]);
        Self::local(layout, site, vec![plus, minus])
    }

    /// Projective measurement of the whole probe in its computational basis.
    pub fn full_computational(dim: usize) -> Self {
        Self::computational(&SubsystemLayout::single(dim), 0)
            .expect("computational basis is orthonormal")
    }

    /// The non-measurement: one outcome with projector `I`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            layout: SubsystemLayout::single(dim),
            outcomes: Outcomes::Trivial,
        }
    }

    pub fn from_spec(spec: &BasisSpec, layout: &SubsystemLayout, site: usize) -> Result<Self> {
        match spec {
            BasisSpec::SigmaZ => Self::computational(layout, site),
            BasisSpec::SigmaX => Self::sigma_x(layout, site),
            BasisSpec::Custom { vectors } => {
                let basis = vectors
                    .iter()
                    .map(|v| CVector::from_iterator(v.len(), v.iter().map(|[re, im]| C::new(T::lit(*re), T::lit(*im)))))
                    .collect();
                Self::local(layout, site, basis)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn num_outcomes(&self) -> usize {
        match &self.outcomes {
            Outcomes::Local { basis, .. } => basis.len(),
            Outcomes::Trivial => 1,
        }
    }

    /// Full-space projector `Π_γ`.
    pub fn projector(&self, outcome: usize) -> Result<CMatrix<T>> {
        match &self.outcomes {
            Outcomes::Local {
                site, projectors, ..
            } => {
                let p = projectors.get(outcome).ok_or_else(|| {
                    Error::OutOfRange(format!("outcome {outcome} of {}", projectors.len()))
                })?;
                crate::quantum::layout::tensor_embed(p, *site, &self.layout)
            }
            Outcomes::Trivial if outcome == 0 => Ok(CMatrix::identity(self.dim(), self.dim())),
            Outcomes::Trivial => Err(Error::OutOfRange(format!("outcome {outcome} of 1"))),
        }
    }

    fn check_dim(&self, state: &ProbeState<T>) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "state dimension {} vs measurement dimension {}",
                state.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Unclipped outcome probabilities `Tr[Π_γ ρ]` written into `out`.
    pub fn probabilities_into(&self, state: &ProbeState<T>, out: &mut Vec<T>) -> Result<()> {
        self.check_dim(state)?;
        out.clear();
        match &self.outcomes {
            Outcomes::Trivial => out.push(state.weight()),
            Outcomes::Local { site, basis, .. } => {
                let d = basis.len();
                let stride = self.layout.stride(*site);
                let block = d * stride;
                out.resize(d, T::zero());
                let zero = C::new(T::zero(), T::zero());
                match state {
                    ProbeState::Pure(v) => {
                        let data = v.as_slice();
                        for base in (0..data.len()).step_by(block) {
                            for inner in 0..stride {
                                let off = base + inner;
                                for (k, b) in basis.iter().enumerate() {
                                    let mut amp = zero;
                                    for a in 0..d {
                                        amp += b[a].conj() * data[off + a * stride];
                                    }
                                    out[k] += amp.norm_sqr();
                                }
                            }
                        }
                    }
                    ProbeState::Mixed(rho) => {
                        for base in (0..rho.nrows()).step_by(block) {
                            for inner in 0..stride {
                                let off = base + inner;
                                for (k, b) in basis.iter().enumerate() {
                                    let mut acc = zero;
                                    for a in 0..d {
                                        for c in 0..d {
                                            acc += b[a].conj() * rho[(off + a * stride, off + c * stride)] * b[c];
                                        }
                                    }
                                    out[k] += acc.re;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn probabilities(&self, state: &ProbeState<T>) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.num_outcomes());
        self.probabilities_into(state, &mut out)?;
        Ok(out)
    }

    /// Applies `Π_γ` without renormalising.
    pub fn project(&self, state: &mut ProbeState<T>, outcome: usize) -> Result<()> {
        self.check_dim(state)?;
        match &self.outcomes {
            Outcomes::Trivial if outcome == 0 => Ok(()),
            Outcomes::Trivial => Err(Error::OutOfRange(format!("outcome {outcome} of 1"))),
            Outcomes::Local {
                site, projectors, ..
            } => {
                let p = projectors.get(outcome).ok_or_else(|| {
                    Error::OutOfRange(format!("outcome {outcome} of {}", projectors.len()))
                })?;
                match state {
                    ProbeState::Pure(v) => {
                        let mut scratch = Vec::new();
                        apply_local_vec(p, *site, &self.layout, v.as_mut_slice(), &mut scratch);
                    }
                    ProbeState::Mixed(rho) => conjugate_local_mat(p, *site, &self.layout, rho),
                }
                Ok(())
            }
        }
    }

    /// `ρ ← Π_γ ρ Π_γ / p`.
    pub fn collapse(&self, state: &mut ProbeState<T>, outcome: usize, prob: T) -> Result<()> {
        if prob <= T::zero() {
            return Err(Error::Numerical(format!(
                "collapse onto outcome {outcome} with probability {:e}",
                prob.to_f64_lossy()
            )));
        }
        self.project(state, outcome)?;
        state.scale_weight(prob);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ops::max_abs_diff;
    use crate::quantum::random::random_pure_state;

    fn check_complete(s: &MeasurementScheme<f64>) {
        let dim = s.dim();
        let mut sum = CMatrix::<f64>::zeros(dim, dim);
        for g in 0..s.num_outcomes() {
            let p = s.projector(g).unwrap();
            assert!(max_abs_diff(&(&p * &p), &p) < 1e-12);
            for h in 0..s.num_outcomes() {
                if h != g {
                    let q = s.projector(h).unwrap();
                    assert!((&p * &q).norm() < 1e-12);
                }
            }
            sum += p;
        }
        assert!(max_abs_diff(&sum, &CMatrix::identity(dim, dim)) < 1e-12);
    }

    #[test]
    fn schemes_are_complete_and_orthogonal() {
        let layout = SubsystemLayout::qubits(3);
        check_complete(&MeasurementScheme::computational(&layout, 2).unwrap());
        check_complete(&MeasurementScheme::sigma_x(&layout, 0).unwrap());
        check_complete(&MeasurementScheme::full_computational(4));
        check_complete(&MeasurementScheme::trivial(4));
        let jc = SubsystemLayout::new(vec![2, 5]).unwrap();
        check_complete(&MeasurementScheme::computational(&jc, 0).unwrap());
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let layout = SubsystemLayout::qubits(1);
        let spec = BasisSpec::Custom {
            vectors: vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[1.0, 0.0], [1.0, 0.0]]],
        };
        assert!(MeasurementScheme::<f64>::from_spec(&spec, &layout, 0).is_err());
        assert!(MeasurementScheme::<f64>::sigma_x(&SubsystemLayout::single(3), 0).is_err());
    }

    #[test]
    fn probabilities_match_dense_projectors() {
        let layout = SubsystemLayout::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure_state::<f64>(12, 9);
        let rho = ProbeState::Mixed(psi.to_density());
        let s = MeasurementScheme::sigma_x(&layout, 2).unwrap();
        let pure = s.probabilities(&psi).unwrap();
        let mixed = s.probabilities(&rho).unwrap();
        for g in 0..2 {
            let p = s.projector(g).unwrap();
            let dense = (&p * rho.to_density()).trace().re;
            assert!((pure[g] - dense).abs() < 1e-13);
            assert!((mixed[g] - dense).abs() < 1e-13);
        }
        assert!((pure.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collapse_pure_and_mixed_agree() {
        let layout = SubsystemLayout::qubits(2);
        let s = MeasurementScheme::sigma_x(&layout, 1).unwrap();
        let mut psi = random_pure_state::<f64>(4, 2);
        let mut rho = ProbeState::Mixed(psi.to_density());
        let p = s.probabilities(&psi).unwrap()[1];
        s.collapse(&mut psi, 1, p).unwrap();
        s.collapse(&mut rho, 1, p).unwrap();
        assert!((psi.weight() - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(&psi.to_density(), &rho.to_density()) < 1e-12);
        assert!(s.collapse(&mut psi, 0, 0.0).is_err());
    }
}
