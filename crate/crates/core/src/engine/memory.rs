//! Paired trajectories and accumulated evolution–measurement operators.

use nalgebra::SymmetricEigen;
use rand::Rng;
use serde::Serialize;

use super::{clip_probabilities, sample_outcome, EPS_COND};
use crate::error::{Error, Result};
use crate::models::{Channel, MeasurementScheme, ParametricModel};
use crate::quantum::ops::cmatmul;
use crate::quantum::random::rng_from_seed;
use crate::quantum::state::{fidelity, ProbeState};
use crate::scalar::{CMatrix, Real};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedTrajectory<T: Real> {
    /// Fidelity of the two conditional states after each measurement.
    pub fidelities: Vec<T>,
    /// Step at which the second state could not follow the sampled record.
    pub excluded_at: Option<usize>,
}

fn check_pair<T: Real>(a: &ProbeState<T>, b: &ProbeState<T>, channel: &Channel<T>) -> Result<()> {
    if a.dim() != b.dim() || a.dim() != channel.dim() {
        return Err(Error::Dimension(format!(
            "paired states of dimension {} and {} with a channel of dimension {}",
            a.dim(),
            b.dim(),
            channel.dim()
        )));
    }
    Ok(())
}

/// Runs two probes through the same outcome record, sampled from `state_a`.
pub fn paired_trajectory_with<T: Real, R: Rng + ?Sized>(
    channel: &Channel<T>,
    scheme: &MeasurementScheme<T>,
    state_a: &ProbeState<T>,
    state_b: &ProbeState<T>,
    n_seq: usize,
    rng: &mut R,
) -> Result<PairedTrajectory<T>> {
    check_pair(state_a, state_b, channel)?;
    let (mut a, mut b) = (state_a.clone(), state_b.clone());
    let (mut pa, mut pb) = (Vec::new(), Vec::new());
    let mut buf = Vec::new();
    let mut fidelities = Vec::with_capacity(n_seq);
    let eps = T::lit(EPS_COND);
    for n in 1..=n_seq {
        channel.apply(&mut a, &mut buf)?;
        channel.apply(&mut b, &mut buf)?;
        scheme.probabilities_into(&a, &mut pa)?;
        scheme.probabilities_into(&b, &mut pb)?;
        clip_probabilities(&mut pa)?;
        clip_probabilities(&mut pb)?;
        let g = sample_outcome(&pa, rng)?;
        if pb[g] < eps {
            return Ok(PairedTrajectory {
                fidelities,
                excluded_at: Some(n),
            });
        }
        scheme.collapse(&mut a, g, pa[g])?;
        scheme.collapse(&mut b, g, pb[g])?;
        fidelities.push(fidelity(&a, &b)?);
    }
    Ok(PairedTrajectory {
        fidelities,
        excluded_at: None,
    })
}

/// [`paired_trajectory_with`] using the model's channel at its nominal parameter.
pub fn paired_trajectory<T: Real>(
    model: &dyn ParametricModel<T>,
    scheme: &MeasurementScheme<T>,
    state_a: &ProbeState<T>,
    state_b: &ProbeState<T>,
    n_seq: usize,
    seed: u64,
) -> Result<PairedTrajectory<T>> {
    let channel = model.channel(model.nominal_lambda())?;
    paired_trajectory_with(&channel, scheme, state_a, state_b, n_seq, &mut rng_from_seed(seed))
}

/// Per-step fidelities for a prescribed outcome record.
pub fn paired_fidelities_for<T: Real>(
    channel: &Channel<T>,
    scheme: &MeasurementScheme<T>,
    state_a: &ProbeState<T>,
    state_b: &ProbeState<T>,
    outcomes: &[usize],
) -> Result<Vec<T>> {
    check_pair(state_a, state_b, channel)?;
    let (mut a, mut b) = (state_a.clone(), state_b.clone());
    let mut probs = Vec::new();
    let mut buf = Vec::new();
    let mut out = Vec::with_capacity(outcomes.len());
    for &g in outcomes {
        for s in [&mut a, &mut b] {
            channel.apply(s, &mut buf)?;
            scheme.probabilities_into(s, &mut probs)?;
            let p = *probs
                .get(g)
                .ok_or_else(|| Error::OutOfRange(format!("outcome {g} of {}", probs.len())))?;
            scheme.collapse(s, g, p)?;
        }
        out.push(fidelity(&a, &b)?);
    }
    Ok(out)
}

/// Orthonormal basis of the range of a projector, as the columns of a `d × r` isometry.
fn range_isometry<T: Real>(projector: &CMatrix<T>) -> CMatrix<T> {
    let eig = SymmetricEigen::new(projector.clone());
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > T::lit(0.5))
        .collect();
    CMatrix::from_fn(projector.nrows(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

/// `s₂/s₁` of `K` from the eigenvalues of the Gram matrix `K K†`.
fn gram_ratio<T: Real>(k: &CMatrix<T>) -> T {
    if k.nrows() < 2 {
        return T::zero();
    }
    let gram = cmatmul(k, &k.adjoint());
    let (mut l1, mut l2) = (T::zero(), T::zero());
    for &l in gram.symmetric_eigenvalues().iter() {
        if l > l1 {
            l2 = l1;
            l1 = l;
        } else if l > l2 {
            l2 = l;
        }
    }
    (l2.max(T::zero()) / l1).sqrt().min(T::one())
}

/// Forms `𝒫 = Π_{γ_n} U ⋯ Π_{γ_1} U`, Frobenius-normalised after every
/// factor, and records `s₂/s₁` after each step.
///
/// With `Π_γ = W_γ W_γ†` the product is `W_{γ_n} K_n`, where
/// `K_n = (W_{γ_n}† U W_{γ_{n-1}}) K_{n-1}`. Writing `K_1 = L Q` with
/// orthonormal rows in `Q`, only the square factor in front of `Q` is propagated.
pub fn accumulate_operator<T: Real>(
    channel: &Channel<T>,
    scheme: &MeasurementScheme<T>,
    outcomes: &[usize],
) -> Result<(CMatrix<T>, Vec<T>)> {
    let Channel::Unitary(u) = channel else {
        return Err(Error::Unsupported("operator accumulation needs a unitary channel".into()));
    };
    if u.nrows() != scheme.dim() {
        return Err(Error::Dimension(format!(
            "unitary of dimension {} with a measurement of dimension {}",
            u.nrows(),
            scheme.dim()
        )));
    }
    let k_out = scheme.num_outcomes();
    if let Some(&g) = outcomes.iter().find(|&&g| g >= k_out) {
        return Err(Error::OutOfRange(format!("outcome {g} of {k_out}")));
    }
    let isometries: Vec<CMatrix<T>> = (0..k_out)
        .map(|g| Ok(range_isometry(&scheme.projector(g)?)))
        .collect::<Result<_>>()?;
    let first: Vec<CMatrix<T>> = isometries.iter().map(|w| cmatmul(&w.adjoint(), u)).collect();
    // blocks[to * k_out + from] = W_to† U W_from
    let blocks: Vec<CMatrix<T>> = (0..k_out)
        .flat_map(|to| (0..k_out).map(move |from| (to, from)))
        .map(|(to, from)| cmatmul(&first[to], &isometries[from]))
        .collect();
    let dim = u.nrows();
    let Some((&g0, rest)) = outcomes.split_first() else {
        return Ok((CMatrix::identity(dim, dim), Vec::new()));
    };
    // K_1 = L Q with orthonormal rows in Q; afterwards K_n = M_n Q, M_n square.
    let qr = first[g0].adjoint().qr();
    let q_rows = qr.q().adjoint();
    let mut m = qr.r().adjoint();
    let mut ratios = Vec::with_capacity(outcomes.len());
    let mut prev = g0;
    for (n, &g) in std::iter::once(&g0).chain(rest).enumerate() {
        if n > 0 {
            m = cmatmul(&blocks[g * k_out + prev], &m);
        }
        let norm = m.norm();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Numerical(format!("accumulated operator vanished at step {}", n + 1)));
        }
        m.unscale_mut(norm);
        ratios.push(gram_ratio(&m));
        prev = g;
    }
    let acc = cmatmul(&cmatmul(&isometries[prev], &m), &q_rows);
    Ok((acc, ratios))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::layout::SubsystemLayout;
    use crate::quantum::propagator::unitary_propagator;
    use crate::quantum::random::{haar_random_unitary, random_pure_state};
    use crate::models::spin::build_heisenberg;
    use crate::quantum::ops::singular_ratio;

    fn heisenberg_channel(n: usize, tau: f64) -> Channel<f64> {
        Channel::Unitary(unitary_propagator(&build_heisenberg::<f64>(n, 1.0, 0.1).unwrap(), tau).unwrap())
    }

    #[test]
    fn identical_states_stay_identical() {
        let ch = heisenberg_channel(3, 1.0);
        let scheme = MeasurementScheme::computational(&SubsystemLayout::qubits(3), 2).unwrap();
        let psi = random_pure_state::<f64>(8, 4);
        let run = paired_trajectory_with(&ch, &scheme, &psi, &psi, 30, &mut rng_from_seed(1)).unwrap();
        assert!(run.excluded_at.is_none());
        assert!(run.fidelities.iter().all(|f| (f - 1.0).abs() < 1e-10));
    }

    #[test]
    fn full_measurement_erases_memory_in_one_step() {
        let ch = Channel::Unitary(CMatrix::<f64>::identity(4, 4));
        let scheme = MeasurementScheme::full_computational(4);
        let a = random_pure_state::<f64>(4, 1);
        let b = random_pure_state::<f64>(4, 2);
        let run = paired_trajectory_with(&ch, &scheme, &a, &b, 5, &mut rng_from_seed(3)).unwrap();
        assert!(run.fidelities.iter().all(|f| (f - 1.0).abs() < 1e-12));
    }

    #[test]
    fn forced_record_fidelities_symmetric_in_pair() {
        let ch = heisenberg_channel(3, 2.0);
        let scheme = MeasurementScheme::computational(&SubsystemLayout::qubits(3), 2).unwrap();
        let a = random_pure_state::<f64>(8, 10);
        let b = random_pure_state::<f64>(8, 11);
        let record = [0, 1, 1, 0, 1, 0, 0, 0, 1, 1];
        let ab = paired_fidelities_for(&ch, &scheme, &a, &b, &record).unwrap();
        let ba = paired_fidelities_for(&ch, &scheme, &b, &a, &record).unwrap();
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn single_projective_step_is_rank_one() {
        let u = haar_random_unitary::<f64>(2, 5);
        let scheme = MeasurementScheme::full_computational(2);
        let (_, ratios) = accumulate_operator(&Channel::Unitary(u), &scheme, &[1]).unwrap();
        assert!(ratios[0] < 1e-12);
    }

    #[test]
    fn no_measurement_keeps_full_rank() {
        let u = haar_random_unitary::<f64>(4, 6);
        let scheme = MeasurementScheme::trivial(4);
        let (_, ratios) = accumulate_operator(&Channel::Unitary(u), &scheme, &[0; 20]).unwrap();
        assert!(ratios.iter().all(|r| (r - 1.0).abs() < 1e-10));
    }

    #[test]
    fn reduced_accumulation_matches_direct_product() {
        let layout = SubsystemLayout::qubits(3);
        let u = haar_random_unitary::<f64>(8, 8);
        let ch = Channel::Unitary(u.clone());
        let record = [1, 0, 0, 1, 1, 0, 1, 0];
        for scheme in [
            MeasurementScheme::computational(&layout, 1).unwrap(),
            MeasurementScheme::sigma_x(&layout, 2).unwrap(),
        ] {
            let (acc, ratios) = accumulate_operator(&ch, &scheme, &record).unwrap();
            let mut direct = CMatrix::<f64>::identity(8, 8);
            for (n, &g) in record.iter().enumerate() {
                direct = scheme.projector(g).unwrap() * &u * direct;
                direct.unscale_mut(direct.norm());
                let expect = singular_ratio(&direct).unwrap();
                assert!((ratios[n] - expect).abs() < 1e-7, "step {n}: {} vs {expect}", ratios[n]);
            }
            assert!((&acc - &direct).norm() < 1e-10);
        }
    }

    #[test]
    fn accumulation_requires_unitary() {
        let scheme = MeasurementScheme::<f64>::trivial(2);
        let ch = Channel::Superoperator(CMatrix::identity(4, 4));
        assert!(accumulate_operator(&ch, &scheme, &[0]).is_err());
    }
}
