//! Memory-loss, rank-collapse and field-filtering diagnostics.

mod wigner;

pub use wigner::{required_extent as wigner_required_extent, wigner, WignerGrid};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{accumulate_operator, paired_trajectory_with, sample_outcome, sample_outcomes};
use crate::error::{Error, Result};
use crate::models::{Channel, JaynesCummings, MeasurementScheme, ParametricModel};
use crate::parallel::{blocks, with_threads};
use crate::quantum::random::{random_pure_state_with, rng_from_seed, stream_seed, SimRng};
use crate::quantum::state::ProbeState;
use crate::scalar::{CMatrix, CompensatedSum, Real};

/// Largest tolerated fraction of paired trajectories dropped from the average.
pub const EXCLUSION_BUDGET: f64 = 0.01;
const CURVE_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries<T: Real> {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<T>,
    /// Standard error of the trajectory average (zero for single-trajectory data).
    pub y_err: Vec<T>,
    pub n_traj: usize,
    pub seed: u64,
    pub excluded: usize,
}

impl<T: Real> CurveSeries<T> {
    fn over_steps(label: &str, mean: Vec<T>, err: Vec<T>, n_traj: usize, seed: u64, excluded: usize) -> Self {
        Self {
            label: label.to_string(),
            x: (1..=mean.len()).map(|n| n as f64).collect(),
            y: mean,
            y_err: err,
            n_traj,
            seed,
            excluded,
        }
    }
}

/// How the two initial states of a paired trajectory are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairSource {
    #[default]
    IndependentRandom,
    /// Both probes start from the same random state.
    Identical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CurveOptions {
    pub threads: Option<usize>,
    pub pairs: PairSource,
}

struct Averaged<T> {
    mean: Vec<T>,
    err: Vec<T>,
    completed: usize,
    excluded: usize,
}

/// Per-block sums, sums of squares, completed and excluded counts.
type BlockTotals<T> = (Vec<CompensatedSum<T>>, Vec<CompensatedSum<T>>, usize, usize);

/// Averages per-step curves of `n_traj` independent trajectories.
/// `per_traj` returns `None` for a trajectory that must be excluded.
fn average_trajectories<T: Real>(
    n_seq: usize,
    n_traj: usize,
    seed: u64,
    threads: Option<usize>,
    per_traj: impl Fn(&mut SimRng) -> Result<Option<Vec<T>>> + Sync,
) -> Result<Averaged<T>> {
    let run_block = |range: std::ops::Range<usize>| -> Result<BlockTotals<T>> {
        let mut sum = vec![CompensatedSum::new(); n_seq];
        let mut sumsq = vec![CompensatedSum::new(); n_seq];
        let (mut done, mut excluded) = (0, 0);
        for i in range {
            let mut rng = rng_from_seed(stream_seed(seed, i as u64));
            match per_traj(&mut rng)? {
                Some(y) => {
                    for (n, &v) in y.iter().enumerate().take(n_seq) {
                        sum[n].add(v);
                        sumsq[n].add(v * v);
                    }
                    done += 1;
                }
                None => excluded += 1,
            }
        }
        Ok((sum, sumsq, done, excluded))
    };
    let ranges: Vec<_> = blocks(n_traj, CURVE_BLOCK).collect();
    let parts: Vec<_> = with_threads(threads, || ranges.into_par_iter().map(run_block).collect::<Vec<_>>())?;
    let mut sum = vec![CompensatedSum::<T>::new(); n_seq];
    let mut sumsq = vec![CompensatedSum::<T>::new(); n_seq];
    let (mut completed, mut excluded) = (0, 0);
    for part in parts {
        let (s, sq, d, e) = part?;
        for n in 0..n_seq {
            sum[n].merge(&s[n]);
            sumsq[n].merge(&sq[n]);
        }
        completed += d;
        excluded += e;
    }
    if completed == 0 {
        return Err(Error::Numerical("every trajectory was excluded".into()));
    }
    let m = T::from_usize(completed).expect("count fits the scalar type");
    let mut mean = Vec::with_capacity(n_seq);
    let mut err = Vec::with_capacity(n_seq);
    for n in 0..n_seq {
        let mu = sum[n].value() / m;
        let var = if completed > 1 {
            ((sumsq[n].value() - m * mu * mu) / (m - T::one())).max(T::zero())
        } else {
            T::zero()
        };
        mean.push(mu);
        err.push((var / m).sqrt());
    }
    Ok(Averaged {
        mean,
        err,
        completed,
        excluded,
    })
}

fn random_initial<T: Real, R: Rng + ?Sized>(dim: usize, channel: &Channel<T>, rng: &mut R) -> ProbeState<T> {
    let s = random_pure_state_with(dim, rng);
    match channel {
        Channel::Superoperator(_) => ProbeState::Mixed(s.to_density()),
        _ => s,
    }
}

fn check_counts(n_seq: usize, n_traj: usize) -> Result<()> {
    if n_seq == 0 {
        return Err(Error::param("n_seq", "must be at least 1"));
    }
    if n_traj == 0 {
        return Err(Error::param("n_traj", "must be at least 1"));
    }
    Ok(())
}

/// Trajectory-averaged fidelity of two probes started from random states
/// and driven by a shared outcome record.
pub fn memory_loss_curve<T: Real>(
    model: &dyn ParametricModel<T>,
    scheme: &MeasurementScheme<T>,
    n_seq: usize,
    n_traj: usize,
    seed: u64,
    options: CurveOptions,
) -> Result<CurveSeries<T>> {
    check_counts(n_seq, n_traj)?;
    let channel = model.channel(model.nominal_lambda())?;
    let dim = model.dim();
    let avg = average_trajectories(n_seq, n_traj, seed, options.threads, |rng| {
        let a = random_initial(dim, &channel, rng);
        let b = match options.pairs {
            PairSource::IndependentRandom => random_initial(dim, &channel, rng),
            PairSource::Identical => a.clone(),
        };
        let run = paired_trajectory_with(&channel, scheme, &a, &b, n_seq, rng)?;
        Ok(run.excluded_at.is_none().then_some(run.fidelities))
    })?;
    if avg.excluded as f64 > EXCLUSION_BUDGET * n_traj as f64 {
        return Err(Error::AbortBudgetExceeded {
            aborted: avg.excluded,
            total: n_traj,
            budget: EXCLUSION_BUDGET,
        });
    }
    Ok(CurveSeries::over_steps("fidelity", avg.mean, avg.err, avg.completed, seed, avg.excluded))
}

/// Trajectory-averaged `s₂/s₁` of the accumulated operator; records are
/// sampled from a random initial state per trajectory.
pub fn rank_collapse_curve<T: Real>(
    model: &dyn ParametricModel<T>,
    scheme: &MeasurementScheme<T>,
    n_seq: usize,
    n_traj: usize,
    seed: u64,
    options: CurveOptions,
) -> Result<CurveSeries<T>> {
    check_counts(n_seq, n_traj)?;
    let channel = model.channel(model.nominal_lambda())?;
    let dim = model.dim();
    let avg = average_trajectories(n_seq, n_traj, seed, options.threads, |rng| {
        let init = random_initial(dim, &channel, rng);
        let record = sample_outcomes(&channel, scheme, &init, n_seq, rng)?;
        let (_, ratios) = accumulate_operator(&channel, scheme, &record)?;
        Ok(Some(ratios))
    })?;
    Ok(CurveSeries::over_steps("singular_ratio", avg.mean, avg.err, avg.completed, seed, avg.excluded))
}

/// Field photon-number distribution after `n_seq` atom measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSnapshot<T: Real> {
    pub n_seq: usize,
    pub distribution: CurveSeries<T>,
    /// Reduced field density matrix (atom traced out).
    #[serde(skip, default = "empty_matrix")]
    pub field: CMatrix<T>,
}

fn empty_matrix<T: Real>() -> CMatrix<T> {
    CMatrix::zeros(0, 0)
}

/// `{0, 1, 2, 4, 8, …} ∪ extra`, capped at `n_seq`, sorted and deduplicated.
pub fn checkpoint_schedule(n_seq: usize, extra: &[usize]) -> Vec<usize> {
    let mut pts = vec![0];
    let mut k = 1;
    while k <= n_seq {
        pts.push(k);
        k *= 2;
    }
    pts.push(n_seq);
    pts.extend(extra.iter().copied().filter(|&e| e <= n_seq));
    pts.sort_unstable();
    pts.dedup();
    pts
}

/// Runs one trajectory of the atom–field probe, measuring the atom, and
/// records the field's number distribution at each checkpoint.
pub fn jc_filter_snapshot<T: Real>(
    model: &JaynesCummings<T>,
    n_seq: usize,
    extra_checkpoints: &[usize],
    seed: u64,
) -> Result<Vec<FilterSnapshot<T>>> {
    let layout = model.layout().clone();
    let scheme = MeasurementScheme::computational(&layout, 0)?;
    let channel = model.channel(model.nominal_lambda())?;
    let checkpoints = checkpoint_schedule(n_seq, extra_checkpoints);
    let mut rng = rng_from_seed(seed);
    let mut state = model.initial_state();
    let mut buf = Vec::new();
    let mut probs = Vec::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for n in 0..=n_seq {
        if n > 0 {
            channel.apply(&mut state, &mut buf)?;
            scheme.probabilities_into(&state, &mut probs)?;
            let g = sample_outcome(&probs, &mut rng)?;
            scheme.collapse(&mut state, g, probs[g])?;
        }
        if checkpoints.get(next) == Some(&n) {
            let field = state.reduced(1, &layout)?;
            let y: Vec<T> = field.diagonal().iter().map(|z| z.re.max(T::zero())).collect();
            out.push(FilterSnapshot {
                n_seq: n,
                distribution: CurveSeries {
                    label: format!("photon_number_n{n}"),
                    x: (0..y.len()).map(|m| m as f64).collect(),
                    y_err: vec![T::zero(); y.len()],
                    y,
                    n_traj: 1,
                    seed,
                    excluded: 0,
                },
                field,
            });
            next += 1;
        }
    }
    Ok(out)
}
