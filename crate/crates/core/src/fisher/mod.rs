//! Fisher information of sequential measurement records.

mod resources;

pub use resources::{gain_analysis, time_budget_analysis, GainReport, TimeBudgetReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    channel_triplet, enumerate_tree, run_trajectory, StepDistributions, TrajectoryTree, TreeOptions, Workspace,
};
use crate::error::{Error, Result};
use crate::models::{MeasurementScheme, ParametricModel};
use crate::parallel::{blocks, with_threads};
use crate::quantum::random::{rng_from_seed, stream_seed};
use crate::scalar::{CompensatedSum, Real};

/// Outcomes whose centre probability falls below this carry no information.
pub const P_MIN: f64 = 1e-12;
/// Largest tolerated fraction of aborted Monte-Carlo trajectories.
pub const ABORT_BUDGET: f64 = 1e-3;
/// Pruned probability above which an exact result is flagged approximate.
pub const APPROX_DEFICIT: f64 = 1e-6;
/// Trajectories per accumulation block; fixed so results do not depend on the worker count.
pub const MC_BLOCK: usize = 256;

/// `f = Σ_γ [(p₊(γ) − p₋(γ)) / 2h]² / p(γ)` for one measurement.
pub fn step_fisher_contribution<T: Real>(dists: &StepDistributions<T>, h: T) -> Result<T> {
    let k = dists.center.len();
    if dists.plus.len() != k || dists.minus.len() != k {
        return Err(Error::Dimension(format!(
            "outcome sets differ across replicas: {} / {} / {}",
            k,
            dists.plus.len(),
            dists.minus.len()
        )));
    }
    let p_min = T::lit(P_MIN);
    let two_h = h + h;
    let mut f = T::zero();
    for g in 0..k {
        let p = dists.center[g];
        if p < p_min {
            continue;
        }
        let dp = (dists.plus[g] - dists.minus[g]) / two_h;
        f += dp * dp / p;
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherSeries<T: Real> {
    pub lambda: T,
    pub h: T,
    /// `ΔF^(n)` for `n = 1..`.
    pub delta: Vec<T>,
    /// `F^(n)`, the running sum of `delta`.
    pub cumulative: Vec<T>,
    pub std_err: Vec<T>,
    /// Trajectories requested (0 on the exact path).
    pub mu_max: usize,
    pub aborted: usize,
    /// Probability dropped by pruning (exact path).
    pub pruned_mass: T,
    /// Set when the pruned mass exceeds the tolerated deficit.
    pub approximate: bool,
}

impl<T: Real> FisherSeries<T> {
    fn from_increments(lambda: T, h: T, delta: Vec<T>, std_err: Vec<T>) -> Self {
        let mut acc = T::zero();
        let cumulative = delta
            .iter()
            .map(|&d| {
                acc += d;
                acc
            })
            .collect();
        Self {
            lambda,
            h,
            delta,
            cumulative,
            std_err,
            mu_max: 0,
            aborted: 0,
            pruned_mass: T::zero(),
            approximate: false,
        }
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }
}

/// Exact Fisher information together with its recursive decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactFisher<T: Real> {
    /// Increments are differences of the trajectory sum `Σ P (∂ ln P)²`.
    pub series: FisherSeries<T>,
    /// `Σ_γ P_γ (∂_λ ln P_γ)²` at every depth.
    pub direct: Vec<T>,
    /// `Σ P^(n-1) f^(n)` at every depth.
    pub recursive_delta: Vec<T>,
    /// `Σ P (∂ ln P^(n-1)) (∂ ln p(γ_n | ·))` at every depth.
    pub cross: Vec<T>,
}

/// Evaluates the trajectory sum and the recursive increments on an enumerated tree.
pub fn exact_fisher<T: Real>(tree: &TrajectoryTree<T>) -> ExactFisher<T> {
    let h = tree.h;
    let depth = tree.depth();
    let mut direct = Vec::with_capacity(depth);
    let mut recursive_delta = Vec::with_capacity(depth);
    let mut cross = Vec::with_capacity(depth);
    for d in 1..=depth {
        let mut sum = CompensatedSum::new();
        let mut cross_sum = CompensatedSum::new();
        let parents = if d > 1 { Some(tree.branches(d - 1)) } else { None };
        for b in tree.branches(d) {
            let p = b.prob_center();
            let s = b.score(h);
            sum.add(p * s * s);
            let s_prev = parents.map_or(T::zero(), |ps| ps[b.parent as usize].score(h));
            cross_sum.add(p * s_prev * (s - s_prev));
        }
        direct.push(sum.value());
        cross.push(cross_sum.value());
        let rec = match parents {
            None => tree.root_next_f,
            Some(ps) => ps
                .iter()
                .map(|b| b.prob_center() * b.next_f)
                .collect::<CompensatedSum<T>>()
                .value(),
        };
        recursive_delta.push(rec);
    }
    let mut prev = T::zero();
    let delta: Vec<T> = direct
        .iter()
        .map(|&f| {
            let d = f - prev;
            prev = f;
            d
        })
        .collect();
    let mut series = FisherSeries::from_increments(tree.lambda, h, delta, vec![T::zero(); depth]);
    series.pruned_mass = tree.pruned_mass(depth);
    series.approximate = series.pruned_mass > T::lit(APPROX_DEFICIT);
    ExactFisher {
        series,
        direct,
        recursive_delta,
        cross,
    }
}

/// Convenience: enumerate the tree and evaluate it.
pub fn exact_fisher_for<T: Real>(
    model: &dyn ParametricModel<T>,
    scheme: &MeasurementScheme<T>,
    lambda: T,
    h: T,
    n_seq: usize,
    options: TreeOptions,
) -> Result<ExactFisher<T>> {
    let tree = enumerate_tree(model, scheme, lambda, h, n_seq, options)?;
    Ok(exact_fisher(&tree))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionCheck<T: Real> {
    /// Largest `|direct − recursive| / direct` over depths (absolute where `direct = 0`).
    pub max_deviation: T,
    /// Largest `|cross term|` over depths.
    pub max_cross: T,
}

/// Compares the trajectory sum against the accumulated recursive increments.
pub fn recursion_identity_check<T: Real>(tree: &TrajectoryTree<T>) -> RecursionCheck<T> {
    let ex = exact_fisher(tree);
    let mut acc = T::zero();
    let mut max_deviation = T::zero();
    let mut max_cross = T::zero();
    for (n, &direct) in ex.direct.iter().enumerate() {
        acc += ex.recursive_delta[n];
        let diff = (direct - acc).abs();
        let dev = if direct > T::zero() { diff / direct } else { diff };
        max_deviation = max_deviation.max(dev);
        max_cross = max_cross.max(ex.cross[n].abs());
    }
    RecursionCheck {
        max_deviation,
        max_cross,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct McOptions {
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
}

struct BlockSums<T> {
    sum: Vec<CompensatedSum<T>>,
    sumsq: Vec<CompensatedSum<T>>,
    completed: usize,
    aborted: usize,
}

/// Monte-Carlo estimate of `ΔF^(n)` from `mu_max` sampled trajectories.
///
/// Trajectory `i` is driven by `stream_seed(base_seed, i)`, so it can be
/// replayed with [`crate::engine::sample_trajectory`].
#[allow(clippy::too_many_arguments)]
pub fn mc_fisher<T: Real>(
    model: &dyn ParametricModel<T>,
    scheme: &MeasurementScheme<T>,
    lambda: T,
    h: T,
    n_seq: usize,
    mu_max: usize,
    base_seed: u64,
    options: McOptions,
) -> Result<FisherSeries<T>> {
    if mu_max == 0 {
        return Err(Error::param("mu_max", "must be at least 1"));
    }
    if n_seq == 0 {
        return Err(Error::param("n_seq", "must be at least 1"));
    }
    let channels = channel_triplet(model, lambda, h)?;
    let initial = model.initial_state();
    let run_block = |range: std::ops::Range<usize>| -> Result<BlockSums<T>> {
        let mut out = BlockSums {
            sum: vec![CompensatedSum::new(); n_seq],
            sumsq: vec![CompensatedSum::new(); n_seq],
            completed: 0,
            aborted: 0,
        };
        let mut ws = Workspace::new();
        let mut f = vec![T::zero(); n_seq];
        for i in range {
            let mut rng = rng_from_seed(stream_seed(base_seed, i as u64));
            let mut step_err = None;
            let res = run_trajectory(&channels, scheme, &initial, n_seq, &mut rng, &mut ws, |n, _, d| {
                match step_fisher_contribution(d, h) {
                    Ok(v) => f[n - 1] = v,
                    Err(e) => step_err = Some(e),
                }
            });
            if let Some(e) = step_err {
                return Err(e);
            }
            match res {
                Ok(()) => {
                    for n in 0..n_seq {
                        out.sum[n].add(f[n]);
                        out.sumsq[n].add(f[n] * f[n]);
                    }
                    out.completed += 1;
                }
                Err(Error::DegenerateReplica { .. }) => out.aborted += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    };
    let ranges: Vec<_> = blocks(mu_max, MC_BLOCK).collect();
    let results: Vec<Result<BlockSums<T>>> =
        with_threads(options.threads, || ranges.into_par_iter().map(run_block).collect())?;

    let mut sum = vec![CompensatedSum::<T>::new(); n_seq];
    let mut sumsq = vec![CompensatedSum::<T>::new(); n_seq];
    let (mut completed, mut aborted) = (0usize, 0usize);
    for r in results {
        let b = r?;
        for n in 0..n_seq {
            sum[n].merge(&b.sum[n]);
            sumsq[n].merge(&b.sumsq[n]);
        }
        completed += b.completed;
        aborted += b.aborted;
    }
    if aborted as f64 > ABORT_BUDGET * mu_max as f64 || completed == 0 {
        return Err(Error::AbortBudgetExceeded {
            aborted,
            total: mu_max,
            budget: ABORT_BUDGET,
        });
    }
    let m = T::from_usize(completed).expect("trajectory count fits the scalar type");
    let mut delta = Vec::with_capacity(n_seq);
    let mut std_err = Vec::with_capacity(n_seq);
    for n in 0..n_seq {
        let mean = sum[n].value() / m;
        let var = if completed > 1 {
            ((sumsq[n].value() - m * mean * mean) / (m - T::one())).max(T::zero())
        } else {
            T::zero()
        };
        delta.push(mean);
        std_err.push((var / m).sqrt());
    }
    let mut series = FisherSeries::from_increments(lambda, h, delta, std_err);
    series.mu_max = mu_max;
    series.aborted = aborted;
    Ok(series)
}
