//! Exact enumeration of outcome histories.
//!
//! Branches are generated depth-first so that only one replica triplet per
//! depth is alive at a time; the stored per-depth branch lists are the same
//! as a breadth-first expansion would produce, up to ordering.

use serde::Serialize;

use super::{clip_probabilities, ChannelTriplet, StateTriplet, Workspace, CENTER, EPS_COND, MINUS, PLUS};
use crate::error::{Error, Result};
use crate::fisher::step_fisher_contribution;
use crate::models::{MeasurementScheme, ParametricModel};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeOptions {
    /// Branches with joint centre probability at or below this are dropped.
    pub eps_prune: f64,
    /// Largest number of surviving branches at any depth.
    pub branch_cap: usize,
}

impl Default for TreeOptions {
    fn default() -> Self {
        Self {
            eps_prune: 1e-12,
            branch_cap: 2_000_000,
        }
    }
}

/// One surviving outcome history, stored relative to its parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch<T> {
    /// Index of the parent in the previous depth (unused at depth 1).
    pub parent: u32,
    pub outcome: u16,
    /// `ln P` of the history at `λ`, `λ+h`, `λ-h`.
    pub ln_p: [T; 3],
    /// Step contribution `f` of the next measurement given this history.
    pub next_f: T,
}

impl<T: Real> Branch<T> {
    pub fn prob_center(&self) -> T {
        self.ln_p[CENTER].exp()
    }

    /// Finite-difference score `∂_λ ln P`.
    pub fn score(&self, h: T) -> T {
        (self.ln_p[PLUS] - self.ln_p[MINUS]) / (h + h)
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryTree<T: Real> {
    pub lambda: T,
    pub h: T,
    pub options: TreeOptions,
    pub num_outcomes: usize,
    /// `f` of the first measurement.
    pub root_next_f: T,
    /// `levels[d - 1]` holds the branches of depth `d`.
    levels: Vec<Vec<Branch<T>>>,
    /// Probability dropped at each depth (not cumulative).
    pruned_at: Vec<T>,
}

impl<T: Real> TrajectoryTree<T> {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Branches of depth `d ≥ 1`.
    pub fn branches(&self, d: usize) -> &[Branch<T>] {
        &self.levels[d - 1]
    }

    /// Outcome history of branch `idx` at depth `d`.
    pub fn history(&self, d: usize, idx: usize) -> Vec<usize> {
        let mut out = vec![0; d];
        let mut i = idx;
        for level in (1..=d).rev() {
            let b = &self.levels[level - 1][i];
            out[level - 1] = b.outcome as usize;
            i = b.parent as usize;
        }
        out
    }

    /// Total centre-probability mass pruned at depths `1..=d`.
    pub fn pruned_mass(&self, d: usize) -> T {
        self.pruned_at[..d].iter().fold(T::zero(), |a, &p| a + p)
    }

    /// `|Σ P_center + pruned − 1|` at depth `d`.
    pub fn mass_defect(&self, d: usize) -> T {
        let kept = self.branches(d).iter().fold(T::zero(), |a, b| a + b.prob_center());
        (kept + self.pruned_mass(d) - T::one()).abs()
    }
}

struct Enumerator<'a, T: Real> {
    channels: &'a ChannelTriplet<T>,
    scheme: &'a MeasurementScheme<T>,
    options: TreeOptions,
    max_depth: usize,
    h: T,
    /// Post-collapse replicas of the node currently expanded at each depth.
    states: Vec<StateTriplet<T>>,
    ws: Vec<Workspace<T>>,
    levels: Vec<Vec<Branch<T>>>,
    pruned_at: Vec<T>,
    root_next_f: T,
    stored: usize,
}

impl<T: Real> Enumerator<'_, T> {
    fn expand(&mut self, depth: usize, node: Option<u32>, ln_p: [T; 3]) -> Result<()> {
        if depth == self.max_depth {
            return Ok(());
        }
        // evolve in place: states[depth] is not needed again once its children are built
        {
            let (states, ws) = (&mut self.states[depth], &mut self.ws[depth]);
            for r in 0..3 {
                self.channels[r].apply(&mut states[r], &mut ws.buf)?;
                let out = ws.dists.replica_mut(r);
                self.scheme.probabilities_into(&states[r], out)?;
                clip_probabilities(out)?;
            }
        }
        let f = step_fisher_contribution(&self.ws[depth].dists, self.h)?;
        match node {
            Some(i) => self.levels[depth - 1][i as usize].next_f = f,
            None => self.root_next_f = f,
        }

        let eps_cond = T::lit(EPS_COND);
        let eps_prune = T::lit(self.options.eps_prune);
        let parent_p = ln_p[CENTER].exp();
        for g in 0..self.scheme.num_outcomes() {
            let d = &self.ws[depth].dists;
            let p = [d.center[g], d.plus[g], d.minus[g]];
            if p[CENTER] < eps_cond {
                self.pruned_at[depth] += parent_p * p[CENTER];
                continue;
            }
            let child_ln = [ln_p[0] + p[0].ln(), ln_p[1] + p[1].ln(), ln_p[2] + p[2].ln()];
            let child_p = child_ln[CENTER].exp();
            if child_p <= eps_prune {
                self.pruned_at[depth] += child_p;
                continue;
            }
            if p[PLUS] < eps_cond || p[MINUS] < eps_cond {
                return Err(Error::DegenerateReplica {
                    step: depth + 1,
                    outcome: g,
                    prob: p[PLUS].min(p[MINUS]).to_f64_lossy(),
                });
            }
            let (lower, upper) = self.states.split_at_mut(depth + 1);
            let child = &mut upper[0];
            for r in 0..3 {
                child[r].clone_from(&lower[depth][r]);
                self.scheme.collapse(&mut child[r], g, p[r])?;
            }
            let level = &mut self.levels[depth];
            // The depth-first walk fills deep levels of early subtrees first, so
            // the stored total is bounded as well (a full binary tree with its
            // last level at the cap holds about twice the cap).
            let total_cap = self.options.branch_cap.saturating_mul(2);
            if level.len() >= self.options.branch_cap || self.stored >= total_cap {
                return Err(Error::BranchCap {
                    depth: depth + 1,
                    count: level.len() + 1,
                    cap: self.options.branch_cap,
                });
            }
            self.stored += 1;
            level.push(Branch {
                parent: node.unwrap_or(0),
                outcome: g as u16,
                ln_p: child_ln,
                next_f: T::zero(),
            });
            let idx = (level.len() - 1) as u32;
            self.expand(depth + 1, Some(idx), child_ln)?;
        }
        Ok(())
    }
}

/// Enumerates every outcome history up to `max_depth` measurements.
pub fn enumerate_tree<T: Real>(
    model: &dyn ParametricModel<T>,
    scheme: &MeasurementScheme<T>,
    lambda: T,
    h: T,
    max_depth: usize,
    options: TreeOptions,
) -> Result<TrajectoryTree<T>> {
    if max_depth == 0 {
        return Err(Error::param("n_seq", "tree depth must be at least 1"));
    }
    if !(options.eps_prune >= 0.0) || options.eps_prune >= 1.0 {
        return Err(Error::param("eps_prune", "must lie in [0, 1)"));
    }
    if scheme.num_outcomes() > u16::MAX as usize {
        return Err(Error::Unsupported("more than 65535 outcomes per measurement".into()));
    }
    let channels = super::channel_triplet(model, lambda, h)?;
    let init = super::initial_triplet(model);
    let mut e = Enumerator {
        channels: &channels,
        scheme,
        options,
        max_depth,
        h,
        states: vec![init; max_depth + 1],
        ws: (0..max_depth).map(|_| Workspace::new()).collect(),
        levels: vec![Vec::new(); max_depth],
        pruned_at: vec![T::zero(); max_depth],
        root_next_f: T::zero(),
        stored: 0,
    };
    e.expand(0, None, [T::zero(); 3])?;
    Ok(TrajectoryTree {
        lambda,
        h,
        options,
        num_outcomes: scheme.num_outcomes(),
        root_next_f: e.root_next_f,
        levels: e.levels,
        pruned_at: e.pruned_at,
    })
}
