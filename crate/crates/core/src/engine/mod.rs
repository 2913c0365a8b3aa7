//! The evolve–measure–collapse protocol.
//!
//! Three replicas of the probe are carried along every trajectory, evolved
//! by the channels at `λ`, `λ+h` and `λ-h`. Outcomes are drawn from the
//! centre replica only and all three are collapsed onto the same projector,
//! so the shifted replicas hold the conditional states needed for the
//! finite-difference derivative of `p(γ_n | history)`.

mod memory;
mod tree;

pub use memory::{accumulate_operator, paired_fidelities_for, paired_trajectory, paired_trajectory_with, PairedTrajectory};
pub use tree::{enumerate_tree, Branch, TrajectoryTree, TreeOptions};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{Channel, MeasurementScheme, ParametricModel};
use crate::quantum::random::rng_from_seed;
use crate::quantum::state::ProbeState;
use crate::scalar::{Real, C};

/// Smallest conditional probability a shifted replica may assign to a sampled outcome.
pub const EPS_COND: f64 = 1e-12;
/// Excursion outside `[0, 1]` tolerated before clipping.
pub const CLIP_TOL: f64 = 1e-9;

pub const CENTER: usize = 0;
pub const PLUS: usize = 1;
pub const MINUS: usize = 2;

/// Channels at `λ`, `λ+h`, `λ-h`, in that order.
pub type ChannelTriplet<T> = [Channel<T>; 3];
pub type StateTriplet<T> = [ProbeState<T>; 3];

pub fn channel_triplet<T: Real>(model: &dyn ParametricModel<T>, lambda: T, h: T) -> Result<ChannelTriplet<T>> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::param("h", "finite-difference step must be positive"));
    }
    Ok([model.channel(lambda)?, model.channel(lambda + h)?, model.channel(lambda - h)?])
}

pub fn initial_triplet<T: Real>(model: &dyn ParametricModel<T>) -> StateTriplet<T> {
    let s = model.initial_state();
    [s.clone(), s.clone(), s]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepOutcome<T: Real> {
    pub outcome: usize,
    pub prob_center: T,
    pub prob_plus: T,
    pub prob_minus: T,
}

/// Full outcome distributions of one step for the three replicas.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepDistributions<T> {
    pub center: Vec<T>,
    pub plus: Vec<T>,
    pub minus: Vec<T>,
}

impl<T: Real> StepDistributions<T> {
    fn replica_mut(&mut self, r: usize) -> &mut Vec<T> {
        match r {
            CENTER => &mut self.center,
            PLUS => &mut self.plus,
            _ => &mut self.minus,
        }
    }

    pub fn replica(&self, r: usize) -> &[T] {
        match r {
            CENTER => &self.center,
            PLUS => &self.plus,
            _ => &self.minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord<T: Real> {
    pub seed: u64,
    pub steps: Vec<StepOutcome<T>>,
}

impl<T: Real> TrajectoryRecord<T> {
    pub fn n_seq(&self) -> usize {
        self.steps.len()
    }

    /// Joint probability of the realised record at the centre value.
    pub fn joint_probability(&self) -> T {
        self.steps.iter().fold(T::one(), |acc, s| acc * s.prob_center)
    }

    pub fn outcomes(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.outcome).collect()
    }
}

/// Checks and clips probabilities into `[0, 1]`.
fn clip_probabilities<T: Real>(probs: &mut [T]) -> Result<()> {
    let tol = T::lit(CLIP_TOL);
    for p in probs.iter_mut() {
        if !p.is_finite() || *p < -tol || *p > T::one() + tol {
            return Err(Error::ProbabilityOutOfRange {
                value: p.to_f64_lossy(),
                context: "outcome distribution",
            });
        }
        *p = p.clamp(T::zero(), T::one());
    }
    Ok(())
}

/// Reusable buffers for stepping replicas.
#[derive(Debug, Default)]
pub struct Workspace<T: Real> {
    pub dists: StepDistributions<T>,
    buf: Vec<C<T>>,
}

impl<T: Real> Workspace<T> {
    pub fn new() -> Self {
        Self {
            dists: StepDistributions::default(),
            buf: Vec::new(),
        }
    }
}

/// Evolves the replicas through their channels and fills `ws.dists` with clipped distributions.
pub fn evolve_and_measure<T: Real>(
    states: &mut StateTriplet<T>,
    channels: &ChannelTriplet<T>,
    scheme: &MeasurementScheme<T>,
    ws: &mut Workspace<T>,
) -> Result<()> {
    for r in 0..3 {
        channels[r].apply(&mut states[r], &mut ws.buf)?;
        let out = ws.dists.replica_mut(r);
        scheme.probabilities_into(&states[r], out)?;
        clip_probabilities(out)?;
    }
    Ok(())
}

/// Draws an outcome from `probs` (normalised up to rounding).
pub fn sample_outcome<T: Real, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> Result<usize> {
    let total = probs.iter().fold(T::zero(), |a, &p| a + p);
    if !(total > T::zero()) {
        return Err(Error::Numerical("outcome distribution has no mass".into()));
    }
    let u = T::lit(rng.gen::<f64>()) * total;
    let mut acc = T::zero();
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > T::zero() {
            acc += p;
            last = k;
            if u < acc {
                return Ok(k);
            }
        }
    }
    Ok(last)
}

/// Collapses all three replicas onto `outcome`, each renormalised by its own probability.
pub fn collapse_triplet<T: Real>(
    states: &mut StateTriplet<T>,
    scheme: &MeasurementScheme<T>,
    dists: &StepDistributions<T>,
    outcome: usize,
) -> Result<()> {
    for (r, state) in states.iter_mut().enumerate() {
        scheme.collapse(state, outcome, dists.replica(r)[outcome])?;
    }
    Ok(())
}

/// One protocol step: evolve, sample from the centre replica, collapse all replicas.
///
/// `step` (1-based) only labels errors. On return `ws.dists` holds the
/// distributions of this step.
pub fn protocol_step<T: Real, R: Rng + ?Sized>(
    states: &mut StateTriplet<T>,
    channels: &ChannelTriplet<T>,
    scheme: &MeasurementScheme<T>,
    rng: &mut R,
    ws: &mut Workspace<T>,
    step: usize,
) -> Result<StepOutcome<T>> {
    evolve_and_measure(states, channels, scheme, ws)?;
    let outcome = sample_outcome(&ws.dists.center, rng)?;
    let d = &ws.dists;
    let (pc, pp, pm) = (d.center[outcome], d.plus[outcome], d.minus[outcome]);
    if !(pc > T::zero()) {
        return Err(Error::Numerical(format!("sampled outcome {outcome} has zero probability")));
    }
    let eps = T::lit(EPS_COND);
    if pp < eps || pm < eps {
        return Err(Error::DegenerateReplica {
            step,
            outcome,
            prob: pp.min(pm).to_f64_lossy(),
        });
    }
    collapse_triplet(states, scheme, &ws.dists, outcome)?;
    Ok(StepOutcome {
        outcome,
        prob_center: pc,
        prob_plus: pp,
        prob_minus: pm,
    })
}

/// Runs `n_seq` protocol steps, calling `on_step` after each.
pub fn run_trajectory<T: Real, R: Rng + ?Sized>(
    channels: &ChannelTriplet<T>,
    scheme: &MeasurementScheme<T>,
    initial: &ProbeState<T>,
    n_seq: usize,
    rng: &mut R,
    ws: &mut Workspace<T>,
    mut on_step: impl FnMut(usize, &StepOutcome<T>, &StepDistributions<T>),
) -> Result<()> {
    let mut states = [initial.clone(), initial.clone(), initial.clone()];
    for n in 1..=n_seq {
        let out = protocol_step(&mut states, channels, scheme, rng, ws, n)?;
        on_step(n, &out, &ws.dists);
    }
    Ok(())
}

/// Samples one trajectory of the model at `lambda`; deterministic in `seed`.
pub fn sample_trajectory<T: Real>(
    model: &dyn ParametricModel<T>,
    scheme: &MeasurementScheme<T>,
    lambda: T,
    h: T,
    n_seq: usize,
    seed: u64,
) -> Result<TrajectoryRecord<T>> {
    if n_seq == 0 {
        return Err(Error::param("n_seq", "must be at least 1"));
    }
    let channels = channel_triplet(model, lambda, h)?;
    let mut rng = rng_from_seed(seed);
    let mut ws = Workspace::new();
    let mut steps = Vec::with_capacity(n_seq);
    run_trajectory(&channels, scheme, &model.initial_state(), n_seq, &mut rng, &mut ws, |_, s, _| {
        steps.push(*s)
    })?;
    Ok(TrajectoryRecord { seed, steps })
}

/// Outcome record of a single (unshifted) replica.
pub fn sample_outcomes<T: Real, R: Rng + ?Sized>(
    channel: &Channel<T>,
    scheme: &MeasurementScheme<T>,
    initial: &ProbeState<T>,
    n_seq: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut state = initial.clone();
    let mut buf = Vec::new();
    let mut probs = Vec::new();
    let mut out = Vec::with_capacity(n_seq);
    for _ in 0..n_seq {
        channel.apply(&mut state, &mut buf)?;
        scheme.probabilities_into(&state, &mut probs)?;
        clip_probabilities(&mut probs)?;
        let g = sample_outcome(&probs, rng)?;
        scheme.collapse(&mut state, g, probs[g])?;
        out.push(g);
    }
    Ok(out)
}
