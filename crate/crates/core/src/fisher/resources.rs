//! Deciding when to reset: information per measurement and per unit time.

use serde::{Deserialize, Serialize};

use super::FisherSeries;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport<T: Real> {
    /// `F^(n) / n` for `n = 1..`.
    pub gain: Vec<T>,
    /// Smallest `n` with `gain(n) ≥ threshold · gain(n_ref)`.
    pub n_star: usize,
    pub n_ref: usize,
    pub threshold: T,
}

pub fn gain_analysis<T: Real>(series: &FisherSeries<T>, n_ref: usize, threshold: T) -> Result<GainReport<T>> {
    if n_ref == 0 {
        return Err(Error::param("n_ref", "must be at least 1"));
    }
    if !(threshold > T::zero() && threshold <= T::one()) {
        return Err(Error::param("threshold", "must lie in (0, 1]"));
    }
    if series.len() < n_ref {
        return Err(Error::Precondition(format!(
            "gain analysis needs at least n_ref = {n_ref} steps, the series has {}",
            series.len()
        )));
    }
    let gain: Vec<T> = series
        .cumulative
        .iter()
        .enumerate()
        .map(|(i, &f)| f / T::from_usize(i + 1).expect("step index fits the scalar type"))
        .collect();
    let target = threshold * gain[n_ref - 1];
    let n_star = gain.iter().position(|&g| g >= target).map_or(n_ref, |i| i + 1);
    Ok(GainReport {
        gain,
        n_star,
        n_ref,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBudgetReport<T: Real> {
    pub total_time: T,
    pub t_reset: T,
    pub t_meas: T,
    pub tau: T,
    /// Sequence lengths with at least one complete trajectory in the budget.
    pub n: Vec<usize>,
    /// `M = T / (t_reset + n (t_meas + τ))`.
    pub trajectories: Vec<T>,
    /// `1 / (M F^(n))`.
    pub inverse_fi: Vec<T>,
}

/// Inverse Fisher information reachable in a fixed total time.
pub fn time_budget_analysis<T: Real>(
    series: &FisherSeries<T>,
    total_time: T,
    t_reset: T,
    t_meas: T,
    tau: T,
) -> Result<TimeBudgetReport<T>> {
    if !(total_time > T::zero()) || !total_time.is_finite() {
        return Err(Error::param("total_time", "must be positive"));
    }
    if !(t_reset >= T::zero()) || !t_reset.is_finite() {
        return Err(Error::param("t_reset", "must be non-negative"));
    }
    if !(t_meas >= T::zero()) || !t_meas.is_finite() {
        return Err(Error::param("t_meas", "must be non-negative"));
    }
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(Error::param("tau", "must be positive"));
    }
    let per_step = t_meas + tau;
    let budget = |n: usize| total_time / (t_reset + T::from_usize(n).expect("fits") * per_step);
    if series.is_empty() || budget(1) < T::one() {
        return Err(Error::Precondition(
            "total time does not fit one single-measurement trajectory".into(),
        ));
    }
    let mut report = TimeBudgetReport {
        total_time,
        t_reset,
        t_meas,
        tau,
        n: Vec::new(),
        trajectories: Vec::new(),
        inverse_fi: Vec::new(),
    };
    for (i, &f) in series.cumulative.iter().enumerate() {
        let m = budget(i + 1);
        if m < T::one() {
            break;
        }
        report.n.push(i + 1);
        report.trajectories.push(m);
        report.inverse_fi.push(T::one() / (m * f));
    }
    Ok(report)
}
