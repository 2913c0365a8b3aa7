//! Dispatch from a validated configuration to the library operations.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use seqfisher_core::diagnostics::{
    jc_filter_snapshot, memory_loss_curve, rank_collapse_curve, wigner, CurveOptions, CurveSeries, FilterSnapshot,
    WignerGrid,
};
use seqfisher_core::engine::TreeOptions;
use seqfisher_core::fisher::{
    exact_fisher_for, gain_analysis, mc_fisher, time_budget_analysis, FisherSeries, GainReport, McOptions,
    TimeBudgetReport,
};
use seqfisher_core::parallel::with_threads;

use crate::config::{ExperimentKind, RunConfig};
use crate::CliError;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum Payload {
    FisherSeries(FisherSeries<f64>),
    Gain(GainReport<f64>),
    TimeBudget(TimeBudgetReport<f64>),
    Curve(CurveSeries<f64>),
    FieldSnapshots(Vec<FilterSnapshot<f64>>),
    Wigner(WignerGrid<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub config: RunConfig,
    pub version: String,
    /// Wall-clock time of the run. Not serialized, so that emitted bytes
    /// depend on the configuration alone.
    #[serde(skip)]
    pub duration: Duration,
    pub aborted: usize,
    pub excluded: usize,
    pub payload: Payload,
}

fn lambda_and_h(config: &RunConfig) -> (f64, f64) {
    (config.resolved_lambda().unwrap_or(0.0), config.h)
}

fn mc_series(config: &RunConfig) -> seqfisher_core::Result<FisherSeries<f64>> {
    let model = config.model.build::<f64>()?;
    let scheme = config.scheme.build::<f64>(&config.model)?;
    let (lambda, h) = lambda_and_h(config);
    mc_fisher(
        model.as_ref(),
        &scheme,
        lambda,
        h,
        config.n_seq,
        config.mu_max,
        config.base_seed,
        McOptions {
            threads: config.threads,
        },
    )
}

fn axis(extent: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * extent / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { extent } else { -extent + step * i as f64 })
        .collect()
}

fn dispatch(config: &RunConfig, kind: ExperimentKind) -> seqfisher_core::Result<(Payload, usize, usize)> {
    Ok(match kind {
        ExperimentKind::FisherMc => {
            let s = mc_series(config)?;
            let aborted = s.aborted;
            (Payload::FisherSeries(s), aborted, 0)
        }
        ExperimentKind::FisherExact => {
            let model = config.model.build::<f64>()?;
            let scheme = config.scheme.build::<f64>(&config.model)?;
            let (lambda, h) = lambda_and_h(config);
            let opts = TreeOptions {
                eps_prune: config.eps_prune,
                branch_cap: config.branch_cap,
            };
            let exact = exact_fisher_for(model.as_ref(), &scheme, lambda, h, config.n_seq, opts)?;
            (Payload::FisherSeries(exact.series), 0, 0)
        }
        ExperimentKind::Gain => {
            let s = mc_series(config)?;
            let aborted = s.aborted;
            (Payload::Gain(gain_analysis(&s, config.n_ref, config.threshold)?), aborted, 0)
        }
        ExperimentKind::TimeBudget => {
            let s = mc_series(config)?;
            let aborted = s.aborted;
            let report = time_budget_analysis(
                &s,
                config.total_time.unwrap_or(0.0),
                config.t_reset,
                config.resolved_t_meas(),
                config.tau(),
            )?;
            (Payload::TimeBudget(report), aborted, 0)
        }
        ExperimentKind::MemoryLoss | ExperimentKind::RankCollapse => {
            let model = config.model.build::<f64>()?;
            let scheme = config.scheme.build::<f64>(&config.model)?;
            let opts = CurveOptions {
                threads: config.threads,
                ..CurveOptions::default()
            };
            let curve = if kind == ExperimentKind::MemoryLoss {
                memory_loss_curve(model.as_ref(), &scheme, config.n_seq, config.n_traj, config.base_seed, opts)?
            } else {
                rank_collapse_curve(model.as_ref(), &scheme, config.n_seq, config.n_traj, config.base_seed, opts)?
            };
            let excluded = curve.excluded;
            (Payload::Curve(curve), 0, excluded)
        }
        ExperimentKind::JcFilter => {
            let model = config.model.build_jaynes_cummings::<f64>()?;
            let snaps = jc_filter_snapshot(&model, config.n_seq, &config.checkpoints, config.base_seed)?;
            (Payload::FieldSnapshots(snaps), 0, 0)
        }
        ExperimentKind::Wigner => {
            let model = config.model.build_jaynes_cummings::<f64>()?;
            let snaps = jc_filter_snapshot(&model, config.n_seq, &[], config.base_seed)?;
            let field = &snaps.last().expect("schedule ends at n_seq").field;
            let ax = axis(config.resolved_grid_extent(), config.grid_points);
            let grid = with_threads(config.threads, || wigner(field, &ax, &ax))??;
            (Payload::Wigner(grid), 0, 0)
        }
    })
}

/// Runs the experiment named by a validated configuration.
pub fn run(config: &RunConfig) -> Result<ResultEnvelope, CliError> {
    let kind = config.kind()?;
    let start = Instant::now();
    let (payload, aborted, excluded) = dispatch(config, kind).map_err(|e| CliError::from_core(kind.name(), e))?;
    Ok(ResultEnvelope {
        config: config.clone(),
        version: CODE_VERSION.to_string(),
        duration: start.elapsed(),
        aborted,
        excluded,
        payload,
    })
}
