//! Serializable model and measurement descriptions.

use serde::{Deserialize, Serialize};

use super::jc::{self, default_cutoff, truncation_tail, TRUNCATION_TOL};
use super::scheme::{BasisSpec, MeasurementScheme};
use super::{
    ChainKind, ChainParam, DissipativeChain, DissipativeParam, FixedUnitary, JaynesCummings, JcParam,
    ParametricModel, SpinChain,
};
use crate::error::{Error, Result};
use crate::quantum::layout::SubsystemLayout;
use crate::quantum::random::{haar_random_unitary, random_pure_state};
use crate::quantum::state::ProbeState;
use crate::scalar::Real;

/// Largest chain accepted for unitary evolution (dimension 2^10).
pub const MAX_CHAIN_SITES: usize = 10;
/// Largest chain accepted for the Liouvillian path (superoperator 1024²).
pub const MAX_LINDBLAD_SITES: usize = 5;
/// Largest Fock cutoff accepted for the atom–field model.
pub const MAX_FOCK_CUTOFF: usize = 400;

/// Name of the model coupling treated as the unknown parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaName {
    B,
    J,
    Coupling,
    Omega,
    Kappa,
    NTh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomLevel {
    Excited,
    Ground,
}

impl AtomLevel {
    pub fn index(self) -> usize {
        match self {
            AtomLevel::Excited => jc::EXCITED,
            AtomLevel::Ground => jc::GROUND,
        }
    }
}

/// Initial probe state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `|↓>^{⊗N}` for chains, `|g>|α>` for the atom–field model.
    #[default]
    Default,
    /// Computational basis state of the full probe.
    Basis { index: usize },
    /// Haar-random pure state.
    Random { seed: u64 },
    /// `|atom> ⊗ |photons>`; atom–field model only.
    Fock { photons: usize, atom: AtomLevel },
}

fn default_lambda_chain() -> LambdaName {
    LambdaName::B
}
fn default_lambda_jc() -> LambdaName {
    LambdaName::Coupling
}
fn default_lambda_lindblad() -> LambdaName {
    LambdaName::Kappa
}

/// Model block of a run configuration, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Heisenberg {
        n: usize,
        j: f64,
        b: f64,
        tau: f64,
        #[serde(default = "default_lambda_chain")]
        lambda_name: LambdaName,
        #[serde(default)]
        initial: InitialSpec,
    },
    Ising {
        n: usize,
        j: f64,
        b: f64,
        tau: f64,
        #[serde(default = "default_lambda_chain")]
        lambda_name: LambdaName,
        #[serde(default)]
        initial: InitialSpec,
    },
    JaynesCummings {
        omega: f64,
        coupling: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_max: Option<usize>,
        tau: f64,
        #[serde(default = "default_lambda_jc")]
        lambda_name: LambdaName,
        #[serde(default)]
        initial: InitialSpec,
    },
    LindbladChain {
        n: usize,
        j: f64,
        #[serde(default)]
        b: f64,
        kappa: f64,
        n_th: f64,
        tau: f64,
        #[serde(default = "default_lambda_lindblad")]
        lambda_name: LambdaName,
        #[serde(default)]
        initial: InitialSpec,
    },
    RandomUnitary {
        n: usize,
        seed: u64,
        #[serde(default)]
        initial: InitialSpec,
    },
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, "must be a finite number"))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be > 0, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be >= 0, got {v}")))
    }
}

fn sites_in(name: &'static str, n: usize, max: usize) -> Result<()> {
    if (2..=max).contains(&n) {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in [2, {max}], got {n}")))
    }
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Heisenberg { .. } => "heisenberg",
            ModelSpec::Ising { .. } => "ising",
            ModelSpec::JaynesCummings { .. } => "jaynes_cummings",
            ModelSpec::LindbladChain { .. } => "lindblad_chain",
            ModelSpec::RandomUnitary { .. } => "random_unitary",
        }
    }

    /// Fock cutoff actually used by the atom–field model.
    pub fn resolved_n_max(&self) -> Option<usize> {
        match self {
            ModelSpec::JaynesCummings { alpha, n_max, .. } => Some(n_max.unwrap_or_else(|| default_cutoff(*alpha))),
            _ => None,
        }
    }

    /// Subsystem layout of the probe.
    pub fn layout(&self) -> SubsystemLayout {
        match self {
            ModelSpec::Heisenberg { n, .. }
            | ModelSpec::Ising { n, .. }
            | ModelSpec::LindbladChain { n, .. }
            | ModelSpec::RandomUnitary { n, .. } => SubsystemLayout::qubits(*n),
            ModelSpec::JaynesCummings { .. } => jc::jc_layout(self.resolved_n_max().unwrap_or(1)),
        }
    }

    /// Measured site when the configuration does not name one: the last
    /// chain site, the atom, or the first qubit of a random unitary.
    pub fn default_site(&self) -> usize {
        match self {
            ModelSpec::Heisenberg { n, .. } | ModelSpec::Ising { n, .. } | ModelSpec::LindbladChain { n, .. } => n - 1,
            ModelSpec::JaynesCummings { .. } | ModelSpec::RandomUnitary { .. } => 0,
        }
    }

    pub fn lambda_name(&self) -> Option<LambdaName> {
        match self {
            ModelSpec::Heisenberg { lambda_name, .. }
            | ModelSpec::Ising { lambda_name, .. }
            | ModelSpec::JaynesCummings { lambda_name, .. }
            | ModelSpec::LindbladChain { lambda_name, .. } => Some(*lambda_name),
            ModelSpec::RandomUnitary { .. } => None,
        }
    }

    fn initial(&self) -> &InitialSpec {
        match self {
            ModelSpec::Heisenberg { initial, .. }
            | ModelSpec::Ising { initial, .. }
            | ModelSpec::JaynesCummings { initial, .. }
            | ModelSpec::LindbladChain { initial, .. }
            | ModelSpec::RandomUnitary { initial, .. } => initial,
        }
    }

    /// Checks every field against the builders' preconditions.
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Heisenberg { n, j, b, tau, lambda_name, .. } | ModelSpec::Ising { n, j, b, tau, lambda_name, .. } => {
                sites_in("n", *n, MAX_CHAIN_SITES)?;
                positive("j", *j)?;
                finite("b", *b)?;
                positive("tau", *tau)?;
                if !matches!(lambda_name, LambdaName::B | LambdaName::J) {
                    return Err(Error::param("lambda_name", "spin chains estimate `b` or `j`"));
                }
            }
            ModelSpec::JaynesCummings { omega, coupling, alpha, n_max, tau, lambda_name, .. } => {
                positive("omega", *omega)?;
                finite("coupling", *coupling)?;
                finite("alpha", *alpha)?;
                positive("tau", *tau)?;
                let cutoff = n_max.unwrap_or_else(|| default_cutoff(*alpha));
                if !(1..=MAX_FOCK_CUTOFF).contains(&cutoff) {
                    return Err(Error::param("n_max", format!("must lie in [1, {MAX_FOCK_CUTOFF}], got {cutoff}")));
                }
                let tail = truncation_tail(*alpha, cutoff);
                if tail >= TRUNCATION_TOL {
                    return Err(Error::param(
                        "n_max",
                        format!("cutoff {cutoff} leaves coherent-state weight {tail:e} above {TRUNCATION_TOL:e}"),
                    ));
                }
                if !matches!(lambda_name, LambdaName::Coupling | LambdaName::Omega) {
                    return Err(Error::param("lambda_name", "the atom-field model estimates `coupling` or `omega`"));
                }
            }
            ModelSpec::LindbladChain { n, j, b, kappa, n_th, tau, lambda_name, .. } => {
                sites_in("n", *n, MAX_LINDBLAD_SITES)?;
                positive("j", *j)?;
                finite("b", *b)?;
                non_negative("kappa", *kappa)?;
                non_negative("n_th", *n_th)?;
                positive("tau", *tau)?;
                if matches!(lambda_name, LambdaName::Coupling | LambdaName::Omega) {
                    return Err(Error::param("lambda_name", "the dissipative chain estimates `kappa`, `n_th`, `j` or `b`"));
                }
            }
            ModelSpec::RandomUnitary { n, .. } => {
                if !(1..=MAX_CHAIN_SITES).contains(n) {
                    return Err(Error::param("n", format!("must lie in [1, {MAX_CHAIN_SITES}], got {n}")));
                }
            }
        }
        let dim = self.layout().dim();
        match self.initial() {
            InitialSpec::Default | InitialSpec::Random { .. } => {}
            InitialSpec::Basis { index } => {
                if *index >= dim {
                    return Err(Error::param("initial", format!("basis index {index} outside dimension {dim}")));
                }
            }
            InitialSpec::Fock { photons, .. } => {
                let Some(cutoff) = self.resolved_n_max() else {
                    return Err(Error::param("initial", "Fock initial states need the atom-field model"));
                };
                if *photons > cutoff {
                    return Err(Error::param("initial", format!("{photons} photons exceed the cutoff {cutoff}")));
                }
            }
        }
        Ok(())
    }

    fn initial_override<T: Real>(&self, dim: usize) -> Result<Option<ProbeState<T>>> {
        Ok(match self.initial() {
            InitialSpec::Default | InitialSpec::Fock { .. } => None,
            InitialSpec::Basis { index } => Some(ProbeState::basis(dim, *index)?),
            InitialSpec::Random { seed } => Some(random_pure_state(dim, *seed)),
        })
    }

    /// Builds the atom–field model with its concrete type.
    pub fn build_jaynes_cummings<T: Real>(&self) -> Result<JaynesCummings<T>> {
        let ModelSpec::JaynesCummings { omega, coupling, alpha, tau, lambda_name, initial: init, .. } = self else {
            return Err(Error::param("family", format!("expected jaynes_cummings, got {}", self.family())));
        };
        self.validate()?;
        let param = if *lambda_name == LambdaName::Omega { JcParam::Frequency } else { JcParam::Coupling };
        let cutoff = self.resolved_n_max().expect("atom-field model");
        let mut m = JaynesCummings::new(T::lit(*omega), T::lit(*coupling), *alpha, cutoff, T::lit(*tau), param)?;
        if let InitialSpec::Fock { photons, atom } = init {
            m = m.with_fock_initial(atom.index(), *photons)?;
        }
        if let Some(s) = self.initial_override::<T>(self.layout().dim())? {
            m = m.with_initial_state(s)?;
        }
        Ok(m)
    }

    /// Builds the parametrised model after validation.
    pub fn build<T: Real>(&self) -> Result<Box<dyn ParametricModel<T>>> {
        self.validate()?;
        let dim = self.layout().dim();
        let initial = self.initial_override::<T>(dim)?;
        let model: Box<dyn ParametricModel<T>> = match self {
            ModelSpec::Heisenberg { n, j, b, tau, lambda_name, .. } | ModelSpec::Ising { n, j, b, tau, lambda_name, .. } => {
                let kind = if matches!(self, ModelSpec::Heisenberg { .. }) {
                    ChainKind::Heisenberg
                } else {
                    ChainKind::Ising
                };
                let param = if *lambda_name == LambdaName::J { ChainParam::Exchange } else { ChainParam::Field };
                let mut chain = SpinChain::new(kind, *n, T::lit(*j), T::lit(*b), T::lit(*tau), param)?;
                if let Some(s) = initial {
                    chain = chain.with_initial_state(s)?;
                }
                Box::new(chain)
            }
            ModelSpec::JaynesCummings { .. } => Box::new(self.build_jaynes_cummings::<T>()?),
            ModelSpec::LindbladChain { n, j, b, kappa, n_th, tau, lambda_name, .. } => {
                let param = match lambda_name {
                    LambdaName::Kappa => DissipativeParam::Kappa,
                    LambdaName::NTh => DissipativeParam::Occupation,
                    LambdaName::J => DissipativeParam::Exchange,
                    _ => DissipativeParam::Field,
                };
                let mut m = DissipativeChain::new(*n, T::lit(*j), T::lit(*b), T::lit(*kappa), T::lit(*n_th), T::lit(*tau), param)?;
                if let Some(s) = initial {
                    m = m.with_initial_state(s)?;
                }
                Box::new(m)
            }
            ModelSpec::RandomUnitary { n, seed, .. } => {
                let layout = SubsystemLayout::qubits(*n);
                let state = match initial {
                    Some(s) => s,
                    None => ProbeState::basis(dim, dim - 1)?,
                };
                Box::new(FixedUnitary::new(layout, haar_random_unitary(dim, *seed), state)?)
            }
        };
        Ok(model)
    }
}

/// Measurement block of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    /// Measured site, counted from 0; defaults to the model's natural site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    #[serde(default)]
    pub basis: BasisSpec,
}

impl SchemeSpec {
    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        let layout = model.layout();
        let site = self.site.unwrap_or_else(|| model.default_site());
        if site >= layout.num_sites() {
            return Err(Error::param("site", format!("site {site} outside a probe of {} sites", layout.num_sites())));
        }
        // building the scheme checks basis size and orthonormality
        MeasurementScheme::<f64>::from_spec(&self.basis, &layout, site).map(|_| ())
    }

    pub fn build<T: Real>(&self, model: &ModelSpec) -> Result<MeasurementScheme<T>> {
        let layout = model.layout();
        let site = self.site.unwrap_or_else(|| model.default_site());
        MeasurementScheme::from_spec(&self.basis, &layout, site)
    }
}
