//! Physical probes: Hamiltonian / Liouvillian builders, measurement schemes
//! and the parametrised interval channels the sequential engine consumes.

pub mod channel;
pub mod jc;
pub mod lindblad;
pub mod scheme;
pub mod spec;
pub mod spin;

use std::sync::Arc;

pub use channel::Channel;
pub use scheme::{BasisSpec, MeasurementScheme};
pub use spec::{InitialSpec, ModelSpec};

use crate::error::{Error, Result};
use crate::quantum::layout::SubsystemLayout;
use crate::quantum::propagator::SpectralPropagator;
use crate::quantum::state::ProbeState;
use crate::scalar::{CMatrix, Real};

/// A probe whose interval channel depends on one unknown parameter `λ`.
pub trait ParametricModel<T: Real>: Send + Sync {
    fn layout(&self) -> &SubsystemLayout;

    /// State every trajectory starts from.
    fn initial_state(&self) -> ProbeState<T>;

    /// The true value of `λ` the probe is operated at.
    fn nominal_lambda(&self) -> T;

    /// Channel applied between consecutive measurements when the parameter is `lambda`.
    fn channel(&self, lambda: T) -> Result<Channel<T>>;

    fn dim(&self) -> usize {
        self.layout().dim()
    }
}

impl<T: Real, M: ParametricModel<T> + ?Sized> ParametricModel<T> for Box<M> {
    fn layout(&self) -> &SubsystemLayout {
        (**self).layout()
    }
    fn initial_state(&self) -> ProbeState<T> {
        (**self).initial_state()
    }
    fn nominal_lambda(&self) -> T {
        (**self).nominal_lambda()
    }
    fn channel(&self, lambda: T) -> Result<Channel<T>> {
        (**self).channel(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    Heisenberg,
    Ising,
}

/// Which coupling of a spin chain plays the role of `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainParam {
    Field,
    Exchange,
}

/// Closed spin chain evolved by `exp(-iτH)` between measurements.
#[derive(Debug, Clone)]
pub struct SpinChain<T: Real> {
    pub kind: ChainKind,
    pub n: usize,
    pub exchange: T,
    pub field: T,
    pub tau: T,
    pub param: ChainParam,
    layout: SubsystemLayout,
    initial: ProbeState<T>,
}

impl<T: Real> SpinChain<T> {
    /// Chain starting from `|↓>^{⊗N}`.
    pub fn new(kind: ChainKind, n: usize, exchange: T, field: T, tau: T, param: ChainParam) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", "chain needs at least 2 sites"));
        }
        let layout = SubsystemLayout::qubits(n);
        let initial = ProbeState::basis(layout.dim(), spin::all_down_index(n))?;
        Ok(Self {
            kind,
            n,
            exchange,
            field,
            tau,
            param,
            layout,
            initial,
        })
    }

    pub fn with_initial_state(mut self, state: ProbeState<T>) -> Result<Self> {
        if state.dim() != self.layout.dim() {
            return Err(Error::Dimension("initial state does not match the chain".into()));
        }
        self.initial = state;
        Ok(self)
    }

    pub fn hamiltonian(&self, lambda: T) -> Result<CMatrix<T>> {
        let (j, b) = match self.param {
            ChainParam::Field => (self.exchange, lambda),
            ChainParam::Exchange => (lambda, self.field),
        };
        match self.kind {
            ChainKind::Heisenberg => spin::build_heisenberg(self.n, j, b),
            ChainKind::Ising => spin::build_ising(self.n, j, b),
        }
    }
}

impl<T: Real> ParametricModel<T> for SpinChain<T> {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }
    fn initial_state(&self) -> ProbeState<T> {
        self.initial.clone()
    }
    fn nominal_lambda(&self) -> T {
        match self.param {
            ChainParam::Field => self.field,
            ChainParam::Exchange => self.exchange,
        }
    }
    fn channel(&self, lambda: T) -> Result<Channel<T>> {
        let h = self.hamiltonian(lambda)?;
        Ok(Channel::Unitary(SpectralPropagator::new(&h)?.unitary(self.tau)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcParam {
    Coupling,
    Frequency,
}

/// Atom–field probe; the atom (site 0) is the measured subsystem.
#[derive(Debug, Clone)]
pub struct JaynesCummings<T: Real> {
    pub omega: T,
    pub coupling: T,
    pub n_max: usize,
    pub tau: T,
    pub param: JcParam,
    layout: SubsystemLayout,
    initial: ProbeState<T>,
}

impl<T: Real> JaynesCummings<T> {
    /// Starts from `|g>|α>` with the given Fock cutoff.
    pub fn new(omega: T, coupling: T, alpha: f64, n_max: usize, tau: T, param: JcParam) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::param("n_max", "Fock cutoff must be at least 1"));
        }
        let field = jc::coherent_state::<T>(alpha, n_max)?;
        Ok(Self {
            omega,
            coupling,
            n_max,
            tau,
            param,
            layout: jc::jc_layout(n_max),
            initial: jc::atom_field_state(jc::GROUND, &field),
        })
    }

    /// Replaces the initial state by `|atom> ⊗ |photons>`.
    pub fn with_fock_initial(mut self, atom: usize, photons: usize) -> Result<Self> {
        let field = jc::fock_state::<T>(photons, self.n_max)?;
        self.initial = jc::atom_field_state(atom, &field);
        Ok(self)
    }

    pub fn with_initial_state(mut self, state: ProbeState<T>) -> Result<Self> {
        if state.dim() != self.layout.dim() {
            return Err(Error::Dimension("initial state does not match the atom-field layout".into()));
        }
        self.initial = state;
        Ok(self)
    }
}

impl<T: Real> ParametricModel<T> for JaynesCummings<T> {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }
    fn initial_state(&self) -> ProbeState<T> {
        self.initial.clone()
    }
    fn nominal_lambda(&self) -> T {
        match self.param {
            JcParam::Coupling => self.coupling,
            JcParam::Frequency => self.omega,
        }
    }
    fn channel(&self, lambda: T) -> Result<Channel<T>> {
        let (omega, coupling) = match self.param {
            JcParam::Coupling => (self.omega, lambda),
            JcParam::Frequency => (lambda, self.coupling),
        };
        let h = jc::build_jc(omega, coupling, self.n_max)?;
        Ok(Channel::Unitary(SpectralPropagator::new(&h)?.unitary(self.tau)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipativeParam {
    Kappa,
    Occupation,
    Exchange,
    Field,
}

/// Heisenberg chain with local thermal amplitude damping on every site.
#[derive(Debug, Clone)]
pub struct DissipativeChain<T: Real> {
    pub n: usize,
    pub exchange: T,
    pub field: T,
    pub kappa: T,
    pub n_th: T,
    pub tau: T,
    pub param: DissipativeParam,
    layout: SubsystemLayout,
    initial: ProbeState<T>,
}

impl<T: Real> DissipativeChain<T> {
    /// Starts from the density matrix of `|↓>^{⊗N}`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(n: usize, exchange: T, field: T, kappa: T, n_th: T, tau: T, param: DissipativeParam) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", "chain needs at least 2 sites"));
        }
        if kappa < T::zero() {
            return Err(Error::param("kappa", "decay rate must be non-negative"));
        }
        if n_th < T::zero() {
            return Err(Error::param("n_th", "bath occupation must be non-negative"));
        }
        let layout = SubsystemLayout::qubits(n);
        let down = ProbeState::<T>::basis(layout.dim(), spin::all_down_index(n))?;
        Ok(Self {
            n,
            exchange,
            field,
            kappa,
            n_th,
            tau,
            param,
            initial: ProbeState::Mixed(down.to_density()),
            layout,
        })
    }

    pub fn with_initial_state(mut self, state: ProbeState<T>) -> Result<Self> {
        if state.dim() != self.layout.dim() {
            return Err(Error::Dimension("initial state does not match the chain".into()));
        }
        self.initial = ProbeState::Mixed(state.to_density());
        Ok(self)
    }

    pub fn liouvillian(&self, lambda: T) -> Result<CMatrix<T>> {
        let (mut j, mut b, mut kappa, mut n_th) = (self.exchange, self.field, self.kappa, self.n_th);
        match self.param {
            DissipativeParam::Kappa => kappa = lambda,
            DissipativeParam::Occupation => n_th = lambda,
            DissipativeParam::Exchange => j = lambda,
            DissipativeParam::Field => b = lambda,
        }
        let h = spin::build_heisenberg(self.n, j, b)?;
        lindblad::build_lindblad_superop(&h, kappa, n_th, &self.layout)
    }
}

impl<T: Real> ParametricModel<T> for DissipativeChain<T> {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }
    fn initial_state(&self) -> ProbeState<T> {
        self.initial.clone()
    }
    fn nominal_lambda(&self) -> T {
        match self.param {
            DissipativeParam::Kappa => self.kappa,
            DissipativeParam::Occupation => self.n_th,
            DissipativeParam::Exchange => self.exchange,
            DissipativeParam::Field => self.field,
        }
    }
    fn channel(&self, lambda: T) -> Result<Channel<T>> {
        let l = self.liouvillian(lambda)?;
        Ok(Channel::Superoperator(lindblad::lindblad_propagator(&l, self.tau)?))
    }
}

/// A `λ`-independent unitary interval (e.g. a Haar-random one).
#[derive(Debug, Clone)]
pub struct FixedUnitary<T: Real> {
    layout: SubsystemLayout,
    unitary: CMatrix<T>,
    initial: ProbeState<T>,
}

impl<T: Real> FixedUnitary<T> {
    pub fn new(layout: SubsystemLayout, unitary: CMatrix<T>, initial: ProbeState<T>) -> Result<Self> {
        if unitary.nrows() != layout.dim() || initial.dim() != layout.dim() {
            return Err(Error::Dimension("unitary / initial state do not match the layout".into()));
        }
        Ok(Self {
            layout,
            unitary,
            initial,
        })
    }
}

impl<T: Real> ParametricModel<T> for FixedUnitary<T> {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }
    fn initial_state(&self) -> ProbeState<T> {
        self.initial.clone()
    }
    fn nominal_lambda(&self) -> T {
        T::zero()
    }
    fn channel(&self, _lambda: T) -> Result<Channel<T>> {
        Ok(Channel::Unitary(self.unitary.clone()))
    }
}

type ChannelFn<T> = dyn Fn(T) -> Result<Channel<T>> + Send + Sync;

/// Model defined by an arbitrary channel family; handy for analytic test probes.
#[derive(Clone)]
pub struct FnModel<T: Real> {
    layout: SubsystemLayout,
    initial: ProbeState<T>,
    nominal: T,
    family: Arc<ChannelFn<T>>,
}

impl<T: Real> FnModel<T> {
    pub fn new(
        layout: SubsystemLayout,
        initial: ProbeState<T>,
        nominal: T,
        family: impl Fn(T) -> Result<Channel<T>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            layout,
            initial,
            nominal,
            family: Arc::new(family),
        }
    }
}

impl<T: Real> std::fmt::Debug for FnModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnModel")
            .field("layout", &self.layout)
            .field("nominal", &self.nominal)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ParametricModel<T> for FnModel<T> {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }
    fn initial_state(&self) -> ProbeState<T> {
        self.initial.clone()
    }
    fn nominal_lambda(&self) -> T {
        self.nominal
    }
    fn channel(&self, lambda: T) -> Result<Channel<T>> {
        (self.family)(lambda)
    }
}
