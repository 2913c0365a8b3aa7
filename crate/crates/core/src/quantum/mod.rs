//! Dense complex linear algebra for finite-dimensional quantum systems.

pub mod layout;
pub mod ops;
pub mod propagator;
pub mod random;
pub mod state;

pub use layout::{kron, tensor_embed, SubsystemLayout};
pub use ops::singular_ratio;
pub use propagator::{expm, unitary_propagator, SpectralPropagator};
pub use random::{haar_random_unitary, random_pure_state, rng_from_seed, stream_seed, SimRng};
pub use state::{fidelity, ProbeState};
