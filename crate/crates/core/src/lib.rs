//! Simulator and diagnostics for mean-field kinetic Langevin particle
//! systems: interacting ensembles, the law-dependent limiting process,
//! parallel couplings, transport distances, convergence-rate certificates,
//! and stationary laws.

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod gaussian;
pub mod lab;
pub mod model;
pub mod rates;
pub mod rng;
pub mod transport;

pub use dynamics::{
    gibbs_particle_system, propagate_gaussian, sample_initial, simulate_coupled, step_interacting,
    step_nonlinear, CoupledDiagnostics, CoupledPair, CoupledRun, GaussianFlowKind, InitialLaw,
    Scheme, SurrogateKind, SurrogateState,
};
pub use error::{KinError, Result};
pub use gaussian::GaussianLaw;
pub use model::{build_model, force_batch, mean_field_force, ModelSpec, PhaseState, Potential};
pub use rates::{rate_report, spectrum_quadratic, QuadraticSpectrum, RateReport, SpectrumEntry};
pub use rng::NoiseStream;
pub use transport::{kl_gaussian, l1_gaussian_grid, w2_empirical, w2_gaussian, EmpiricalCloud};
