//! Ground states of `-ΔU + U = U^{p-1}`, the constants built from them, and
//! the reduced energy that predicts where multi-peak solutions concentrate.

pub mod ansatz;
pub mod constants;
pub mod error;
pub mod ground_state;
pub mod landscape;
pub mod manifold;
pub mod profile;
pub mod quadrature;
pub mod scalar;
pub mod verify;

pub use ansatz::{
    cutoff_chi, expansion_slope_check, flat_energy, single_peak_energy_sphere, CutoffRamp,
    CutoffSpec, EnergyQuadrature, ExpansionReport,
};
pub use constants::{
    beta_table, compute_all, compute_alpha_energy, compute_beta, compute_gamma, compute_m_e,
    constants_for, sphere_volume, GroundStateConstants, REFERENCE_ROWS,
};
pub use error::{Error, Result};
pub use ground_state::{
    classify_shot, find_alpha0, integrate_profile, solve_ground_state, AlphaSearch, Dimensions,
    ShootingConfig, ShotKind, ShotOutcome,
};
pub use landscape::{
    optimize_peaks, scaled_initializer, reduced_energy, EnergyConstants, OptimizationResult,
    OptimizerConfig, PeakConfiguration, ReducedEnergyReport,
};
pub use manifold::{CurvatureField, ManifoldModel, ModelSpec};
pub use profile::{RadialIntegral, RadialIntegrand, RadialProfile, TailFit};
pub use scalar::Scalar;

pub type Profile = RadialProfile<f64>;
pub type Config = ShootingConfig<f64>;
pub type Constants = GroundStateConstants<f64>;
pub type Model = ManifoldModel<f64>;
