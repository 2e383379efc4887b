//! Bell-correlation witnesses for the ground and thermal states of a
//! two-mode bosonic Josephson junction,
//!
//! `H = -J_x + (Λ/N) J_z² + δ J_z`,
//!
//! solved exactly in the symmetric (Dicke) subspace. The crate covers the
//! collective-spin algebra, a tridiagonal eigensolver, the witness
//! formulas, three noise channels (δ fluctuations, temperature, detector
//! blur), large-N closed forms and a Monte-Carlo model of the fringe fit.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix it to `f64`.
//!
//! ```
//! use bellfringe::{ground_state, ModelParams64, Rotation, WitnessReport64};
//!
//! let params = ModelParams64::new(200, -0.5, 0.0).unwrap();
//! let gs = ground_state(&params).unwrap();
//! let report = WitnessReport64::from_moments(&gs.state.moments(), 200, Rotation::None).unwrap();
//! assert!(report.a_param < 0.0);
//! ```

pub mod analytics;
pub mod error;
pub mod fringe;
pub mod model;
pub mod noise;
pub mod scalar;
pub mod spin;
pub mod tridiag;
pub mod witness;

pub use analytics::{
    analytic_boundary_sigma, analytic_boundary_t, bell_thresholds, semiclassical_ab, thermal_xi2, Regime,
    SemiclassicalPrediction,
};
pub use error::{Error, Result};
pub use fringe::{verify_sensitivity, FitMode, FitResult, FringeParams, SensitivityReport};
pub use model::{
    build_hamiltonian, full_spectrum, ground_state, low_spectrum, thermal_ensemble, GroundState, ModelParams,
    Spectrum,
};
pub use noise::{blur_visibility, delta_mixture, delta_mixture_with, DeltaMixture, MixtureOptions, NoiseConfig};
pub use scalar::Real;
pub use spin::{DickeBasis, Moments, SpinState, StateEnsemble};
pub use tridiag::SymTridiag;
pub use witness::{bell_witness, param_a, relation_check, visibility_offset, Rotation, WitnessReport};

pub type Moments64 = Moments<f64>;
pub type SpinState64 = SpinState<f64>;
pub type StateEnsemble64 = StateEnsemble<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type WitnessReport64 = WitnessReport<f64>;
pub type NoiseConfig64 = NoiseConfig<f64>;
pub type SemiclassicalPrediction64 = SemiclassicalPrediction<f64>;

/// Library version, recorded in scan outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
