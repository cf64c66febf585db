//! The measurement and state families on `d × d` systems.
//!
//! Basis vector `|j, k>` is row `j·d + k` (Alice first). Settings, outcomes
//! and the θ vectors are numbered from zero, so the one-based `θ_p`
//! (`p = 1..d-1`) is `frame.theta(p - 1)`.

mod frame;
mod measurement;
mod state;

pub use frame::{phi_identity_residual, phi_vectors, theta_frame, x_vector, FrameResiduals, ThetaFrame};
pub use measurement::{
    behavior, bell_operator, build_measurements, measurement_vectors, MeasurementParams, MeasurementSet,
    MeasurementVectors,
};
pub use state::{
    apply_gauge, assemble_density, build_state_vectors, gauge_fix, solve_constraints, zeroing_rotation,
    DensityMatrix, FreeStateParams, Sign, StateParams, StateSpectrumInfo, StateVectors, NORMALIZATION_TOL,
    STATE_PARAM_NAMES,
};
