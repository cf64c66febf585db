//! Maximization of the Bell value: simplex search over the analytic family
//! and the seesaw loop over general states and measurements.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the user seed, the
//! dimension, the kind of search and the restart index, so reported numbers
//! can be replayed.

mod chart;
mod family;
mod sdp;
mod seesaw;
mod simplex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use chart::{free_from_params, parameterize_free, FREE_DIM};
pub use family::{
    curve, full_objective, full_seed, log_spaced_dims, optimize_full, optimize_full_from, optimize_reduced,
    reduced_grid_seed, reduced_objective, CurveMode, CurvePoint, Diagnostics, FamilyOptimum, ReducedOptimum,
};
pub use sdp::{sdp_solve, sdp_solve_best_effort, SdpProblem, SdpSolution, SymSparse};
pub use seesaw::{
    alice_effective_operators, bob_effective_operators, optimal_ppt_state, restricted_dimension_search,
    seesaw, seesaw_from, seesaw_functional, self_consistency_residual, SeesawConfig, SeesawResult,
};
pub use simplex::{nelder_mead, SimplexConfig, SimplexResult};

/// Kind of search a random stream belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Full = 0,
    Reduced = 1,
    Seesaw = 2,
    Restricted = 3,
}

/// Stream identifier for dimension `d` and `purpose`.
pub fn stream_key(d: usize, purpose: Purpose) -> u64 {
    ((d as u64) << 8) | purpose as u64
}

/// Generator for restart `restart` of stream `stream` under the user seed.
pub fn stream_rng(seed: u64, stream: u64, restart: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_mul(0x1_0000_0000).wrapping_add(restart));
    rng
}
