//! Isotonic and antitonic regression over a totally ordered index set.
//!
//! Weighted least squares is solved with pool-adjacent-violators; general
//! convex losses go through the min-max characterization of the solution set,
//! driven by a [`LossOracle`].

mod band;
mod brute;
mod oracles;
pub(crate) mod pava;

pub use band::{check_membership, minmax_band, minmax_orders, LossOracle, MinMaxOrders, SolutionBand};
pub use brute::{brute_force_band, pinball, BruteForce, IndexLoss, DEFAULT_GRID_CAP};
pub use oracles::{PinballOracle, SquaredLossOracle};
pub use pava::{pava_antitonic_ls, pava_isotonic_ls};
