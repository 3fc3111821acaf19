//! Solvers for the two common-information quantities.
//!
//! [`wyner_upper`] returns certified upper bounds on Wyner's lossy common
//! information and [`gk_lower`] certified lower bounds on the Gács-Körner
//! one; [`wyner_bruteforce`] and [`gk_bruteforce`] are exhaustive oracles
//! for tiny instances.

mod gk;
mod simplex;
mod union_find;
mod wyner;

pub use gk::{
    gk_bruteforce, gk_common_part, gk_lower, gk_residuals, CommonPart, GkBruteforce, GkSolution, GRID_BUDGET,
};
pub use simplex::project_simplex;
pub use union_find::UnionFind;
pub use wyner::{wyner_bruteforce, wyner_upper, WynerOptions, WynerOrigin, WynerResiduals, WynerSolution};
