//! Fair-division solvers for transferable-utility coalition games.
//!
//! The centerpiece is the nucleolus: the efficient, individually rational
//! allocation whose descending-sorted vector of coalition complaints is
//! lexicographically minimal. The crate computes it three ways, which check
//! each other:
//!
//! * [`nucleolus::nucleolus`] solves a sequence of min-max linear programs
//!   with [`simplex`], freezing the coalitions pinned at each optimum;
//! * [`hydraulic::run`] relaxes a three-player allocation by letting the
//!   highest complaint levels sink until they pinch, a fluid picture of the
//!   same lexicographic minimization;
//! * [`nucleolus::brute_force_min_max`] walks a grid, for tests.
//!
//! [`bankruptcy`] applies the nucleolus to estate division among creditors,
//! where it reproduces the classical two-claimant contested-garment rule and
//! its many-creditor generalization.

pub mod bankruptcy;
pub mod game;
pub mod hydraulic;
pub mod nucleolus;
pub mod numfmt;
pub mod simplex;

pub use bankruptcy::{
    bankruptcy_game, cg_rule, talmud_division, BankruptcyError, BankruptcyInstance,
};
pub use game::{Allocation, Coalition, CoalitionGame, ExcessVector, GameError, MAX_PLAYERS};
pub use hydraulic::{SimConfig, SimError, SimState, Trace};
pub use nucleolus::{nucleolus, NucleolusError, NucleolusResult};
