//! Border aggregation (BA) model toolkit.
//!
//! A particle is released from the origin of a graph and random-walks until
//! it comes within one edge of the sticky set (initially the border), where
//! it stops and joins the set. Particles are released one by one until the
//! origin itself becomes sticky; `xi` is the total number of particles
//! emitted, including the final one that sticks at the origin.
//!
//! The crate provides:
//!
//! * [`model`] — graph families (star, regular tree, 2-D box/disc, comb,
//!   d-dimensional cube) and the generic step-by-step walk engine
//!   [`model::run_ba`], which is the reference implementation every fast
//!   engine is tested against;
//! * [`star`] — the urn and death-process engines for the star graph plus
//!   the survivor limit-law numerics;
//! * [`tree`] — the exact coin-race recursion for `xi` on the binary tree,
//!   fast d-ary simulation, and the generalized-birthday machinery;
//! * [`lattice`] — box/disc/cube aggregation, hitting-measure estimation and
//!   ring-crossing diagnostics;
//! * [`comb`] — comb-lattice aggregation with the exact embedded axis walk;
//! * [`analysis`] — sample statistics, distribution distances, normal-law
//!   utilities and log-log scaling fits;
//! * [`snapshot`] — CSV/JSON export of finished runs;
//! * [`experiment`] — the config/metadata layer behind the `ba` binary.
//!
//! Every simulation is deterministic given a 64-bit seed; replicas use
//! per-index ChaCha streams (see [`rng`]).

pub mod analysis;
pub mod comb;
mod error;
pub mod experiment;
pub mod lattice;
pub mod model;
pub mod pmf;
pub mod rng;
pub mod snapshot;
pub mod star;
pub mod tree;

pub use error::{Error, Result};
pub use model::{run_ba, BaOutcome, GraphModel, StickEvent};
pub use pmf::Pmf;
