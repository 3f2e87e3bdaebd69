//! Exact imbalanced consensus division of piecewise-constant measures.
//!
//! Given agents whose valuations are step functions on `[0, 1]` (or the
//! circle), an α-imbalanced consensus division cuts the domain into pieces
//! labeled `+` and `−` so that every agent values the `+` pieces at exactly
//! α. The crate covers:
//!
//! * [`fractions`]: Farey adjacency, the generated ratio set `Q*`, the
//!   `Q_p^m` ladders and the cut-count bounds built on them;
//! * [`measures`]: instances, divisions and exact verification;
//! * [`solver`]: an exhaustive exact solver under a cut budget, with
//!   feasibility and infeasibility certificates;
//! * [`generators`]: lower-bound layouts, the Exactly-1-3SAT gadget and
//!   seeded random instances;
//! * [`pipelines`]: the constructive upper-bound reductions, built on the
//!   solver as a k-division oracle;
//! * [`necklace`]: the discrete necklace version and conversions;
//! * [`io`] and [`cli`]: JSON documents and the `icd` command line.
//!
//! All arithmetic is exact; see [`Ratio`].

pub mod cli;
pub mod error;
pub mod fractions;
pub mod generators;
pub mod io;
pub mod lp;
pub mod measures;
pub mod necklace;
pub mod pipelines;
pub mod ratio;
pub mod solver;

pub use error::{Error, Result};
pub use measures::{Agent, Division, Domain, Instance, TargetSpec, ValueBlock};
pub use ratio::Ratio;
pub use solver::{Certificate, SearchConfig};
