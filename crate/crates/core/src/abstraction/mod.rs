//! Coarsening of extensive-form games.

mod coarsen;
pub(crate) mod walk;

pub use coarsen::{
    branching_factor, coarsen, coarsen_infosets, condense_branching, isomorphic, Certificate, CoarseInfoset,
    CoarsenError, CoarsenedGame, CoarseningSpec, Condensed, CondensedNode, SpecEntry, Target, TupleEntry,
};
