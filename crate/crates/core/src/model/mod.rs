//! Finite models of bounded-arity universal theories.

mod canonical;
mod model;
mod pattern;
mod signature;
mod theory;

pub use canonical::{
    automorphism_count, canonical_form, isomorphic, labeled_encoding, set_size_limit, size_limit, CanonicalModel,
    Encoding, DEFAULT_SIZE_LIMIT,
};
pub(crate) use canonical::check_size;
pub use model::{colex_rank, supports, Model};
pub use pattern::Pattern;
pub use signature::{Diagonal, PredicateSpec, Signature};
pub use theory::{enumerate_models, enumerate_models_with, Theory};
pub(crate) use signature::permutations;
pub(crate) use theory::extend_by_one;
