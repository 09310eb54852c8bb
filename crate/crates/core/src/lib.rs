//! Compatibility radii of qubit POVMs and the shared-randomness cost of
//! simulating Werner-state assemblages.
//!
//! A parent POVM `{alpha_i (I + eta_i n_i.sigma)}` simulates every noisy spin
//! measurement `(I +- r m.sigma)/2` exactly when `r` is at most its
//! compatibility radius. The radius is the inradius of the region of unbiased
//! dichotomic measurements the parent can produce, and is computed here by
//! exact facet enumeration. A parent with `n` outcomes turns into an `n`-state
//! local-hidden-state model for the Werner state of singlet weight `r`.

pub mod bloch;
pub mod bounds;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod lhs;
pub mod lp;
pub mod radius;
pub mod search;
pub mod tables;
pub mod weights;

pub use bloch::{QubitEffect, QubitPovm, UnitVec3, Vec3};
pub use error::{Error, Result};
