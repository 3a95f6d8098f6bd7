//! Certified unit-distance witnesses: exact Cayley-Menger arithmetic, finite
//! witness graphs for a dense family of distances, their floating-point
//! realisations, and the quadratic-field conjugation that keeps rational
//! squared distances while moving irrational ones.

pub mod cayley_menger;
pub mod density;
pub mod embed;
pub mod endo_field;
pub mod par;
pub mod rational;
pub mod sampling;
pub mod suite;
pub mod witness;
