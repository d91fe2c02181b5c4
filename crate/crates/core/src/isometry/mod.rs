//! Elements of PU(1,n): validation, action, classification, the Bergman
//! distance, finite-order detection and word enumeration.

mod classify;
mod element;
mod words;

pub use classify::{classify, classify_with, ElementClass, ElementKind};
pub use element::{
    act, bergman_distance, bergman_vectors, finite_order, make_element, orbit_distance,
    GroupElement,
};
pub use words::{parse_word, words, GroupSpec, Letter, Word};
