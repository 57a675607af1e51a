//! Orientation, functional encoding and transitive-fraternal augmentation.

pub mod laws;
pub mod levels;
pub mod orient;

pub use levels::{
    augment_once, augment_to, expansion_profile, ArcLevel, Augmenter, ExpansionProfile, Hierarchy, Realizer,
    DEFAULT_SYMBOL_CAP,
};
pub use orient::{degeneracy_orient, functionalize, OrientedGraph, UndirectedGraph};
