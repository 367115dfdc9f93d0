//! Exact combinatorial engine for the arc operad of weighted arc families.

pub mod arc;
pub mod cacti;
pub mod chain;
pub mod circle;
pub mod error;
pub mod glue;
pub mod io;
pub mod laws;
pub mod loops;
pub mod random;
pub mod rational;
pub mod render;
pub mod trees;
pub mod twisted;

pub use arc::{
    Arc, ArcCombinatorics, EndpointRef, Hand, Predicate, ProjectiveArcFamily, Region, Side,
    SurfaceSig, WeightedArcFamily,
};
pub use error::{Error, Result};
pub use rational::Q;
