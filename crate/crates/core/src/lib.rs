//! Boltzmann planar maps through labelled four-type mobiles.
//!
//! The crate solves the admissibility system of a face weight sequence,
//! samples Boltzmann maps through the BDFG bijection, builds the infinite
//! limit mobile and its balls, and measures the quenched empirical laws of
//! root neighbourhoods.

pub mod bdfg;
pub mod enumerate;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod limit;
pub mod map;
pub mod mobile;
pub mod rng;
pub mod series;
pub mod topology;
pub mod weights;

pub use error::{Error, Result};
pub use map::{PlanarMap, RootKind};
pub use mobile::{Conditioning, Mobile, TreeSampler};
pub use topology::{ball, ball_code, canonical_code, d_loc, BallCode};
pub use weights::{WeightModel, WeightSeq};
