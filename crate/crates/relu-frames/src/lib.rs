//! Injectivity analysis for ReLU layers through rectifying frames.
//!
//! A layer `x -> max(0, Cx - alpha)` with weight rows `phi_i` is injective on a
//! domain `K` when, for every `x` in `K`, the rows active at `x` still span
//! the space. This crate checks that condition on samples, estimates the
//! largest bias for which it holds (by Monte-Carlo sweeps and by facet
//! geometry of the hull of the rows), and inverts injective layers.

pub mod bias;
pub mod domains;
pub mod error;
pub mod experiments;
pub mod frame;
pub mod io;
pub mod linalg;
pub mod polytope;
pub mod reconstruction;
pub mod rng;
pub mod shapes;
pub mod solvers;
pub mod stability;
pub mod tolerance;

pub use bias::{BiasEstimate, Certificate, Method, Verdict};
pub use domains::{Domain, SampleSequence, SamplingMode};
pub use error::{Error, Result};
pub use frame::{ActiveSet, BasisChoice, Bias, Frame, FrameBounds, IndexSet, RectifyingReport};
pub use polytope::{Facet, FacetStructure};
pub use tolerance::Tolerances;
