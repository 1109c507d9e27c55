//! Numerical laboratory for weak-convergence phenomena on balls, annuli and
//! cylinders: product sphere/radial quadrature, Lorentz rearrangement norms,
//! good-radius selection with certified measure bounds, explicit
//! divergence-free / curl-free field pairs whose pointwise product
//! concentrates on a line, distributional Jacobians, and a 1-D
//! non-uniformly-elliptic homogenization bench.
//!
//! The crate is organised around plain `f64` evaluations of closed-form
//! fields; every quantitative claim is backed by either a closed form or an
//! independent quadrature oracle in the test suites.

pub mod error;
pub mod geometry;
pub mod homog1d;
pub mod intervals;
pub mod jacobian;
pub mod lorentz;
pub mod pairing;
pub mod selection;
pub mod sequences;

pub use error::{Error, Result};
pub use geometry::{
    cap_area, gauss_legendre, sphere_quadrature, Dim, Domain, Field, Point, RadialGrid,
    ScalarField, SphereQuad, VectorField,
};
pub use homog1d::{
    CoefficientBoundTrack, HLimitReport, LaminateCoefficient, TwoPointSolution,
};
pub use intervals::IntervalSet;
pub use jacobian::{C1TestFunction, DetConsistency};
pub use lorentz::{StepFunction, WeightedSamples};
pub use pairing::{
    ConcentrationMass, ConcentrationReport, CylinderTestFunction, LimitEstimate, PairingTable,
};
pub use selection::{
    ExceptionalSet, SelectionResult, SphereNorm, SphereProfile, TraceNorm,
};
pub use sequences::{BetaAsymptotic, CounterexamplePair, StructureReport};
