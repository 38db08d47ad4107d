//! Phase-space quantum hydrodynamics on superpositions of squeezed coherent states.
//!
//! - [`gauss`]: special functions and closed-form pair integrals.
//! - [`fields`]: Wigner/Husimi densities, flows, gauges and velocity fields.
//! - [`propagator`]: basis trajectories and least-squares amplitude dynamics.
//! - [`grid`]: split-operator reference solver and shared observables.
//! - [`io`]: scenarios, manifests, experiment drivers and CSV output.

pub mod fields;
pub mod gauss;
pub mod grid;
pub mod io;
pub mod potential;
pub mod propagator;

pub use fields::{Ansatz, GaugeSpec, HusimiWidths};
pub use gauss::{BasisState, Mode};
pub use potential::{Potential, PotentialTerm};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("pair terms require equal basis widths")]
    WidthMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("density {density:e} below floor {floor:e} at p={p:?}, x={x:?}")]
    DensityFloor { density: f64, floor: f64, p: Vec<f64>, x: Vec<f64> },
    #[error("node proximity: |psi| = {amplitude:e} below floor at x = {x}")]
    NodeProximity { amplitude: f64, x: f64 },
    #[error("least-squares solve failed: {0}")]
    Solver(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("boundary leak: edge amplitude ratio {0:e}")]
    BoundaryLeak(f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
