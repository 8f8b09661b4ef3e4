//! Information-theoretic robot exploration on 2D occupancy grids.
//!
//! The crate simulates a robot carrying a limited-FOV beam range sensor that
//! explores an unknown map by repeatedly picking the candidate pose with the
//! highest expected Shannon mutual information (MI). Evaluating MI exactly is
//! expensive, so only a small batch of candidates is evaluated explicitly and
//! a surrogate predicts the rest:
//!
//! * [`bki`] — Bayesian kernel inference: closed-form posterior mean and
//!   variance of MI from kernel-weighted sums, linear in the training size.
//! * [`gp`] — a Gaussian-process regression baseline with the same kernel.
//!
//! Supporting modules cover the occupancy grid ([`grid`]), the simulated
//! sensor ([`sensor`]), exact MI evaluation ([`mi`]), the exploration loop
//! with A* path execution ([`exploration`]) and the Monte Carlo benchmark
//! harness with map generators and CSV output ([`bench`]).

pub mod action;
pub mod bench;
pub mod bki;
pub mod error;
pub mod exploration;
pub mod gp;
pub mod grid;
pub mod mi;
pub mod sensor;

pub use action::Action;
pub use bki::{BkiHyperparams, KernelSpec, MiPrediction, TrainingSet};
pub use error::{Error, Result};
pub use grid::{CellIndex, CellRay, CellState, GroundTruthGrid, InverseSensorModel, OccupancyGrid};
pub use sensor::{BeamScan, SensorSpec};
