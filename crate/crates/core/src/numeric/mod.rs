//! Numerical backstop: sampling, trajectories, conservation and rank tests.

pub mod rank;
pub mod rk4;
pub mod sampling;

pub use rank::{independence_rank, IndependenceReport};
pub use rk4::{conservation_check, integrate_trajectory, ConservationReport, Trajectory, TrajectoryError};
