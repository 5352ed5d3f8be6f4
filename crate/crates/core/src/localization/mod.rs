//! Occupancy mapping from scans at known poses, and Monte Carlo localization
//! against the resulting map.

mod likelihood;
mod mapping;
mod mcl;

pub use likelihood::{build_likelihood_field, LikelihoodField};
pub use mapping::{build_map, update_map, LogOddsGrid, LogOddsParams};
pub use mcl::{
    estimate_pose, low_variance_resample, mcl_step, MclConfig, MotionNoise, Particle, ParticleSet,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizationError {
    #[error("map has no occupied cells")]
    NoObstacles,
    #[error("map has no free cells to place particles on")]
    NoFreeSpace,
    #[error("need at least 2 particles, got {0}")]
    TooFewParticles(usize),
    #[error("all particle weights vanished; filter reinitialized")]
    DegenerateBelief { reinitialized: ParticleSet },
    #[error("map geometry mismatch")]
    GeometryMismatch,
}
