//! Simulator and algorithm library for a guide robot that walks a person to a
//! spoken destination while keeping both of them clear of obstacles.
//!
//! The crate is organised bottom-up: [`world`] holds the ground truth and
//! sensors, [`perception`] recovers the user from depth, [`localization`]
//! maps and tracks the robot, [`planning`] produces motion commands,
//! [`dialogue`] handles text in and out, and [`harness`] wires everything
//! into a deterministic 10 Hz loop.

pub mod dialogue;
pub mod geometry;
pub mod harness;
pub mod localization;
pub mod perception;
pub mod planning;
pub mod rng;
pub mod world;
