//! Workbench for two-player communication games on finite matrices.
//!
//! The crate builds interlaced game families, computes exact deterministic
//! communication complexity of small game matrices by protocol-tree search,
//! and mechanically checks the combinatorial lemmas (projections, balancing,
//! bracket-set inequalities, direct-sum upper bounds) that the construction
//! rests on, at desk scale.

pub mod bracket;
pub mod constants;
pub mod directsum;
pub mod error;
pub mod interlace;
pub mod matrix;
pub mod report;
pub mod selection;
pub mod solver;
pub mod subgame;
pub mod suites;

pub use error::{Error, Result};
pub use matrix::{pad_to_family, phi_dimensions, CellGuard, GameMatrix, PhiDims};
