//! Cross interpolation: maxvol row selection, matrix cross and TT-cross.

mod config;
mod matrix_cross;
mod maxvol;
mod tt_cross;

pub use config::{CrossConfig, CrossReport};
pub use matrix_cross::{matrix_cross, matrix_cross_with, MatrixCross, MatrixCrossOptions};
pub use maxvol::{maxvol, maxvol_full, Maxvol, DEFAULT_MAXVOL_SLACK};
pub use tt_cross::{tt_cross, CrossIndexSets, CrossOutput};

pub use crate::linalg::CMatrix;
