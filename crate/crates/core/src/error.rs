use thiserror::Error;

use crate::grid::CellIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cell ({}, {}) is outside the {width}x{height} grid", cell.col, cell.row)]
    OutOfBounds {
        cell: CellIndex,
        width: usize,
        height: usize,
    },

    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("exploration stuck: no feasible candidate actions")]
    Stuck,

    #[error("no path from ({}, {}) to ({}, {})", from.col, from.row, to.col, to.row)]
    PlanningFailure { from: CellIndex, to: CellIndex },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
