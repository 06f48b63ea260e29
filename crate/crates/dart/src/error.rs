use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cell ({x}, {y}) out of bounds for {width}x{height} grid")]
    OutOfBounds {
        x: i32,
        y: i32,
        width: i32,
        height: i32,
    },

    #[error("grid shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("bad map file: {0}")]
    MapFormat(String),

    #[error("bad config: {0}")]
    Config(String),

    #[error("collision at ({:.3}, {:.3})", position.x, position.y)]
    Collision { position: Point },

    #[error("robot detached from graph: nearest node is {nearest:.2} m away (limit {limit:.2} m)")]
    PlannerDetached { nearest: f64, limit: f64 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
