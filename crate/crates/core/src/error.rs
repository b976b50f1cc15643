use thiserror::Error;

use crate::tileset::TileId;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("unknown tile id {0}")]
    UnknownTile(TileId),
    #[error("tile {tile} has non-positive weight {weight}")]
    NonPositiveWeight { tile: TileId, weight: f64 },
    #[error("bad direction {0:?}")]
    BadDirection(String),
    #[error("{0} tiles declared, at most {max} supported", max = crate::tileset::MAX_TILES)]
    TooManyTiles(usize),
    #[error("exemplar sample is empty")]
    EmptySample,

    #[error("bad canvas dimensions: {0}")]
    BadDims(String),
    #[error("cell {0:?} is outside the canvas")]
    OutOfBounds(Vec<usize>),
    #[error("tile {0} cannot seed an assembly")]
    InvalidSeedTile(TileId),
    #[error("cell {0:?} is already decided")]
    CellDecided(Vec<usize>),
    #[error("tile {tile} is not valid at cell {cell:?}")]
    InvalidPlacement { cell: Vec<usize>, tile: TileId },
    #[error("frontier is empty")]
    NoFrontier,

    #[error("action {0} is masked out")]
    IllegalAction(TileId),
    #[error("episode already finished")]
    EpisodeFinished,
    #[error("invalid reward spec: {0}")]
    BadRewardSpec(String),

    #[error("action mask has no valid entry")]
    EmptyMask,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad architecture: {0}")]
    BadArchitecture(String),

    #[error("sequence length mismatch: {0}")]
    LengthMismatch(String),
    #[error("episode count must be at least 1")]
    BadEpisodeCount,
    #[error("invalid training config: {0}")]
    BadConfig(String),

    #[error("rank-{0} canvases cannot be rendered as text")]
    UnsupportedRank(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
