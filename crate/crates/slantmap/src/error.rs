use thiserror::Error;

use crate::descriptor::DescriptorError;
use crate::frame::FrameError;
use crate::geometry::GeometryError;
use crate::inequalities::InequalityError;
use crate::kenmotsu::KenmotsuError;
use crate::map::MapError;
use crate::slant::SlantError;

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Structure(#[from] KenmotsuError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Slant(#[from] SlantError),
    #[error(transparent)]
    Inequality(#[from] InequalityError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error("unknown fixture '{0}'")]
    FixtureMissing(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
