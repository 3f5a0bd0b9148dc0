use thiserror::Error;

use crate::surface::Violation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(u64, u64),
    #[error("zero input")]
    ZeroInput,
    #[error("values are not pairwise commensurable")]
    NotCommensurable,
    #[error("expected a positive value")]
    NonPositive,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid surface: {0:?}")]
    InvalidSurface(Vec<Violation>),
    #[error("cone angle of vertex class {0} is not a multiple of 2pi")]
    NonMultipleOf2Pi(usize),
    #[error("inconsistent topology: Euler characteristic gives genus {euler}, cone angles give 2g-2 = {angle_sum}")]
    InconsistentTopology { euler: i64, angle_sum: i64 },
    #[error("start point is a singularity and the direction is not in the given sector")]
    AmbiguousStart,
    #[error("point is not on the surface")]
    PointOffSurface,
    #[error("decomposition is not complete")]
    NotComplete,
    #[error("point lies on a cylinder boundary")]
    OnBoundary,
    #[error("point does not lie in the given cylinder")]
    NotInCylinder,
    #[error("slit passes through a singularity or marked point")]
    SlitThroughSingularity,
    #[error("slit does not end at its declared endpoint")]
    SlitEndpointMismatch,
    #[error("permutation is not a transitive d-cycle")]
    NonTransitive,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("slits overlap")]
    OverlappingSlits,
    #[error("ramification profile is inconsistent")]
    InconsistentProfile,
    #[error("no saddle connections in this direction")]
    NoConnections,
    #[error("matrix is not parabolic fixing the given direction")]
    NotParabolicMatrix,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
