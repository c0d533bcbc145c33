//! Error type shared by every module of the crate.
//!
//! Validation is strict and early: constructors reject malformed inputs so the
//! numerical kernels can assume well-formed data. Each rejection carries enough
//! context to identify the offending input without re-running the computation.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Largest exponent the norm engine accepts for p, r and s.
///
/// Beyond this, iterated `powf` chains lose the accuracy the crate promises,
/// so the engine refuses rather than silently degrades.
pub const MAX_EXPONENT: f64 = 512.0;

/// Hard cap on the number of axes in a product space.
pub const MAX_AXES: usize = 8;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("axis `{name}`: {points} points but {weights} weights")]
    AxisLengthMismatch {
        name: String,
        points: usize,
        weights: usize,
    },

    #[error("axis `{name}` is empty")]
    EmptyAxis { name: String },

    #[error("axis `{name}`: weight {value} at index {index} is negative or non-finite")]
    BadWeight {
        name: String,
        index: usize,
        value: f64,
    },

    #[error("axis `{name}`: point at index {index} is non-finite")]
    BadPoint { name: String, index: usize },

    #[error("axis `{name}`: total mass must be positive, got {mass}")]
    NonPositiveMass { name: String, mass: f64 },

    #[error("product space must have between 1 and {MAX_AXES} axes, got {got}")]
    AxisCountOutOfRange { got: usize },

    #[error("duplicate axis name `{name}` in product space")]
    DuplicateAxisName { name: String },

    #[error("grid shape {got:?} does not match axis lengths {expected:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("grid value at flat index {index} is non-finite")]
    NonFiniteValue { index: usize },

    #[error("exponent {value} outside the supported range [1, {MAX_EXPONENT}]")]
    ExponentOutOfRange { value: f64 },

    #[error("expected {expected} exponents, got {got}")]
    ExponentCountMismatch { expected: usize, got: usize },

    #[error("axis index {index} out of range for a space with {axes} axes")]
    AxisIndexOutOfRange { index: usize, axes: usize },

    #[error("reduction order {order:?} is not a permutation of 0..{axes}")]
    InvalidOrder { order: Vec<usize>, axes: usize },

    #[error("axis sets {x_axes:?} and {z_axes:?} do not partition 0..{axes}")]
    InvalidPartition {
        x_axes: Vec<usize>,
        z_axes: Vec<usize>,
        axes: usize,
    },

    #[error("factor for axis {axis} has {got} values, axis has {expected} points")]
    FactorLengthMismatch {
        axis: usize,
        expected: usize,
        got: usize,
    },

    #[error("replica count must be at least 1")]
    NoReplicas,

    #[error("sample set is empty")]
    EmptySamples,

    #[error("{what} must be strictly positive, got {value}")]
    NonPositiveParameter { what: &'static str, value: f64 },

    #[error("student noise needs nu > 2 for a finite second moment, got nu = {nu}")]
    StudentDegreesTooSmall { nu: f64 },

    #[error("moment grid is empty")]
    EmptyGrid,

    #[error("moment grid must be strictly increasing and inside ({a}, {b}]: offending value {value}")]
    GridOutOfDomain { a: f64, b: f64, value: f64 },

    #[error("psi value {value} at grid index {index} is not positive and finite")]
    BadPsiValue { index: usize, value: f64 },

    #[error("tables are defined on different grids and cannot be compared")]
    GridMismatch,

    #[error("order {order} not admissible: the bound needs at least {min}")]
    OrderBelowAdmissible { order: f64, min: f64 },

    #[error("conjugation needs every exponent in (1, {MAX_EXPONENT}], got {value}")]
    NotConjugable { value: f64 },

    #[error("conjugate exponent {value} of {of} exceeds the engine cap {MAX_EXPONENT}")]
    ConjugateOverflow { value: f64, of: f64 },

    #[error("kernel space must list the output axes first and then exactly the axes of `g`")]
    KernelSpaceMismatch,

    #[error("curve has {got} usable points, need at least {min} for a fit")]
    TooFewPoints { got: usize, min: usize },

    #[error("value {value} for `{what}` not found in the table grid")]
    NotOnGrid { what: &'static str, value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("could not parse `{text}` as a number")]
    ParseNumber { text: String },
}
