use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module in this crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A point that must lie in the open unit disk does not.
    #[error("point {0} lies outside the open unit disk")]
    OutsideDisk(Complex64),

    /// Green kernel evaluated on (or within 1e-13 of) its diagonal.
    #[error("green kernel arguments coincide near {0} (|z - w| < 1e-13)")]
    CoincidentKernelArguments(Complex64),

    /// Automorphism derivative order other than 1 or 2.
    #[error("derivative order {0} is not supported; only orders 1 and 2 exist")]
    UnsupportedDerivativeOrder(u32),

    /// Radial metric density fails positivity on [0, 1].
    #[error("metric density is not positive on the closed disk (min {min:.6e} at r = {at_radius:.6})")]
    NonPositiveDensity { min: f64, at_radius: f64 },

    /// A solver operation requires a finite analyticity bound and the metric has none.
    #[error("metric fails the approximate-analyticity gate: |(log rho^2)_w| is unbounded on the disk")]
    MetricBoundUnbounded,

    /// Grid construction or stencil preconditions violated.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A nodal field has the wrong length for its grid.
    #[error("field length {got} does not match grid with {expected} nodes")]
    FieldSizeMismatch { got: usize, expected: usize },

    /// Boundary map is not an orientation-preserving circle homeomorphism.
    #[error("boundary map is not a homeomorphism: min phase derivative {min:.6e} <= 0")]
    BoundaryNotMonotone { min: f64 },

    /// A scalar argument is outside its admissible range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// Fixed-point iteration failed to contract within the iteration budget.
    #[error("solver did not converge within {iterations} iterations (last update {last_update:.6e})")]
    SolverDiverged {
        iterations: usize,
        last_update: f64,
        /// Sup-norm update per iteration, for post-mortem output.
        history: Vec<f64>,
    },

    /// An operation requires w(0) = 0 and the map is not normalized.
    #[error("map is not origin-normalized: |w(0)| = {0:.6e} > 1e-6; postcompose with a Mobius shift first")]
    NormalizationRequired(f64),

    /// A map that must send the disk into itself has |w| >= 1 at an interior node.
    #[error("not a disk self-map: |w| = {magnitude:.12} at interior node (ring {ring}, spoke {spoke})")]
    NotSelfMap {
        magnitude: f64,
        ring: usize,
        spoke: usize,
    },

    /// More than the tolerated share of nodes had a vanishing z-derivative.
    #[error("{count} of {total} nodes have |w_z| = 0; dilatation is meaningless on this field")]
    TooManySingularNodes { count: usize, total: usize },

    /// Interpolation target outside the closed disk.
    #[error("interpolation point {0} lies outside the closed unit disk")]
    InterpolationOutsideDisk(Complex64),
}
