use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("root finder did not converge (residual {residual:e})")]
    RootNonConvergence { best: Vec<Complex64>, residual: f64 },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("numerator and denominator share the root {root}")]
    CommonRoot { root: Complex64 },

    #[error("point {point} is not a fixed point (residual {residual:e})")]
    NotFixed { point: String, residual: f64 },

    #[error("normalization triple is degenerate")]
    DegenerateTriple,

    #[error("map does not fix infinity (deg numerator must exceed deg denominator)")]
    InfinityNotFixed,

    #[error("map is not standard-normalized (must fix 0, 1 and infinity)")]
    NotStandard,

    #[error("critical point {point} is not simple (|R''| = {second_derivative:e})")]
    NonSimpleCritical { point: Complex64, second_derivative: f64 },

    #[error("evaluation at kernel pole {pole}")]
    KernelPole { pole: Complex64 },

    #[error("gamma kernel with base {base} is identically zero")]
    DegenerateKernel { base: Complex64 },

    #[error("base point {base} is a pole of the map")]
    PoleBase { base: Complex64 },

    #[error("|R'| = {derivative:e} at {point}: too close to a critical point")]
    IllConditioned { point: Complex64, derivative: f64 },

    #[error("orbit hits critical point at step {step} ({point})")]
    CriticalOrbit { step: usize, point: Complex64 },

    #[error("evaluation point {point} within {distance:e} of orbit point")]
    ProximityCollision { point: Complex64, distance: f64 },

    #[error("critical point {index} is not summable (fitted ratio {ratio})")]
    NotSummable { index: usize, ratio: f64 },

    #[error("critical index {index} out of range ({count} finite critical points)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
