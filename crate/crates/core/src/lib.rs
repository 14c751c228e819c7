//! Transfer-operator calculus for rational maps of the Riemann sphere.
//!
//! The crate covers:
//!
//! * [`rational_map`]: maps `P/Q`, Möbius normalization onto `0, 1, ∞`,
//!   preimages, critical data and orbits with derivative cocycles;
//! * [`kernels`]: the rational kernels `γ_a`, `τ_a`, their finite linear
//!   combinations and Monte-Carlo `L¹` norms;
//! * [`ruelle_operator`]: the Ruelle transfer operator `R*` both as a
//!   preimage sum and in closed form on the kernel span, with the
//!   pushforward, modulus and Beltrami operators;
//! * [`series`]: forward, modified and backward Ruelle–Poincaré series,
//!   summability diagnostics and the functional relations between them;
//! * [`stability`]: relation coefficients, triviality tests, instability
//!   certificates and the rank of the relation system.
//!
//! ```
//! use num_complex::Complex64;
//! use ruelle_kit::{fixtures, ruelle_operator::TransferOperator, rational_map::Tolerances};
//!
//! let op = TransferOperator::new(fixtures::z_squared(), Tolerances::default()).unwrap();
//! let value = op
//!     .apply_pointwise(&|y: Complex64| 1.0 / (y - 2.0), Complex64::new(1.0, 0.0))
//!     .unwrap();
//! assert!((value - (-1.0 / 3.0)).norm() < 1e-12);
//! ```

pub mod error;
pub mod fixtures;
pub mod kernels;
pub mod numeric;
pub mod probes;
pub mod rational_map;
pub mod ruelle_operator;
pub mod series;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::{Kernel, KernelCombination, KernelKind};
pub use rational_map::{CriticalData, RationalMap, Tolerances};
pub use ruelle_operator::TransferOperator;
