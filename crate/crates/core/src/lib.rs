//! Forward and inverse spectral toolkit for second-order Sturm-Liouville
//! problems with a retarded argument and a finite number of transmission
//! conditions.
//!
//! The problem under study is
//!
//! ```text
//! y''(t) + q(t) y(t - Δ(t)) + μ² y(t) = 0,   t ∈ [0, π],
//! ```
//!
//! with μ-dependent boundary conditions at both endpoints and proportional
//! jump (transmission) conditions `y(θᵢ-) = δᵢ y(θᵢ+)` at interior points
//! θ₁ < … < θ_m. The crate provides:
//!
//! - [`expr`]: a small expression language for the coefficient functions
//!   `q(t)` and the delay `Δ(t)`, plus sampled-table functions;
//! - [`problem`]: the problem description and its validation;
//! - [`integrate`]: a method-of-steps shooting integrator with dense output,
//!   and an independent Picard (successive approximation) oracle;
//! - [`spectrum`]: the characteristic function Ξ(μ) and eigenvalue location;
//! - [`asymptotics`]: oscillatory integrals U±, V± and asymptotic estimates;
//! - [`trace`]: the regularized trace identity (closed form vs partial sums);
//! - [`nodal`]: eigenfunction nodal points, numeric and asymptotic;
//! - [`inverse`]: the nodal limit function and potential reconstruction;
//! - [`cli`]: a batch front end over JSON configs emitting CSV/JSON reports.
//!
//! # Example
//!
//! ```
//! use slrt::{presets, spectrum, integrate::SolverControl};
//!
//! // A transmission problem with q ≡ 0: the characteristic function is
//! // μ³ sin(μπ), so the positive eigen-roots are the integers.
//! let spec = presets::t0();
//! let ctl = SolverControl::default();
//! let rec = spectrum::find_eigenvalue(&spec, spectrum::SpectralIndex::pos(5), 0.25, &ctl)
//!     .unwrap();
//! assert!((rec.root.re - 4.0).abs() < 1e-6);
//! ```

pub mod asymptotics;
pub mod cli;
pub mod expr;
pub mod integrate;
pub mod inverse;
pub mod nodal;
pub mod presets;
pub mod problem;
pub mod scalar;
pub mod spectrum;
pub mod trace;
