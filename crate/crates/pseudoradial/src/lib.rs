//! Phase-plane toolkit for the angular equation
//! `w'' + mu*w = eps*w*|w|^(q-1)` on the circle and for separable
//! ("pseudo-radial") solutions `u(r,theta) = h(r)*w(theta)` of
//! `Laplace_g u = eps*u*|u|^(q-1)` on rotationally symmetric surfaces
//! with warped-product metrics `g = a^2(r) dr^2 + b^2(r) dtheta^2`.
//!
//! The crate is organized around the planar system `x' = y`,
//! `y' = -mu*x + eps*x|x|^(q-1)`:
//!
//! * [`phase`] — potential/energy structure, critical points, separatrices;
//! * [`integrate`] — adaptive Runge–Kutta integration with axis-crossing
//!   event detection; the brute-force period oracle;
//! * [`period`] — period functions of the closed-orbit regions via
//!   tanh-sinh quadrature of the singular action integrals, with their
//!   closed-form endpoint limits;
//! * [`modes`] — which `2*pi/k`-periodic solutions exist for a given
//!   `(eps, q, mu)`, and shooting for them by monotone bisection on the
//!   period function;
//! * [`geometry`] — weight/metric families, the metric compatibility
//!   condition, assembly of `u = h(r)*w(theta)`, and finite-difference
//!   verification of the full PDE;
//! * [`cli`] — the `pseudoradial` command-line front end.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod geometry;
pub mod integrate;
pub mod modes;
pub mod period;
pub mod phase;
pub mod quad;
pub mod roots;

pub use phase::{Params, PhasePoint};
