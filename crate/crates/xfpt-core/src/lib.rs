//! Numerical toolkit for extreme first-passage-time (FPT) statistics of diffusion.
//!
//! The library computes moments of the k-th fastest of N independent diffusive
//! searchers three independent ways and cross-validates them:
//!
//! * [`survival`] — exact one-dimensional survival functions S(t) = P(τ > t)
//!   (absorbing half-line, drifted half-line, partially absorbing half-line,
//!   interval escape) with numerically stable log-domain evaluation deep into
//!   the short-time tail, plus empirical survival from samples.
//! * [`moments`] — log-domain adaptive quadrature of
//!   `E[(T_{k,N})^m] = ∫ P(T_{k,N} > t^{1/m}) dt` for N up to 10^10.
//! * [`asymptotics`] — the closed-form large-N reference
//!   `(L^2 / (4 D ln N))^m` and invariance reports against it.
//! * [`geodesic`] — shortest-path lengths on 2-D grids under the metric
//!   `a^{-1}(x)` (inverse diffusivity tensor) with reflecting obstacles; this
//!   length is the `L` that feeds the asymptotic formula.
//! * [`montecarlo`] — Euler–Maruyama simulation of the underlying SDE with
//!   reflecting boundaries and perfectly or partially absorbing targets,
//!   producing sample sets for empirical validation of everything above.
//!
//! Data-parallel loops (sample farming, sweep grids, bootstrap resampling) run
//! on rayon when the default `parallel` feature is enabled and fall back to
//! sequential execution without it; outputs are bit-identical either way.

pub mod asymptotics;
pub mod error;
pub mod exec;
pub mod geodesic;
pub mod moments;
pub mod montecarlo;
pub mod presets;
pub mod special;
pub mod survival;

pub use error::{Error, Result};
