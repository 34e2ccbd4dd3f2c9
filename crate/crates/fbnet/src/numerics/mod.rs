//! Special functions, adaptive quadrature, Gauss-Hermite rules, and
//! characteristic-function inversion.
//!
//! Everything here is pure and re-entrant; no shared mutable state.

mod gilpelaez;
mod hermite;
mod hyp2f1;
mod quad;
mod special;

pub use gilpelaez::{gil_pelaez_cdf, gil_pelaez_cdf_raw};
pub use hermite::{integrate_hermite2d, Hermite2dRule};
pub use hyp2f1::{gauss_2f1_nonpos, gauss_2f1_series, gauss_2f1_unit_a_complex};
pub use quad::{integrate, Interval, IntegrationSpec};
pub use special::{q_function, q_inverse, reg_inc_beta};

