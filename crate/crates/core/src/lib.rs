//! Spectral toolkit for the one-dimensional damped fractional Klein-Gordon
//! equation `u_tt + gamma(x) u_t + (-d^2/dx^2)^{s/2} u + m u = 0`.

pub mod damping;
pub mod error;
pub mod linalg;
pub mod observability;
pub mod rates;
pub mod resolvent;
pub mod semigroup;
pub mod spectral;
pub mod verify;

pub use damping::{DampingKind, DampingProfile};
pub use error::{Error, Result};
pub use spectral::{
    frac_laplacian_apply, make_grid, multiply_pointwise, sobolev_norm, EnergyWeight, Grid,
    SobolevOrder, SpectralField,
};
