//! Toric Hermitian ALF gravitational instantons from rod profiles.
//!
//! A profile `f(z) = A + sum a_i |z - z_i|` determines a harmonic
//! generating function, an explicit Ricci-flat metric, its conformal
//! Kähler structure and moment polytope, and the rod data that decides
//! whether the metric closes up smoothly.

pub mod chen_teo;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod kahler;
pub mod metric;
pub mod potential;
pub mod profile;
pub mod regularity;
pub mod serde_util;

pub use error::{Error, Result};
pub use profile::{AnyProfile, Preset, Profile, PseudoProfile, Turn};
