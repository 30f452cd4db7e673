//! Plasmonic resonances of nanoparticles from the spectrum of the
//! Neumann-Poincare boundary integral operator.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds sampled closed curves and multi-particle systems,
//! * [`npop`] assembles the Nystrom matrix of the NP operator, its spectrum
//!   and resolvent solves,
//! * [`materials`] evaluates Drude dispersion and the contrasts `lambda(omega)`,
//! * [`polarization`] computes polarization tensors numerically and in closed
//!   form for disks, ellipses and spheres,
//! * [`scan`] sweeps frequency and particle separation and reads out peaks,
//! * [`farfield`] evaluates the dipolar scattered electric field in 3D.

pub mod error;
pub mod farfield;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod materials;
pub mod npop;
pub mod polarization;
pub mod scan;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
