//! Mean-square displacement of a damped charged quantum particle in a
//! magnetic field.
//!
//! A charged Brownian particle moving in a plane perpendicular to a uniform
//! magnetic field, coupled to a dissipative bath, spreads diffusively in a
//! way that depends on friction, cyclotron frequency, and temperature. This
//! crate computes the mean-square displacement `<Delta r^2>(t)` of such a
//! particle along three independent routes and classifies the resulting
//! curves:
//!
//! * [`closedform`] evaluates the exact residue-sum expression for the Ohmic
//!   (memoryless) bath in terms of harmonic numbers and the Hurwitz-Lerch
//!   transcendent;
//! * [`quadrature`] integrates the underlying spectral integral directly,
//!   for both the Ohmic and the single-relaxation-time kernel and at any
//!   temperature;
//! * [`simulate`] runs the classical stochastic dynamics as an ensemble of
//!   exactly discretized Ornstein-Uhlenbeck rotations;
//! * [`limits`] provides the high- and low-temperature asymptotic formulas,
//!   and [`analysis`] decides whether a displacement curve grows
//!   monotonically or carries damped cyclotron oscillations.
//!
//! The three routes cross-check each other; the [`selftest`] module bundles
//! those consistency checks into a runtime-callable suite.
//!
//! # Example
//!
//! ```
//! use qbm::model::{KernelModel, ReducedParams};
//! use qbm::quadrature::{msd_quadrature, QuadratureSettings, TemperatureMode};
//!
//! let params = ReducedParams::unit_scales(1.0, 0.5, 10.0)?;
//! let kernel = KernelModel::Ohmic { gamma: 1.0 };
//! let msd = msd_quadrature(
//!     &params,
//!     &kernel,
//!     2.0,
//!     TemperatureMode::FullQuantum,
//!     &QuadratureSettings::default(),
//! )?;
//! assert!(msd > 0.0);
//! # Ok::<(), qbm::QbmError>(())
//! ```

pub mod analysis;
pub mod closedform;
pub mod error;
pub mod limits;
pub mod model;
pub mod quadrature;
pub mod selftest;
pub mod series;
pub mod simulate;
pub mod specfun;

mod integrate;

pub use error::{QbmError, Result};
