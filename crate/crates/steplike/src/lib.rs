//! Scattering theory for one-dimensional step-like potentials.
//!
//! A step-like potential vanishes for `x -> -inf` and tends to a constant
//! level `V0 > 0` for `x -> +inf`, with all structure (square barriers,
//! wells, delta spikes) confined to a finite interval `[a, b]`. This crate
//! provides the full machinery for such potentials:
//!
//! * [`potential`] — potential models, units, and the branch-cut channel
//!   momentum `q(p) = (p^2 - 2 m V0)^(1/2)`;
//! * [`closed_form`] — exact amplitudes and wavefunctions from transfer
//!   matrices, the pure-step and step-plus-delta closed forms, S-matrices;
//! * [`greens`] — coordinate-space resolvent kernels (free, shifted, pure
//!   step, and the momentum-projected in/out kernels);
//! * [`ls`] — Nystrom solvers for the Lippmann-Schwinger equations in the
//!   multichannel (left/right reference) and localized-potential (pure-step
//!   reference) partitionings, amplitude extraction with analytic tail
//!   integrals, and the operator-identity checks that relate them;
//! * [`born`] — first- and second-order perturbative amplitudes in each
//!   partitioning;
//! * [`spectral`] — bound states, resolution-of-identity checks, and
//!   wavepacket realizations of the asymptotic-limit property.

pub mod born;
pub mod closed_form;
pub mod error;
pub mod greens;
pub mod linsolve;
pub mod ls;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
pub use potential::{BranchMomentum, Channel, PartitionKind, PartitionedPotential, Potential, Units};

use num_complex::Complex64;

/// Shorthand used throughout: `i` as a `Complex64`.
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// `h = 2 pi hbar`, the normalization constant of the plane-wave states
/// `<x|p> = h^(-1/2) exp(i p x / hbar)`.
pub(crate) fn planck(units: &Units) -> f64 {
    2.0 * std::f64::consts::PI * units.hbar
}
