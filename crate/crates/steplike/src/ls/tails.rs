//! Analytic tail integrals over the semi-infinite regions.
//!
//! Every tail is an oscillatory (or evanescent) exponential integrated over
//! `[b, inf)` or `(-inf, a]`. The `+-i0` limits are taken analytically: the
//! integral carries the decaying regularization at its infinite end and the
//! limit value is kept exactly, never a finite epsilon.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::I;

/// Smallest `|k|` (relative to a momentum scale) accepted by the tails.
const DEGENERACY_TOL: f64 = 1e-12;

/// `int_b^inf e^{i k x / hbar} dx = i hbar e^{i k b / hbar} / k`
/// (requires `Im k >= 0`; the value is the `Im k -> 0+` limit).
pub fn tail_right(k: Complex64, b: f64, hbar: f64, scale: f64) -> Result<Complex64> {
    if k.norm() < DEGENERACY_TOL * scale {
        return Err(Error::DegenerateTail(format!("vanishing tail exponent k = {k}")));
    }
    if k.im < -DEGENERACY_TOL * scale {
        return Err(Error::DegenerateTail(format!("growing right tail, Im k = {}", k.im)));
    }
    Ok(I * hbar * (I * k * b / hbar).exp() / k)
}

/// `int_-inf^a e^{i k x / hbar} dx = -i hbar e^{i k a / hbar} / k`
/// (requires `Im k <= 0`).
pub fn tail_left(k: Complex64, a: f64, hbar: f64, scale: f64) -> Result<Complex64> {
    if k.norm() < DEGENERACY_TOL * scale {
        return Err(Error::DegenerateTail(format!("vanishing tail exponent k = {k}")));
    }
    if k.im > DEGENERACY_TOL * scale {
        return Err(Error::DegenerateTail(format!("growing left tail, Im k = {}", k.im)));
    }
    Ok(-I * hbar * (I * k * a / hbar).exp() / k)
}

/// `int_lo^hi e^{i k x / hbar} dx`, stable as `k -> 0`.
pub fn finite_osc(k: Complex64, lo: f64, hi: f64, hbar: f64) -> Complex64 {
    let d = hi - lo;
    let kd = k * d / hbar;
    if kd.norm() < 1e-6 {
        // e^{ik lo/hbar} * d * (1 + i kd/2 - kd^2/6)
        (I * k * lo / hbar).exp() * d * (1.0 + I * kd / 2.0 - kd * kd / 6.0)
    } else {
        ((I * k * hi / hbar).exp() - (I * k * lo / hbar).exp()) * hbar / (I * k)
    }
}
