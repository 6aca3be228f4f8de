//! Propagation of `(psi, psi')` across piecewise-constant potentials with
//! delta spikes.
//!
//! Within a constant segment both `cos(k d)` and `sin(k d)/k` are entire in
//! `k^2`, so the propagation matrix is uniformly valid through `E = V_j`
//! (where `k = 0`) and for evanescent segments (`k` imaginary). A delta spike
//! of strength `g` imposes the derivative jump `psi'(x0+) - psi'(x0-) =
//! (2 m g / hbar^2) psi(x0)`. Matrices are composed with per-step
//! renormalization; the accumulated scale is tracked in log form so that
//! strongly evanescent interiors cannot overflow.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{Potential, Units};

pub type Mat2 = [[Complex64; 2]; 2];

/// A 2x2 map together with a factored-out log-scale: the true map is
/// `exp(log_scale) * m`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledMap {
    pub m: Mat2,
    pub log_scale: f64,
}

impl ScaledMap {
    pub fn identity() -> Self {
        ScaledMap {
            m: [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            log_scale: 0.0,
        }
    }

    /// `other * self` (apply `self` first), renormalized.
    pub fn then(&self, other: &Mat2) -> Self {
        let mut m = mat_mul(other, &self.m);
        let mut norm: f64 = 0.0;
        for row in &m {
            for e in row {
                norm = norm.max(e.norm());
            }
        }
        let mut log_scale = self.log_scale;
        if norm > 0.0 && (norm > 1e100 || norm < 1e-100) {
            for row in &mut m {
                for e in row.iter_mut() {
                    *e /= norm;
                }
            }
            log_scale += norm.ln();
        }
        ScaledMap { m, log_scale }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j] * self.log_scale.exp()
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn mat_apply(a: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// `cos(k d)` and `sin(k d)/k`, entire in `k^2`.
fn cos_sinc(k: Complex64, d: f64) -> (Complex64, Complex64) {
    let kd = k * d;
    if kd.norm() < 1e-4 {
        let z = kd * kd;
        let cos = 1.0 - z / 2.0 + z * z / 24.0;
        let sinc = d * (1.0 - z / 6.0 + z * z / 120.0);
        (cos, sinc)
    } else {
        (kd.cos(), kd.sin() / k)
    }
}

/// Propagates `(psi, psi')` across a constant segment of width `d` with
/// local wavenumber `k` (possibly zero or imaginary).
pub fn segment_map(k: Complex64, d: f64) -> Mat2 {
    let (c, s) = cos_sinc(k, d);
    [[c, s], [-k * k * s, c]]
}

/// Derivative jump across a delta spike: `c = 2 m g / hbar^2`.
pub fn delta_map(c: f64) -> Mat2 {
    [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(c, 0.0), Complex64::new(1.0, 0.0)],
    ]
}

/// Basis matrix `W(k, x)` mapping coefficients `(A, B)` of
/// `A e^{ikx} + B e^{-ikx}` to `(psi, psi')` at `x`.
pub fn wave_basis(k: Complex64, x: f64) -> Mat2 {
    let i = Complex64::new(0.0, 1.0);
    let ep = (i * k * x).exp();
    let em = (-i * k * x).exp();
    [[ep, em], [i * k * ep, -i * k * em]]
}

/// Inverse of [`wave_basis`]; requires `k != 0`.
pub fn wave_basis_inv(k: Complex64, x: f64) -> Mat2 {
    let i = Complex64::new(0.0, 1.0);
    let ep = (i * k * x).exp();
    let em = (-i * k * x).exp();
    let half = Complex64::new(0.5, 0.0);
    [[half / ep, half / (i * k * ep)], [half / em, -half / (i * k * em)]]
}

/// One region of constant potential between consecutive matching points.
#[derive(Debug, Clone, Copy)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
    pub k: Complex64,
}

/// Matching events across the support: ordered positions, each with the
/// delta strength concentrated there (zero for plain segment edges).
#[derive(Debug, Clone)]
pub struct Structure {
    pub regions: Vec<Region>,
    /// `(position, jump coefficient 2 m g / hbar^2)`
    pub jumps: Vec<(f64, f64)>,
}

/// Local wavenumber with nonnegative real and imaginary parts: real for
/// `E >= v`, positive imaginary otherwise. Any nonzero choice is a valid
/// basis; this one keeps interior coefficients bounded.
pub fn interior_wavenumber(energy: f64, v: f64, units: &Units) -> Complex64 {
    let disc = 2.0 * units.mass * (energy - v);
    if disc >= 0.0 {
        Complex64::new(disc.sqrt() / units.hbar, 0.0)
    } else {
        Complex64::new(0.0, (-disc).sqrt() / units.hbar)
    }
}

/// Splits the support into constant regions at energy `E` and collects the
/// delta jumps.
pub fn structure(pot: &Potential, units: &Units, energy: f64) -> Structure {
    let mut cuts: Vec<f64> = vec![pot.support_lo()];
    for s in pot.segments() {
        cuts.push(s.hi);
    }
    for d in pot.deltas() {
        cuts.push(d.x0);
    }
    cuts.push(pot.support_hi());
    cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    cuts.dedup_by(|u, v| (*u - *v).abs() < 1e-14);

    let mut regions = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-14 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        regions.push(Region { lo, hi, k: interior_wavenumber(energy, pot.evaluate(mid), units) });
    }
    let jump_coeff = 2.0 * units.mass / (units.hbar * units.hbar);
    let jumps = pot
        .deltas()
        .iter()
        .map(|d| (d.x0, jump_coeff * d.strength))
        .collect();
    Structure { regions, jumps }
}

/// Propagates `(psi, psi')` from `a` to `b` through the structure,
/// returning the renormalized map.
pub fn interior_map(st: &Structure) -> ScaledMap {
    let mut map = ScaledMap::identity();
    // jumps exactly at the left edge come first
    let a = st
        .regions
        .first()
        .map(|r| r.lo)
        .unwrap_or_else(|| st.jumps.first().map(|j| j.0).unwrap_or(0.0));
    for &(x0, c) in &st.jumps {
        if (x0 - a).abs() < 1e-14 {
            map = map.then(&delta_map(c));
        }
    }
    for r in &st.regions {
        map = map.then(&segment_map(r.k, r.hi - r.lo));
        for &(x0, c) in &st.jumps {
            if (x0 - r.hi).abs() < 1e-14 {
                map = map.then(&delta_map(c));
            }
        }
    }
    map
}

/// Full coefficient transfer `M` with `(A_R, B_R) = M (A_L, B_L)`, where the
/// left coefficients multiply `e^{+-i k_l x}` for `x < a` and the right ones
/// `e^{+-i k_r x}` for `x > b`. The determinant of the exact map is
/// `k_l / k_r`.
pub fn coefficient_transfer(
    pot: &Potential,
    units: &Units,
    k_left: Complex64,
    k_right: Complex64,
    energy: f64,
) -> Result<ScaledMap> {
    if k_left.norm() == 0.0 || k_right.norm() == 0.0 {
        return Err(Error::Domain("outer basis wavenumber vanishes".into()));
    }
    let st = structure(pot, units, energy);
    let inner = interior_map(&st);
    let w_l = wave_basis(k_left, pot.support_lo());
    let w_r_inv = wave_basis_inv(k_right, pot.support_hi());
    let m = ScaledMap { m: mat_mul(&inner.m, &w_l), log_scale: inner.log_scale }.then(&w_r_inv);
    Ok(m)
}

/// Real-arithmetic version of the propagation for bound-state search at
/// `E < 0`: all wavenumbers squared are real, so `(psi, psi')` stays real.
pub fn bound_condition(pot: &Potential, units: &Units, energy: f64) -> f64 {
    debug_assert!(energy < 0.0);
    let kappa_l = (-2.0 * units.mass * energy).sqrt() / units.hbar;
    let kappa_r = (2.0 * units.mass * (pot.v0() - energy)).sqrt() / units.hbar;
    let st = structure(pot, units, energy);
    // start on the left tail: psi = e^{kappa_l x}
    let a = pot.support_lo();
    let mut psi = (kappa_l * a).exp();
    let mut dpsi = kappa_l * psi;
    if psi == 0.0 {
        psi = 1.0;
        dpsi = kappa_l;
    }
    let apply_jumps_at = |x: f64, psi: f64, dpsi: &mut f64| {
        for &(x0, c) in &st.jumps {
            if (x0 - x).abs() < 1e-14 {
                *dpsi += c * psi;
            }
        }
    };
    apply_jumps_at(a, psi, &mut dpsi);
    for r in &st.regions {
        let d = r.hi - r.lo;
        let k2 = {
            // real k^2 = 2m(E - V)/hbar^2, sign decides cos vs cosh
            let mid = 0.5 * (r.lo + r.hi);
            2.0 * units.mass * (energy - pot.evaluate(mid)) / (units.hbar * units.hbar)
        };
        let (c, s) = if k2 >= 0.0 {
            let k = k2.sqrt();
            if k * d < 1e-6 {
                (1.0 - (k * d).powi(2) / 2.0, d * (1.0 - (k * d).powi(2) / 6.0))
            } else {
                ((k * d).cos(), (k * d).sin() / k)
            }
        } else {
            let kappa = (-k2).sqrt();
            if kappa * d < 1e-6 {
                (1.0 + (kappa * d).powi(2) / 2.0, d * (1.0 + (kappa * d).powi(2) / 6.0))
            } else {
                ((kappa * d).cosh(), (kappa * d).sinh() / kappa)
            }
        };
        let new_psi = c * psi + s * dpsi;
        let new_dpsi = k2 * s * psi + c * dpsi;
        psi = new_psi;
        dpsi = new_dpsi;
        let scale = psi.abs().max(dpsi.abs());
        if scale > 1e100 {
            psi /= scale;
            dpsi /= scale;
        }
        apply_jumps_at(r.hi, psi, &mut dpsi);
    }
    // coefficient of the growing exponential e^{+kappa_r x} on the right
    dpsi + kappa_r * psi
}
