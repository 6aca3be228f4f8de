//! Exact amplitudes and wavefunctions.
//!
//! Pure-step closed forms, the exact step-plus-delta reflection amplitude,
//! and a transfer-matrix solver for arbitrary piecewise-constant potentials
//! with delta spikes. This module is the ground-truth oracle for the
//! integral-equation solvers and the Born approximations.
//!
//! Conventions: a left-incidence state at label `p` behaves as
//! `h^(-1/2) [e^{ipx/hbar} + R^l e^{-ipx/hbar}]` for `x < a` and
//! `h^(-1/2) T^l e^{iqx/hbar}` for `x > b`; a right-incidence state carries
//! the extra delta-normalization factor `(p/q)^(1/2)` and the amplitudes
//! `T^r(-p), R^r(-p)`. Amplitudes at negative labels are the analytic
//! continuations computed by the same formulas.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{BranchMomentum, Channel, Potential, Units};
use crate::transfer::{
    coefficient_transfer, mat_apply, segment_map, structure, wave_basis, Region, ScaledMap,
};
use crate::{planck, I};

/// The four scattering amplitudes at one energy label `p`.
///
/// Below threshold only the left amplitudes exist (`t_l` is then the
/// coefficient of the decaying exponential); `t_r`, `r_r` are reported
/// absent.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeSet {
    pub p: f64,
    pub t_l: Complex64,
    pub r_l: Complex64,
    pub t_r: Option<Complex64>,
    pub r_r: Option<Complex64>,
}

impl AmplitudeSet {
    /// Residuals of the three unitarity relations (open channel) or of
    /// `|R^l| = 1` (closed channel). Entries that do not apply are zero.
    pub fn unitarity_residuals(&self, bm: &BranchMomentum) -> [f64; 3] {
        match bm.channel {
            Channel::TwoOpen => {
                let qp = bm.q.re / bm.p;
                let t_r = self.t_r.unwrap_or_default();
                let r_r = self.r_r.unwrap_or_default();
                let u1 = (1.0 / qp) * t_r.norm_sqr() + r_r.norm_sqr() - 1.0;
                let u2 = self.r_l.norm_sqr() + qp * self.t_l.norm_sqr() - 1.0;
                let u3 = ((1.0 / qp) * t_r * self.r_l.conj() + r_r * self.t_l.conj()).norm();
                [u1.abs(), u2.abs(), u3]
            }
            Channel::Evanescent => [(self.r_l.norm() - 1.0).abs(), 0.0, 0.0],
        }
    }

    /// Residual of the time-reversal relation `T^r = (q/p) T^l`.
    pub fn time_reversal_residual(&self, bm: &BranchMomentum) -> f64 {
        match self.t_r {
            Some(t_r) => (t_r - bm.q / bm.p * self.t_l).norm(),
            None => 0.0,
        }
    }

    pub fn max_identity_residual(&self, bm: &BranchMomentum) -> f64 {
        let u = self.unitarity_residuals(bm);
        u[0].max(u[1]).max(u[2]).max(self.time_reversal_residual(bm))
    }
}

/// The S-matrix: 2x2 above threshold, the number `R^l` below.
#[derive(Debug, Clone)]
pub enum SMatrix {
    Open([[Complex64; 2]; 2]),
    Closed(Complex64),
}

impl SMatrix {
    /// Largest entry of `S S^dagger - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        match self {
            SMatrix::Closed(r) => (r.norm_sqr() - 1.0).abs(),
            SMatrix::Open(s) => {
                let mut worst: f64 = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        let mut v = Complex64::new(0.0, 0.0);
                        for k in 0..2 {
                            v += s[i][k] * s[j][k].conj();
                        }
                        if i == j {
                            v -= 1.0;
                        }
                        worst = worst.max(v.norm());
                    }
                }
                worst
            }
        }
    }
}

/// Pure-step amplitudes: `T^l = 2p/(q+p)`, `R^l = (p-q)/(q+p)`,
/// `T^r = 2q/(p+q)`, `R^r = (q-p)/(p+q)`.
pub fn step_amplitudes(bm: &BranchMomentum) -> AmplitudeSet {
    let p = Complex64::new(bm.p, 0.0);
    let q = bm.q;
    let t_l = 2.0 * p / (q + p);
    let r_l = (p - q) / (q + p);
    let (t_r, r_r) = if bm.is_open() && !bm.at_threshold {
        (Some(2.0 * q / (p + q)), Some((q - p) / (p + q)))
    } else {
        (None, None)
    };
    AmplitudeSet { p: bm.p, t_l, r_l, t_r, r_r }
}

/// Exact reflection amplitude of `V0 theta(x) + v1 delta(x)`:
/// `R^l = (p - q - 2 i m v1 / hbar) / (p + q + 2 i m v1 / hbar)`.
pub fn step_delta_exact_rl(bm: &BranchMomentum, v1: f64) -> Complex64 {
    let p = Complex64::new(bm.p, 0.0);
    let q = bm.q;
    let c = 2.0 * I * bm.units.mass * v1 / bm.units.hbar;
    (p - q - c) / (p + q + c)
}

fn check_consistent(pot: &Potential, bm: &BranchMomentum) -> Result<()> {
    if (pot.v0() - bm.v0).abs() > 1e-12 * (1.0 + pot.v0().abs()) {
        return Err(Error::Config(format!(
            "branch momentum built for V0 = {}, potential has V0 = {}",
            bm.v0,
            pot.v0()
        )));
    }
    Ok(())
}

/// Left-side amplitudes `(t_l, r_l)` from a coefficient transfer map.
fn left_amplitudes(m: &ScaledMap, k_ratio: Complex64) -> Result<(Complex64, Complex64)> {
    let m21 = m.m[1][0];
    let m22 = m.m[1][1];
    if m22.norm() == 0.0 || !m22.is_finite() {
        return Err(Error::SingularSystem { indicator: f64::INFINITY });
    }
    let r_l = -m21 / m22;
    // det(exact M) = k_left / k_right, so t_l = det/M22 = k_ratio / (e^ls m22)
    let t_l = k_ratio / m22 * (-m.log_scale).exp();
    Ok((t_l, r_l))
}

/// Right-side amplitudes `(t_r(-p_label), r_r(-p_label))` from the map at a
/// given label: `T^r = 1/M11`, `R^r = M21/M11`.
fn right_amplitudes(m: &ScaledMap) -> Result<(Complex64, Complex64)> {
    let m11 = m.m[0][0];
    if m11.norm() == 0.0 || !m11.is_finite() {
        return Err(Error::SingularSystem { indicator: f64::INFINITY });
    }
    let t_r = (-m.log_scale).exp() / m11;
    let r_r = m.m[1][0] / m11;
    Ok((t_r, r_r))
}

/// Full amplitude set at label `p` from transfer matrices: two passes, one
/// at `p` for the left amplitudes and one at `-p` for the right ones.
pub fn transfer_matrix_amplitudes(pot: &Potential, bm: &BranchMomentum) -> Result<AmplitudeSet> {
    check_consistent(pot, bm)?;
    if bm.at_threshold {
        return Err(Error::AtThreshold { p0: bm.p0 });
    }
    let units = &bm.units;
    let e = bm.energy();
    let kp = Complex64::new(bm.p / units.hbar, 0.0);
    let kq = bm.q / units.hbar;
    let m = coefficient_transfer(pot, units, kp, kq, e)?;
    let (t_l, r_l) = left_amplitudes(&m, kp / kq)?;
    let (t_r, r_r) = if bm.is_open() {
        let m_neg = coefficient_transfer(pot, units, -kp, -kq, e)?;
        let (t_r, r_r) = right_amplitudes(&m_neg)?;
        (Some(t_r), Some(r_r))
    } else {
        (None, None)
    };
    Ok(AmplitudeSet { p: bm.p, t_l, r_l, t_r, r_r })
}

/// Assembles the S-matrix from an amplitude set.
pub fn smatrix(amp: &AmplitudeSet, bm: &BranchMomentum) -> Result<SMatrix> {
    match bm.channel {
        Channel::Evanescent => Ok(SMatrix::Closed(amp.r_l)),
        Channel::TwoOpen => {
            if bm.at_threshold {
                return Err(Error::AtThreshold { p0: bm.p0 });
            }
            let qp = (bm.q.re / bm.p).sqrt();
            let t_r = amp.t_r.ok_or_else(|| {
                Error::Domain("open-channel S-matrix needs the right amplitudes".into())
            })?;
            let r_r = amp.r_r.unwrap();
            Ok(SMatrix::Open([
                [qp * amp.t_l, amp.r_l],
                [r_r, t_r / qp],
            ]))
        }
    }
}

/// Which asymptotic family a scattering state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incidence {
    /// `|p^{sign p}>`: plane wave incident from (or outgoing to) the left.
    Left,
    /// `|p^{-sign p}>`: channel wave on the right, `(p/q)^(1/2)` normalized.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveSign {
    Plus,
    Minus,
}

impl WaveSign {
    pub fn value(&self) -> f64 {
        match self {
            WaveSign::Plus => 1.0,
            WaveSign::Minus => -1.0,
        }
    }
}

/// A full scattering eigenstate: asymptotic coefficients plus an interior
/// evaluator obtained from the same transfer pass.
#[derive(Debug, Clone)]
pub struct ScatteringWave {
    pub bm: BranchMomentum,
    pub sign: WaveSign,
    pub incidence: Incidence,
    pub amps: AmplitudeSet,
    /// coefficients of `e^{+-ipx/hbar}` for `x < a` (without prefactor)
    pub left_coeff: [Complex64; 2],
    /// coefficients of `e^{+-iqx/hbar}` for `x > b`
    pub right_coeff: [Complex64; 2],
    /// overall prefactor `h^(-1/2)` (times `(p/q)^(1/2)` for right states)
    pub prefactor: Complex64,
    support: (f64, f64),
    /// `(region, (psi, psi') at region.lo)` in reduced normalization
    interior: Vec<(Region, [Complex64; 2])>,
}

impl ScatteringWave {
    /// `<x|p^{+-}>` including all normalization factors.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.prefactor * self.eval_reduced(x)
    }

    /// The wave without the `h^(-1/2) (p/q)^(1/2)` prefactors.
    pub fn eval_reduced(&self, x: f64) -> Complex64 {
        let hbar = self.bm.units.hbar;
        let (a, b) = self.support;
        if x < a {
            let kp = I * self.bm.p / hbar;
            return self.left_coeff[0] * (kp * x).exp() + self.left_coeff[1] * (-kp * x).exp();
        }
        if x > b {
            let kq = I * self.bm.q / hbar;
            return self.right_coeff[0] * (kq * x).exp() + self.right_coeff[1] * (-kq * x).exp();
        }
        for (region, psi0) in &self.interior {
            if x >= region.lo && x <= region.hi {
                let m = segment_map(region.k, x - region.lo);
                return mat_apply(&m, *psi0)[0];
            }
        }
        // support is a single point (pure step-like): continuity from the left
        let kp = I * self.bm.p / hbar;
        self.left_coeff[0] * (kp * x).exp() + self.left_coeff[1] * (-kp * x).exp()
    }
}

/// Builds the scattering eigenstate of the given family and sign.
///
/// The pair must be consistent: left-incidence states are `|p^{sign p}>`,
/// right-incidence states `|p^{-sign p}>` (the latter only above threshold).
pub fn scattering_wave(
    pot: &Potential,
    bm: &BranchMomentum,
    sign: WaveSign,
    incidence: Incidence,
) -> Result<ScatteringWave> {
    check_consistent(pot, bm)?;
    let expected = match incidence {
        Incidence::Left => bm.p.signum(),
        Incidence::Right => -bm.p.signum(),
    };
    if sign.value() != expected {
        return Err(Error::Config(format!(
            "state |p^{}> with p = {} belongs to the {} family",
            if sign.value() > 0.0 { "+" } else { "-" },
            bm.p,
            if bm.p.signum() == sign.value() { "left-incidence" } else { "right-incidence" },
        )));
    }
    if incidence == Incidence::Right {
        bm.require_open()?;
    }

    let amps = transfer_matrix_amplitudes(pot, bm)?;
    let units = &bm.units;
    let h = planck(units);
    let (left_coeff, right_coeff, prefactor) = match incidence {
        Incidence::Left => (
            [Complex64::new(1.0, 0.0), amps.r_l],
            [amps.t_l, Complex64::new(0.0, 0.0)],
            Complex64::new(1.0 / h.sqrt(), 0.0),
        ),
        Incidence::Right => {
            // amplitudes at label -p via the pass at label p
            let kp = Complex64::new(bm.p / units.hbar, 0.0);
            let kq = bm.q / units.hbar;
            let m = coefficient_transfer(pot, units, kp, kq, bm.energy())?;
            let (t_r_neg, r_r_neg) = right_amplitudes(&m)?;
            let ratio = (bm.p / bm.q.re).sqrt();
            (
                [t_r_neg, Complex64::new(0.0, 0.0)],
                [Complex64::new(1.0, 0.0), r_r_neg],
                Complex64::new(ratio / h.sqrt(), 0.0),
            )
        }
    };

    // interior (psi, psi') at each region start, from the left coefficients
    let st = structure(pot, units, bm.energy());
    let kp = Complex64::new(bm.p / units.hbar, 0.0);
    let a = pot.support_lo();
    let w = wave_basis(kp, a);
    let mut psi = mat_apply(&w, left_coeff);
    let mut interior = Vec::with_capacity(st.regions.len());
    for &(x0, c) in &st.jumps {
        if (x0 - a).abs() < 1e-14 {
            psi[1] += c * psi[0];
        }
    }
    for region in &st.regions {
        interior.push((*region, psi));
        psi = mat_apply(&segment_map(region.k, region.hi - region.lo), psi);
        for &(x0, c) in &st.jumps {
            if (x0 - region.hi).abs() < 1e-14 {
                psi[1] += c * psi[0];
            }
        }
    }

    Ok(ScatteringWave {
        bm: *bm,
        sign,
        incidence,
        amps,
        left_coeff,
        right_coeff,
        prefactor,
        support: (pot.support_lo(), pot.support_hi()),
        interior,
    })
}

/// Eigenstates of the pure-step reference Hamiltonian, with the bra built by
/// the analytic-continuation rule: written for real `q` first, conjugated,
/// then continued to the branch value (amplitude coefficients are rational
/// in `(p, q)` and are never conjugated numerically).
#[derive(Debug, Clone, Copy)]
pub struct StepState {
    pub bm: BranchMomentum,
    pub incidence: Incidence,
}

impl StepState {
    /// Left-family state `|p_s^{sign p}>` at the label of `bm`.
    pub fn left(bm: BranchMomentum) -> StepState {
        StepState { bm, incidence: Incidence::Left }
    }

    /// Right-family state `|p_s^{-sign p}>`; needs the open channel.
    pub fn right(bm: BranchMomentum) -> Result<StepState> {
        bm.require_open()?;
        Ok(StepState { bm, incidence: Incidence::Right })
    }

    /// State sign: `sign(p)` for the left family, `-sign(p)` for the right.
    pub fn sign(&self) -> f64 {
        match self.incidence {
            Incidence::Left => self.bm.p.signum(),
            Incidence::Right => -self.bm.p.signum(),
        }
    }

    /// Reduced wavefunction (no `h^(-1/2)`, no `(p/q)^(1/2)`).
    pub fn ket_reduced(&self, x: f64) -> Complex64 {
        self.eval_reduced(x, 1.0)
    }

    /// Reduced continued bra at `x`: exponent signs flipped, amplitudes kept.
    pub fn bra_reduced(&self, x: f64) -> Complex64 {
        self.eval_reduced(x, -1.0)
    }

    fn eval_reduced(&self, x: f64, conj_sign: f64) -> Complex64 {
        let hbar = self.bm.units.hbar;
        let kp = I * conj_sign * self.bm.p / hbar;
        let kq = I * conj_sign * self.bm.q / hbar;
        let s = step_amplitudes(&self.bm);
        match self.incidence {
            Incidence::Left => {
                if x <= 0.0 {
                    (kp * x).exp() + s.r_l * (-kp * x).exp()
                } else {
                    s.t_l * (kq * x).exp()
                }
            }
            Incidence::Right => {
                // amplitudes at label -p, which for the pure step coincide
                // with those at +p (even functions of the label)
                let neg = step_amplitudes(&self.bm.negated());
                if x <= 0.0 {
                    neg.t_r.expect("open channel") * (kp * x).exp()
                } else {
                    (kq * x).exp() + neg.r_r.expect("open channel") * (-kq * x).exp()
                }
            }
        }
    }

    /// The `(p/q)^(1/2)` delta-normalization factor (1 for the left family).
    pub fn norm_factor(&self) -> Result<f64> {
        match self.incidence {
            Incidence::Left => Ok(1.0),
            Incidence::Right => {
                self.bm.require_open()?;
                Ok((self.bm.p / self.bm.q.re).sqrt())
            }
        }
    }
}
