//! Closed-form coordinate-space resolvent kernels.
//!
//! Free particle:
//!
//! `<x| (z - H0)^-1 |x'> = -i m / (hbar w) exp(i w |x - x'| / hbar)`,
//! `w = (2 m z)^(1/2)`,
//!
//! with the square root cut along the positive real axis, so `w` always has
//! nonnegative imaginary part: outgoing waves at `E + i0`, incoming at
//! `E - i0`, exponential decay below the spectrum. The shifted kernel is the
//! free one at `z - V0`; the pure-step kernel is the four-region formula in
//! terms of `|p|`, `mu`, and the step coefficients `t, r`; the in/out kernels
//! add the momentum-projector term built from the sine/cosine integrals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::Units;
use crate::special::{aux_f, aux_f_imag_axis};
use crate::{planck, I};

/// Which side of the real-axis branch cut a real energy sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `E + i0`: outgoing (retarded) boundary conditions.
    Plus,
    /// `E - i0`: incoming (advanced) boundary conditions.
    Minus,
}

impl Side {
    pub fn sign(&self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// `(2 m z)^(1/2)` at `z = e +- i0` with the cut along the positive real
/// axis: `+-sqrt(2mE)` above threshold, positive imaginary below. The
/// imaginary part is never negative.
pub fn branch_momentum_side(two_m_e: f64, side: Side) -> Result<Complex64> {
    if two_m_e == 0.0 {
        return Err(Error::BranchPoint("energy at the branch point z = 0".into()));
    }
    if two_m_e > 0.0 {
        Ok(Complex64::new(side.sign() * two_m_e.sqrt(), 0.0))
    } else {
        Ok(Complex64::new(0.0, (-two_m_e).sqrt()))
    }
}

/// Free resolvent kernel `<x|(E +- i0 - H0)^-1|x'>`.
pub fn g_free(e: f64, side: Side, x: f64, xp: f64, units: &Units) -> Result<Complex64> {
    let w = branch_momentum_side(2.0 * units.mass * e, side)?;
    Ok(free_kernel_w(w, x - xp, units))
}

/// Free kernel at a given branch momentum `w` (must have `Im w >= 0`).
pub fn free_kernel_w(w: Complex64, dx: f64, units: &Units) -> Complex64 {
    -I * units.mass / (units.hbar * w) * (I * w * dx.abs() / units.hbar).exp()
}

/// Shifted kernel `<x|(E +- i0 - V0 - H0)^-1|x'> = G0(E - V0)`.
pub fn g_shifted(e: f64, side: Side, x: f64, xp: f64, v0: f64, units: &Units) -> Result<Complex64> {
    if e == v0 {
        return Err(Error::BranchPoint("energy at the shifted branch point z = V0".into()));
    }
    g_free(e - v0, side, x, xp, units)
}

/// Step coefficients entering the pure-step kernel at energy `E` and the
/// given side: `mu`, `t = 2|p|/(|p|+mu)`, `r = (|p|-mu)/(|p|+mu)`.
#[derive(Debug, Clone, Copy)]
pub struct StepKernelParams {
    pub p_abs: f64,
    pub mu: Complex64,
    pub t: Complex64,
    pub r: Complex64,
}

pub fn step_kernel_params(e: f64, side: Side, v0: f64, units: &Units) -> Result<StepKernelParams> {
    if e <= 0.0 {
        return Err(Error::BranchPoint(format!(
            "step kernel needs E > 0 (scattering energies), got {e}"
        )));
    }
    if e == v0 {
        return Err(Error::BranchPoint("energy at the step branch point E = V0".into()));
    }
    let p_abs = (2.0 * units.mass * e).sqrt();
    let mu = if e > v0 {
        Complex64::new((2.0 * units.mass * (e - v0)).sqrt(), 0.0)
    } else {
        side.sign() * I * (2.0 * units.mass * (v0 - e)).sqrt()
    };
    let t = 2.0 * p_abs / (p_abs + mu);
    let r = (p_abs - mu) / (p_abs + mu);
    Ok(StepKernelParams { p_abs, mu, t, r })
}

/// Pure-step resolvent kernel `<x|(E +- i0 - H_s)^-1|x'>` (four regions).
pub fn g_step(e: f64, side: Side, x: f64, xp: f64, v0: f64, units: &Units) -> Result<Complex64> {
    let par = step_kernel_params(e, side, v0, units)?;
    Ok(step_kernel_with(&par, side, x, xp, units))
}

/// Step kernel from precomputed parameters (hot path of the LP solver).
pub fn step_kernel_with(par: &StepKernelParams, side: Side, x: f64, xp: f64, units: &Units) -> Complex64 {
    let s = side.sign();
    let hbar = units.hbar;
    let pref = s * units.mass / (I * hbar);
    let is = I * s;
    let kp = par.p_abs / hbar;
    if x <= 0.0 && xp <= 0.0 {
        pref / par.p_abs
            * ((is * kp * (x - xp).abs()).exp() + par.r * (-is * kp * (x + xp)).exp())
    } else if xp <= 0.0 {
        pref / par.p_abs * par.t * (is * (par.mu * x - par.p_abs * xp) / hbar).exp()
    } else if x <= 0.0 {
        pref / par.p_abs * par.t * (is * (par.mu * xp - par.p_abs * x) / hbar).exp()
    } else {
        pref / par.mu
            * ((is * par.mu * (x - xp).abs() / hbar).exp()
                - par.r * (is * par.mu * (x + xp) / hbar).exp())
    }
}

/// Which in/out reference Hamiltonian a kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InOut {
    In,
    Out,
}

/// Momentum-projected half resolvent
/// `<x| F_xi (zeta - H0)^-1 |x'>` at `zeta = e + i0` (`xi = +-1`):
///
/// `A xi sign(x-x') + theta(xi (x-x')) <x|G0(zeta)|x'>`,
/// `A = 2 m i / (h w) [ci(y) sin(y) - si(y) cos(y)]`, `y = w |x-x'| / hbar`.
///
/// The `E - i0` side is obtained from the adjoint relation
/// `K(E-i0; x, x') = conj(K(E+i0; x', x))`, which fixes the sign ambiguity
/// the `A`-series leaves at the lower lip of the cut.
pub fn projector_kernel(
    zeta: f64,
    xi: f64,
    side: Side,
    x: f64,
    xp: f64,
    units: &Units,
) -> Result<Complex64> {
    debug_assert!(xi == 1.0 || xi == -1.0);
    if x == xp {
        return Err(Error::Domain(
            "in/out kernels are excluded at x = x' (log-singular ci term)".into(),
        ));
    }
    if let Side::Minus = side {
        return Ok(projector_kernel(zeta, xi, Side::Plus, xp, x, units)?.conj());
    }
    if zeta == 0.0 {
        return Err(Error::BranchPoint("projector kernel at the branch point zeta = 0".into()));
    }
    let dx = x - xp;
    let h = planck(units);
    let (w, f) = if zeta > 0.0 {
        let w = Complex64::new((2.0 * units.mass * zeta).sqrt(), 0.0);
        let y = w.re * dx.abs() / units.hbar;
        (w, Complex64::new(aux_f(y)?, 0.0))
    } else {
        let kappa = (-2.0 * units.mass * zeta).sqrt();
        let w = Complex64::new(0.0, kappa);
        let eta = kappa * dx.abs() / units.hbar;
        (w, aux_f_imag_axis(eta)?)
    };
    let a = 2.0 * units.mass * I / (h * w) * f;
    let theta = if xi * dx > 0.0 { 1.0 } else { 0.0 };
    Ok(a * xi * dx.signum() + theta * free_kernel_w(w, dx, units))
}

/// In/out resolvent kernels, Eq. sums of the two projector terms:
/// `G_in(z) = F+ G0(z) + F- G0(z - V0)`, `G_out` with the projectors swapped.
pub fn g_inout(
    kind: InOut,
    e: f64,
    side: Side,
    x: f64,
    xp: f64,
    v0: f64,
    units: &Units,
) -> Result<Complex64> {
    let (zeta_plus, zeta_minus) = match kind {
        InOut::In => (e, e - v0),
        InOut::Out => (e - v0, e),
    };
    Ok(projector_kernel(zeta_plus, 1.0, side, x, xp, units)?
        + projector_kernel(zeta_minus, -1.0, side, x, xp, units)?)
}

/// Reference-kernel kinds exposed to the CLI dump and the residual check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Free,
    Shifted,
    Step,
    In,
    Out,
}

/// A resolvent kernel at fixed energy and side, evaluatable on `(x, x')`.
#[derive(Debug, Clone)]
pub struct ResolventKernel {
    pub kind: KernelKind,
    pub e: f64,
    pub side: Side,
    pub v0: f64,
    pub units: Units,
}

impl ResolventKernel {
    pub fn eval(&self, x: f64, xp: f64) -> Result<Complex64> {
        match self.kind {
            KernelKind::Free => g_free(self.e, self.side, x, xp, &self.units),
            KernelKind::Shifted => g_shifted(self.e, self.side, x, xp, self.v0, &self.units),
            KernelKind::Step => g_step(self.e, self.side, x, xp, self.v0, &self.units),
            KernelKind::In => g_inout(InOut::In, self.e, self.side, x, xp, self.v0, &self.units),
            KernelKind::Out => g_inout(InOut::Out, self.e, self.side, x, xp, self.v0, &self.units),
        }
    }

    /// Reference-Hamiltonian potential value at `x` for the local kinds.
    fn reference_potential(&self, x: f64) -> Result<f64> {
        match self.kind {
            KernelKind::Free => Ok(0.0),
            KernelKind::Shifted => Ok(self.v0),
            KernelKind::Step => Ok(if x > 0.0 { self.v0 } else { 0.0 }),
            KernelKind::In | KernelKind::Out => Err(Error::Domain(
                "residual check is defined for the local reference kernels only".into(),
            )),
        }
    }
}

/// Verifies the defining property of a resolvent: applying `(z - H_ref)` to
/// `u(x) = int K(x, x') f(x') dx'` returns `f`. The second derivative is
/// taken by central differences on a uniform window grid of `n` points, so
/// the returned L2 residual decreases as `O(h^2)`.
///
/// `f` must be smooth and effectively supported inside `f_support`; the
/// window should avoid the kink of the STEP reference at the origin.
pub fn residual_check<F: Fn(f64) -> f64>(
    kernel: &ResolventKernel,
    f: F,
    f_support: (f64, f64),
    window: (f64, f64),
    n: usize,
) -> Result<f64> {
    if n < 5 {
        return Err(Error::Config("residual window needs at least 5 points".into()));
    }
    let (w0, w1) = window;
    let h = (w1 - w0) / (n - 1) as f64;
    let (s0, s1) = f_support;
    let order = 24;
    // u on the window grid; the quadrature splits at the kernel kink x' = x
    // and at the step kernel's structural kink x' = 0.
    let mut u = Vec::with_capacity(n);
    for i in 0..n {
        let x = w0 + i as f64 * h;
        let mut cuts = vec![s0, s1];
        if x > s0 && x < s1 {
            cuts.push(x);
        }
        if self_kind_is_step(kernel.kind) && 0.0 > s0 && 0.0 < s1 {
            cuts.push(0.0);
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut val = Complex64::new(0.0, 0.0);
        for win in cuts.windows(2) {
            if win[1] - win[0] < 1e-14 {
                continue;
            }
            let panels = (((win[1] - win[0]) / (s1 - s0) * 16.0).ceil() as usize).max(2);
            val += crate::quadrature::integrate(
                |xq| kernel.eval(x, xq).unwrap() * f(xq),
                win[0],
                win[1],
                panels,
                order,
            );
        }
        u.push(val);
    }
    // (z - H_ref) u - f = (E - V_ref) u + hbar^2/2m u'' - f
    let coeff = kernel.units.hbar * kernel.units.hbar / (2.0 * kernel.units.mass);
    let mut sum = 0.0;
    for i in 1..n - 1 {
        let x = w0 + i as f64 * h;
        let upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        let r = (kernel.e - kernel.reference_potential(x)?) * u[i] + coeff * upp - f(x);
        sum += r.norm_sqr() * h;
    }
    Ok(sum.sqrt())
}

fn self_kind_is_step(kind: KernelKind) -> bool {
    kind == KernelKind::Step
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const U: Units = Units { hbar: 1.0, mass: 1.0 };

    #[test]
    fn free_kernel_examples() {
        // E = 2, +i0, |x-x'| = 1: -i m/(hbar p) e^{i p} with p = 2
        let v = g_free(2.0, Side::Plus, 1.0, 0.0, &U).unwrap();
        let expect = -I / 2.0 * (I * 2.0).exp();
        assert!((v - expect).norm() < 1e-15);
        // coincidence point is finite
        let v = g_free(2.0, Side::Plus, 0.3, 0.3, &U).unwrap();
        assert!((v - -I / 2.0).norm() < 1e-15);
        // conjugation symmetry of the two sides
        let a = g_free(2.0, Side::Plus, 0.7, -0.4, &U).unwrap();
        let b = g_free(2.0, Side::Minus, 0.7, -0.4, &U).unwrap();
        assert!((a - b.conj()).norm() < 1e-15);
        // below the spectrum: real, decaying
        let v = g_free(-1.0, Side::Plus, 2.0, 0.0, &U).unwrap();
        assert!(v.im.abs() < 1e-15 && v.re < 0.0);
        assert!(g_free(0.0, Side::Plus, 1.0, 0.0, &U).is_err());
    }

    #[test]
    fn shifted_kernel_examples() {
        // V0 = 0 reduces to free
        let a = g_shifted(2.0, Side::Plus, 1.2, 0.1, 0.0, &U).unwrap();
        let b = g_free(2.0, Side::Plus, 1.2, 0.1, &U).unwrap();
        assert!((a - b).norm() < 1e-15);
        // E = 2, V0 = 1: oscillation wavenumber sqrt(2)
        let q = 2.0f64.sqrt();
        let v = g_shifted(2.0, Side::Plus, 1.0, 0.0, 1.0, &U).unwrap();
        let expect = -I / q * (I * q).exp();
        assert!((v - expect).norm() < 1e-14);
        // evanescent below V0
        let v0 = g_shifted(0.5, Side::Plus, 0.0, 0.0, 1.0, &U).unwrap();
        let v1 = g_shifted(0.5, Side::Plus, 3.0, 0.0, 1.0, &U).unwrap();
        assert!(v1.norm() < v0.norm() * 0.1);
        assert!(g_shifted(1.0, Side::Plus, 0.0, 1.0, 1.0, &U).is_err());
    }

    #[test]
    fn step_kernel_examples() {
        // left-left region at E = 2, V0 = 1
        let e = 2.0;
        let (x, xp) = (-0.4, -1.1);
        let r_plus = (2.0 - 2.0f64.sqrt()) / (2.0 + 2.0f64.sqrt());
        let expect = 1.0 / (I * 2.0)
            * ((I * 2.0 * (x - xp) as f64).exp() + r_plus * (-I * 2.0 * (x + xp)).exp());
        let v = g_step(e, Side::Plus, x, xp, 1.0, &U).unwrap();
        assert!((v - expect).norm() < 1e-14);
        // V0 = 0 collapses to the free kernel in all four regions
        for &(x, xp) in &[(-1.0, -0.5), (-1.0, 0.5), (0.5, -1.0), (0.8, 0.3)] {
            let a = g_step(2.0, Side::Plus, x, xp, 0.0, &U).unwrap();
            let b = g_free(2.0, Side::Plus, x, xp, &U).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
        // continuity across x = 0 for fixed x' < 0
        let xp = -0.7;
        let a = g_step(2.0, Side::Plus, -1e-9, xp, 1.0, &U).unwrap();
        let b = g_step(2.0, Side::Plus, 1e-9, xp, 1.0, &U).unwrap();
        assert!((a - b).norm() < 1e-7);
        // symmetry and conjugation
        let a = g_step(2.0, Side::Plus, 0.9, -0.3, 1.0, &U).unwrap();
        let b = g_step(2.0, Side::Plus, -0.3, 0.9, 1.0, &U).unwrap();
        assert!((a - b).norm() < 1e-15);
        let c = g_step(2.0, Side::Minus, 0.9, -0.3, 1.0, &U).unwrap();
        assert!((a - c.conj()).norm() < 1e-15);
        assert!(g_step(1.0, Side::Plus, 0.1, 0.2, 1.0, &U).is_err());
    }

    #[test]
    fn projector_sum_tiles_free_kernel() {
        for &(x, xp) in &[(0.8, -0.3), (-0.9, 0.4), (1.4, 0.2), (-0.6, -1.5)] {
            let sum = projector_kernel(2.0, 1.0, Side::Plus, x, xp, &U).unwrap()
                + projector_kernel(2.0, -1.0, Side::Plus, x, xp, &U).unwrap();
            let free = g_free(2.0, Side::Plus, x, xp, &U).unwrap();
            assert!((sum - free).norm() < 1e-12);
            // and on the minus side
            let sum = projector_kernel(2.0, 1.0, Side::Minus, x, xp, &U).unwrap()
                + projector_kernel(2.0, -1.0, Side::Minus, x, xp, &U).unwrap();
            let free = g_free(2.0, Side::Minus, x, xp, &U).unwrap();
            assert!((sum - free).norm() < 1e-12);
        }
    }

    #[test]
    fn inout_reduce_to_free_for_zero_step() {
        for &(x, xp) in &[(0.8, -0.3), (-0.2, 1.0)] {
            let a = g_inout(InOut::In, 2.0, Side::Plus, x, xp, 0.0, &U).unwrap();
            let b = g_inout(InOut::Out, 2.0, Side::Plus, x, xp, 0.0, &U).unwrap();
            let free = g_free(2.0, Side::Plus, x, xp, &U).unwrap();
            assert!((a - free).norm() < 1e-12);
            assert!((b - free).norm() < 1e-12);
        }
    }

    #[test]
    fn projector_kernel_coincidence_rejected() {
        assert!(projector_kernel(2.0, 1.0, Side::Plus, 0.3, 0.3, &U).is_err());
    }

    #[test]
    fn projector_kernel_short_distance_is_half_free() {
        // as |x - x'| -> 0 each projector carries half the free kernel
        let free = g_free(2.0, Side::Plus, 0.0, 0.0, &U).unwrap();
        for xi in [1.0, -1.0] {
            let k = projector_kernel(2.0, xi, Side::Plus, 1e-7, 0.0, &U).unwrap();
            assert!((k - free / 2.0).norm() < 1e-5);
        }
    }

    #[test]
    fn residual_check_converges_second_order() {
        let gauss = |x: f64| (-8.0 * (x - 0.2) * (x - 0.2)).exp();
        for kind in [KernelKind::Free, KernelKind::Shifted] {
            let kernel = ResolventKernel { kind, e: 2.0, side: Side::Plus, v0: 0.7, units: U };
            let r1 = residual_check(&kernel, gauss, (-1.0, 1.4), (-0.7, 1.1), 41).unwrap();
            let r2 = residual_check(&kernel, gauss, (-1.0, 1.4), (-0.7, 1.1), 81).unwrap();
            assert!(r2 < r1 / 3.0, "{kind:?}: r1 = {r1:.3e}, r2 = {r2:.3e}");
        }
        // step reference with f supported on the left of the origin
        let gauss_l = |x: f64| (-16.0 * (x + 0.8) * (x + 0.8)).exp();
        let kernel =
            ResolventKernel { kind: KernelKind::Step, e: 2.0, side: Side::Plus, v0: 1.0, units: U };
        let r1 = residual_check(&kernel, gauss_l, (-1.6, -0.05), (-1.4, -0.25), 41).unwrap();
        let r2 = residual_check(&kernel, gauss_l, (-1.6, -0.05), (-1.4, -0.25), 81).unwrap();
        assert!(r2 < r1 / 3.0, "step: r1 = {r1:.3e}, r2 = {r2:.3e}");
    }
}
