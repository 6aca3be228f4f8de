//! Sine/cosine integrals and the complex exponential integral.
//!
//! The in/out resolvent kernels need `ci(y) = Ci(y)` and
//! `si(y) = Si(y) - pi/2` at real positive argument. Both are obtained from
//! the exponential integral `E1` continued into the complex plane,
//!
//! `E1(-iy) = -Ci(y) - i si(y)`,  y > 0,
//!
//! evaluated by a power series for small `|z|` and by the standard continued
//! fraction elsewhere. Relative error stays below 1e-12 across the crossover,
//! comfortably inside the 1e-10 budget of the kernel checks.

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 400;
/// Series/continued-fraction crossover radius.
const CROSSOVER: f64 = 3.5;

/// Exponential integral `E1(z)` for complex `z` off the negative real axis.
pub fn e1_complex(z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("E1(0) diverges".into()));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::Domain("E1 on the negative real axis (branch cut)".into()));
    }
    if z.norm() <= CROSSOVER {
        e1_series(z)
    } else {
        e1_continued_fraction(z)
    }
}

fn e1_series(z: Complex64) -> Result<Complex64> {
    // E1(z) = -gamma - ln z + sum_{k>=1} (-1)^(k+1) z^k / (k k!)
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..=MAX_ITER {
        term *= -z / k as f64;
        let add = -term / k as f64;
        sum += add;
        if add.norm() < 1e-18 * (1.0 + sum.norm()) {
            return Ok(-EULER_GAMMA - z.ln() + sum);
        }
    }
    Err(Error::NonConvergence("E1 series".into()))
}

fn e1_continued_fraction(z: Complex64) -> Result<Complex64> {
    // E1(z) = exp(-z) / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
    // evaluated with the modified Lentz scheme.
    const TINY: f64 = 1e-290;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.finv();
    let mut h = d;
    for i in 1..=MAX_ITER {
        let a = -((i * i) as f64);
        b += 2.0;
        d = (a * d + b).finv();
        let mut cc = b + a / c;
        if cc.norm() < TINY {
            cc = Complex64::new(TINY, 0.0);
        }
        c = cc;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < 1e-15 {
            return Ok(h * (-z).exp());
        }
    }
    Err(Error::NonConvergence("E1 continued fraction".into()))
}

/// Cosine integral `Ci(y)`, `y > 0`.
pub fn ci(y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("Ci needs y > 0, got {y}")));
    }
    Ok(-e1_complex(Complex64::new(0.0, -y))?.re)
}

/// Shifted sine integral `si(y) = Si(y) - pi/2`, `y > 0`.
pub fn si_shifted(y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("si needs y > 0, got {y}")));
    }
    Ok(-e1_complex(Complex64::new(0.0, -y))?.im)
}

/// Sine integral `Si(y)`, `y > 0`.
pub fn si(y: f64) -> Result<f64> {
    Ok(std::f64::consts::FRAC_PI_2 + si_shifted(y)?)
}

/// The auxiliary combination `f(y) = ci(y) sin(y) - si(y) cos(y)` that the
/// momentum-projected kernels are built from. Decays like `1/y`.
pub fn aux_f(y: f64) -> Result<f64> {
    let e1 = e1_complex(Complex64::new(0.0, -y))?;
    let (s, c) = y.sin_cos();
    Ok(-e1.re * s + e1.im * c)
}

/// Asymptotic expansion `f(y) ~ 1/y - 2/y^3 + 24/y^5 - 720/y^7`, used for the
/// analytic tails of the in/out matrix elements. Relative error is below
/// `720/y^6`; callers must keep `y` large.
pub fn aux_f_asymptotic_terms(y: f64) -> [f64; 4] {
    let y2 = y * y;
    [1.0 / y, -2.0 / (y2 * y), 24.0 / (y2 * y2 * y), -720.0 / (y2 * y2 * y2 * y)]
}

/// `e^x E1(x)` for `x > 0`, overflow-free for large `x`.
pub fn e1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("e1_scaled needs x > 0, got {x}")));
    }
    if x <= CROSSOVER {
        Ok((e1_series(Complex64::new(x, 0.0))?.re) * x.exp())
    } else {
        // continued fraction already factors as E1 = e^{-x} CF
        const TINY: f64 = 1e-290;
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-15 {
                return Ok(h);
            }
        }
        Err(Error::NonConvergence("E1 continued fraction (real)".into()))
    }
}

/// `e^{-x} Ei(x)` for `x > 0`. Power series below 40 (all terms positive, no
/// cancellation), optimally truncated asymptotic series above.
pub fn ei_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ei_scaled needs x > 0, got {x}")));
    }
    if x < 40.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..=MAX_ITER {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add < 1e-17 * (1.0 + sum) {
                break;
            }
        }
        Ok((EULER_GAMMA + x.ln() + sum) * (-x).exp())
    } else {
        // Ei(x) ~ e^x/x (1 + 1!/x + 2!/x^2 + ...), stop at the smallest term.
        let mut sum = 1.0;
        let mut term = 1.0;
        for k in 1..=MAX_ITER {
            let next = term * k as f64 / x;
            if next >= term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        Ok(sum / x)
    }
}

/// The auxiliary function continued to `y = i eta` on the positive imaginary
/// axis (closed channel of the in/out kernels):
/// `f(i eta) = -(i/2)(e^eta E1(eta) + e^{-eta} Ei(eta)) + (pi/2) e^{-eta}`.
///
/// Matches `aux_f` as `eta -> 0` (both tend to `pi/2`) and decays like
/// `-i/eta` for large `eta`, consistent with `f(y) ~ 1/y` at `y = i eta`.
pub fn aux_f_imag_axis(eta: f64) -> Result<Complex64> {
    let s = e1_scaled(eta)? + ei_scaled(eta)?;
    Ok(Complex64::new(
        std::f64::consts::FRAC_PI_2 * (-eta).exp(),
        -0.5 * s,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::legendre_rule;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: Si by direct quadrature of sin(t)/t (entire integrand).
    fn si_oracle(x: f64) -> f64 {
        let (nodes, weights) = legendre_rule(40);
        let panels = (x.ceil() as usize).max(1) * 2;
        let h = x / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let lo = k as f64 * h;
            for (t, w) in nodes.iter().zip(&weights) {
                let u = lo + 0.5 * h * (t + 1.0);
                let f = if u == 0.0 { 1.0 } else { u.sin() / u };
                total += 0.5 * h * w * f;
            }
        }
        total
    }

    /// Independent oracle: Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt.
    fn ci_oracle(x: f64) -> f64 {
        let (nodes, weights) = legendre_rule(40);
        let panels = (x.ceil() as usize).max(1) * 2;
        let h = x / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let lo = k as f64 * h;
            for (t, w) in nodes.iter().zip(&weights) {
                let u = lo + 0.5 * h * (t + 1.0);
                let f = if u.abs() < 1e-8 { -u / 2.0 } else { (u.cos() - 1.0) / u };
                total += 0.5 * h * w * f;
            }
        }
        EULER_GAMMA + x.ln() + total
    }

    #[test]
    fn against_reference_values() {
        // A&S table values.
        assert_abs_diff_eq!(si(1.0).unwrap(), 0.946083070367183, epsilon = 1e-12);
        assert_abs_diff_eq!(ci(1.0).unwrap(), 0.337403922900968, epsilon = 1e-12);
    }

    #[test]
    fn against_quadrature_oracle_across_crossover() {
        for &x in &[0.05, 0.3, 1.0, 2.0, 3.4, 3.5, 3.6, 5.0, 8.0, 13.0, 27.0, 60.0] {
            let si_ref = si_oracle(x);
            let ci_ref = ci_oracle(x);
            assert_abs_diff_eq!(si(x).unwrap(), si_ref, epsilon = 1e-11 * (1.0 + si_ref.abs()));
            assert_abs_diff_eq!(ci(x).unwrap(), ci_ref, epsilon = 1e-11 * (1.0 + ci_ref.abs()));
        }
    }

    #[test]
    fn aux_f_matches_definition_and_asymptotics() {
        for &y in &[0.2, 1.0, 4.0, 10.0] {
            let f = aux_f(y).unwrap();
            let direct = ci(y).unwrap() * y.sin() - si_shifted(y).unwrap() * y.cos();
            assert_abs_diff_eq!(f, direct, epsilon = 1e-13);
        }
        for &y in &[30.0, 100.0, 400.0] {
            let f = aux_f(y).unwrap();
            let asymp: f64 = aux_f_asymptotic_terms(y).iter().sum();
            // truncation error is the next term, 8!/y^9
            assert_abs_diff_eq!(f, asymp, epsilon = 1e5 * y.powi(-9) + 1e-14);
        }
    }

    #[test]
    fn aux_f_small_argument_limit() {
        // f(y) -> pi/2 as y -> 0+ (the ci(y) sin(y) product vanishes).
        let f = aux_f(1e-9).unwrap();
        assert_abs_diff_eq!(f, std::f64::consts::FRAC_PI_2, epsilon = 1e-7);
    }

    #[test]
    fn domain_errors() {
        assert!(ci(0.0).is_err());
        assert!(ci(-1.0).is_err());
        assert!(e1_complex(Complex64::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn scaled_exponential_integrals() {
        // Ei(1) = 1.895117816355937, E1(1) = 0.219383934395520
        assert_abs_diff_eq!(ei_scaled(1.0).unwrap(), 1.895117816355937 * (-1.0f64).exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(e1_scaled(1.0).unwrap(), 0.219383934395520 * 1.0f64.exp(), epsilon = 1e-13);
        // large-argument behaviour e^{-x} Ei(x) ~ 1/x, e^x E1(x) ~ 1/x
        for &x in &[50.0, 120.0, 800.0] {
            let lead = 1.0 / x;
            assert_abs_diff_eq!(ei_scaled(x).unwrap(), lead * (1.0 + 1.0 / x + 2.0 / (x * x)), epsilon = 1e-4 * lead);
            assert_abs_diff_eq!(e1_scaled(x).unwrap(), lead * (1.0 - 1.0 / x + 2.0 / (x * x)), epsilon = 1e-4 * lead);
        }
        // both branches against reference values around the 40 crossover
        assert_abs_diff_eq!(ei_scaled(39.9).unwrap(), 0.02572491881509074, epsilon = 1e-13);
        assert_abs_diff_eq!(ei_scaled(40.0).unwrap(), 0.02565886278597515, epsilon = 1e-13);
        assert_abs_diff_eq!(e1_scaled(40.0).unwrap(), 0.02440411507962858, epsilon = 1e-13);
    }

    #[test]
    fn aux_f_imaginary_axis_limits() {
        // eta -> 0: matches f(0+) = pi/2
        let f = aux_f_imag_axis(1e-8).unwrap();
        assert_abs_diff_eq!(f.re, std::f64::consts::FRAC_PI_2, epsilon = 1e-6);
        // large eta: f(i eta) ~ 1/(i eta) = -i/eta
        let f = aux_f_imag_axis(200.0).unwrap();
        assert!(f.re.abs() < 1e-80);
        assert_abs_diff_eq!(f.im, -1.0 / 200.0, epsilon = 1e-6);
    }
}
