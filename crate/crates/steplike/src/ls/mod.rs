//! Numerical solution of the Lippmann-Schwinger equations.
//!
//! Three partitionings of the Hamiltonian are supported:
//!
//! * `MmLeft` — free reference `H_l`, residual `V_l = V`. The residual keeps
//!   the constant value `V0` on `[b, inf)`, so the equation is rearranged:
//!   the tail contribution of `G_l V_l` acting on the known asymptotic form
//!   `T e^{iqx/hbar}` is evaluated in closed form and carried as a second
//!   right-hand side; the scalar amplitude `T` is then fixed exactly by
//!   evaluating the equation at one exterior point.
//! * `MmRight` — shifted reference `H_r = H_0 + V0`, residual `V_r = V - V0`
//!   with the constant tail `-V0` on `(-inf, a]`, handled the same way.
//! * `Lp` — pure-step reference `H_s`, residual `V_s = V - V0 theta(x)` with
//!   compact support: a plain second-kind system, no tails.
//!
//! All grid solutions are stored in reduced normalization (no `h^(-1/2)`,
//! no `(p/q)^(1/2)`); the extraction routines restore the physical factors.

mod checks;
mod extract;
mod nystrom;
mod tails;

pub use checks::{check_alternative_ls, check_two_potential, TwoPotentialCombo, TwoPotentialFamily};
pub use extract::{
    extract_amplitudes_lp, extract_amplitudes_mm, lp_amplitudes, lp_t_matrix_elements,
    mm_amplitudes, ordinary_amplitudes, LpTElements, TMatrixElement, TOperatorKind,
};

use std::sync::Arc;

use num_complex::Complex64;

use crate::closed_form::{AmplitudeSet, Incidence, StepState};
use crate::error::{Error, Result};
use crate::greens::{free_kernel_w, step_kernel_params, step_kernel_with, Side};
use crate::potential::{BranchMomentum, Potential};
use crate::quadrature::QuadratureGrid;
use crate::I;
use nystrom::NystromProblem;
use tails::{finite_osc, tail_left, tail_right};

/// Which partitioning produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partitioning {
    MmLeft,
    MmRight,
    Lp,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveDiagnostics {
    /// worst relative residual of the dense linear solves
    pub relative_residual: f64,
    /// `max |U_kk| / min |U_kk|` of the LU, a cheap conditioning indicator
    pub condition_indicator: f64,
    /// total number of unknowns (nodes + delta positions)
    pub unknowns: usize,
}

/// A scattering state solved on the quadrature grid.
#[derive(Clone)]
pub struct LSolution {
    pub partitioning: Partitioning,
    pub bm: BranchMomentum,
    /// state sign: `+` for `|p^+>`, `-` for `|p^->`
    pub state_sign: f64,
    pub pot: Potential,
    pub grid: Arc<QuadratureGrid>,
    /// reduced wavefunction at the grid nodes
    pub values: Vec<Complex64>,
    /// reduced wavefunction at the delta positions
    pub delta_values: Vec<Complex64>,
    /// unknown asymptotic amplitude fixed by the tail closure
    /// (`T^l` for MmLeft, `T^r(-p)` for MmRight, absent for Lp)
    pub tail_amp: Option<Complex64>,
    pub diagnostics: SolveDiagnostics,
    /// amplitudes attached after extraction
    pub amplitudes: Option<AmplitudeSet>,
}

impl LSolution {
    /// Left- or right-incidence family of the state.
    pub fn incidence(&self) -> Incidence {
        if self.state_sign == self.bm.p.signum() {
            Incidence::Left
        } else {
            Incidence::Right
        }
    }

    /// All unknown values, grid nodes first, delta points after.
    pub fn all_values(&self) -> Vec<Complex64> {
        let mut v = self.values.clone();
        v.extend_from_slice(&self.delta_values);
        v
    }

    pub fn with_amplitudes(mut self, amps: AmplitudeSet) -> Self {
        self.amplitudes = Some(amps);
        self
    }

    /// Reduced wavefunction anywhere, by Nystrom interpolation: the solved
    /// grid values inserted back into the integral equation.
    pub fn eval_reduced(&self, x: f64) -> Result<Complex64> {
        let pieces = Pieces::build(&self.pot, &self.bm, self.partitioning, self.state_sign, self.grid.as_ref())?;
        let problem = pieces.problem(self.grid.as_ref());
        let all = self.all_values();
        let mut val = (pieces.reference)(x) + problem.apply_operator(x, &all);
        if let (Some(tail), Some(amp)) = (&pieces.tail, self.tail_amp) {
            val += amp * (tail.column)(x);
        }
        Ok(val)
    }
}

/// Exterior tail data of an MM partitioning.
struct TailPieces {
    /// tail contribution per unit asymptotic amplitude, any probe `x`
    column: Box<dyn Fn(f64) -> Complex64>,
    /// momentum of the asymptotic wave `e^{i k x / hbar}` with unknown amplitude
    k_asym: Complex64,
    /// exterior probe candidates for the scalar closure
    probes: Vec<f64>,
}

/// Kernel, reference, residual values and tails of one partitioning.
struct Pieces {
    kernel: Box<dyn Fn(f64, f64) -> Complex64>,
    reference: Box<dyn Fn(f64) -> Complex64>,
    v_nodes: Vec<f64>,
    deltas: Vec<(f64, f64)>,
    tail: Option<TailPieces>,
}

impl Pieces {
    fn problem<'a>(&'a self, grid: &'a QuadratureGrid) -> NystromProblem<'a, &'a dyn Fn(f64, f64) -> Complex64> {
        NystromProblem {
            grid,
            kernel: self.kernel.as_ref(),
            v_nodes: self.v_nodes.clone(),
            deltas: self.deltas.clone(),
        }
    }

    fn build(
        pot: &Potential,
        bm: &BranchMomentum,
        partitioning: Partitioning,
        sign: f64,
        grid: &QuadratureGrid,
    ) -> Result<Pieces> {
        let units = bm.units;
        let hbar = units.hbar;
        let mass = units.mass;
        let v0 = pot.v0();
        let (a, b) = (pot.support_lo(), pot.support_hi());
        let p = bm.p;
        let q = bm.q;
        let scale = bm.p.abs().max(bm.p0);
        let deltas: Vec<(f64, f64)> = pot.deltas().iter().map(|d| (d.x0, d.strength)).collect();

        match partitioning {
            Partitioning::MmLeft => {
                // kernel G_l(E + sign(p) i0): branch momentum = p itself
                let w = Complex64::new(p, 0.0);
                let kernel = Box::new(move |x: f64, xp: f64| free_kernel_w(w, x - xp, &units));
                let reference = Box::new(move |x: f64| (I * p * x / hbar).exp());
                let v_nodes = grid.nodes().iter().map(|&x| pot.evaluate(x)).collect();
                let c_k = -I * mass / (hbar * w);
                let column: Box<dyn Fn(f64) -> Complex64> = if v0 == 0.0 {
                    Box::new(|_x| Complex64::new(0.0, 0.0))
                } else {
                    Box::new(move |x: f64| {
                        let phase_m = (-I * p * x / hbar).exp();
                        if x <= b {
                            v0 * c_k * phase_m * tail_right(q + p, b, hbar, scale).unwrap()
                        } else {
                            let phase_p = (I * p * x / hbar).exp();
                            v0 * c_k
                                * (phase_p * finite_osc(q - Complex64::new(p, 0.0), b, x, hbar)
                                    + phase_m * tail_right(q + p, x, hbar, scale).unwrap())
                        }
                    })
                };
                // probe distances scaled to the asymptotic wavelengths
                let step = 0.5 * hbar / p.abs().max(q.norm());
                let probes = (1..=5).map(|k| b + k as f64 * step).collect();
                Ok(Pieces {
                    kernel,
                    reference,
                    v_nodes,
                    deltas,
                    tail: Some(TailPieces { column, k_asym: q, probes }),
                })
            }
            Partitioning::MmRight => {
                // kernel G_r(E - sign(p) i0): branch momentum = -q
                let w = -q;
                let kernel = Box::new(move |x: f64, xp: f64| free_kernel_w(w, x - xp, &units));
                let qq = q;
                let reference = Box::new(move |x: f64| (I * qq * x / hbar).exp());
                let v_nodes = grid.nodes().iter().map(|&x| pot.evaluate(x) - v0).collect();
                let c_k = -I * mass / (hbar * w);
                let column: Box<dyn Fn(f64) -> Complex64> = if v0 == 0.0 {
                    Box::new(|_x| Complex64::new(0.0, 0.0))
                } else {
                    Box::new(move |x: f64| {
                        // exponents: p - w = p + q on the far side, p + w = p - q inside
                        let k_far = Complex64::new(p, 0.0) - w;
                        let k_mid = Complex64::new(p, 0.0) + w;
                        if x >= a {
                            -v0 * c_k
                                * (I * w * x / hbar).exp()
                                * tail_left(k_far, a, hbar, scale).unwrap()
                        } else {
                            -v0 * c_k
                                * ((I * w * x / hbar).exp()
                                    * tail_left(k_far, x, hbar, scale).unwrap()
                                    + (-I * w * x / hbar).exp() * finite_osc(k_mid, x, a, hbar))
                        }
                    })
                };
                let step = 0.5 * hbar / p.abs().max(q.norm());
                let probes = (1..=5).map(|k| a - k as f64 * step).collect();
                Ok(Pieces {
                    kernel,
                    reference,
                    v_nodes,
                    deltas,
                    tail: Some(TailPieces { column, k_asym: Complex64::new(p, 0.0), probes }),
                })
            }
            Partitioning::Lp => {
                let side = if sign > 0.0 { Side::Plus } else { Side::Minus };
                let par = step_kernel_params(bm.energy(), side, v0, &units)?;
                let kernel =
                    Box::new(move |x: f64, xp: f64| step_kernel_with(&par, side, x, xp, &units));
                let state = if sign == p.signum() {
                    StepState::left(*bm)
                } else {
                    StepState::right(*bm)?
                };
                let reference = Box::new(move |x: f64| state.ket_reduced(x));
                let v_nodes = grid
                    .nodes()
                    .iter()
                    .map(|&x| pot.evaluate(x) - if x > 0.0 { v0 } else { 0.0 })
                    .collect();
                Ok(Pieces { kernel, reference, v_nodes, deltas, tail: None })
            }
        }
    }
}

/// Solves the LS equation of the chosen partitioning for the state
/// `|p^{sign}>` at the label of `bm`, on a shared quadrature grid.
pub fn solve_ls(
    pot: &Potential,
    bm: &BranchMomentum,
    partitioning: Partitioning,
    sign: f64,
    grid: Arc<QuadratureGrid>,
) -> Result<LSolution> {
    debug_assert!(sign == 1.0 || sign == -1.0);
    if (pot.v0() - bm.v0).abs() > 1e-12 * (1.0 + pot.v0()) {
        return Err(Error::Config("branch momentum and potential disagree on V0".into()));
    }
    if bm.at_threshold {
        return Err(Error::AtThreshold { p0: bm.p0 });
    }
    match partitioning {
        Partitioning::MmLeft => {
            if sign != bm.p.signum() {
                return Err(Error::Config(
                    "the left-channel partitioning produces the states |p^{sign p}>".into(),
                ));
            }
        }
        Partitioning::MmRight => {
            if sign != -bm.p.signum() {
                return Err(Error::Config(
                    "the right-channel partitioning produces the states |p^{-sign p}>".into(),
                ));
            }
            bm.require_open()?;
        }
        Partitioning::Lp => {
            if sign != bm.p.signum() {
                bm.require_open()?;
            }
        }
    }

    let pieces = Pieces::build(pot, bm, partitioning, sign, grid.as_ref())?;
    let problem = pieces.problem(grid.as_ref());
    let n = grid.len();
    let d = pieces.deltas.len();

    // trivial case: no unknowns (pure step through the LP partitioning)
    if n + d == 0 {
        return Ok(LSolution {
            partitioning,
            bm: *bm,
            state_sign: sign,
            pot: pot.clone(),
            grid,
            values: vec![],
            delta_values: vec![],
            tail_amp: match &pieces.tail {
                // no structure at all: the reference passes through unchanged
                Some(_) => Some(Complex64::new(1.0, 0.0)),
                None => None,
            },
            diagnostics: SolveDiagnostics {
                relative_residual: 0.0,
                condition_indicator: 1.0,
                unknowns: 0,
            },
            amplitudes: None,
        });
    }

    let reference = pieces.reference.as_ref();
    let mut rhs: Vec<&dyn Fn(f64) -> Complex64> = vec![reference];
    if let Some(tail) = &pieces.tail {
        rhs.push(tail.column.as_ref());
    }
    let solved = problem.solve(&rhs)?;

    let (all, tail_amp) = match &pieces.tail {
        None => (solved.solutions[0].clone(), None),
        Some(tail) => {
            let psi0 = &solved.solutions[0];
            let psi1 = &solved.solutions[1];
            let hbar = bm.units.hbar;
            let mut closed = None;
            for &xe in &tail.probes {
                let asym = (I * tail.k_asym * xe / hbar).exp();
                let num = (pieces.reference)(xe) + problem.apply_operator(xe, psi0);
                let den = asym - problem.apply_operator(xe, psi1) - (tail.column)(xe);
                if den.norm() > 1e-8 * (1.0 + num.norm()) {
                    closed = Some(num / den);
                    break;
                }
            }
            let amp = closed.ok_or_else(|| {
                Error::DegenerateTail("tail closure degenerate at all probe points".into())
            })?;
            let combined: Vec<Complex64> =
                psi0.iter().zip(psi1).map(|(u, v)| u + amp * v).collect();
            (combined, Some(amp))
        }
    };

    Ok(LSolution {
        partitioning,
        bm: *bm,
        state_sign: sign,
        pot: pot.clone(),
        grid,
        values: all[..n].to_vec(),
        delta_values: all[n..].to_vec(),
        tail_amp,
        diagnostics: SolveDiagnostics {
            relative_residual: solved.relative_residual,
            condition_indicator: solved.condition_indicator,
            unknowns: n + d,
        },
        amplitudes: None,
    })
}

/// Convenience: builds a grid of roughly `n` nodes and solves.
pub fn solve_ls_n(
    pot: &Potential,
    bm: &BranchMomentum,
    partitioning: Partitioning,
    sign: f64,
    n: usize,
) -> Result<LSolution> {
    let grid = Arc::new(QuadratureGrid::build(pot, n, 16)?);
    solve_ls(pot, bm, partitioning, sign, grid)
}

/// Overlap `<bra| V_resid |sol>` over the support: panelwise quadrature of
/// `bra(x) v(x) u(x)` plus the exact delta terms `bra(x0) g u(x0)`.
/// No `h` normalization factors are applied here.
pub(crate) fn overlap_with(
    sol: &LSolution,
    bra: &dyn Fn(f64) -> Complex64,
    v_resid: &dyn Fn(f64) -> f64,
) -> Complex64 {
    let grid = sol.grid.as_ref();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&x, &w), u) in grid.nodes().iter().zip(grid.weights()).zip(&sol.values) {
        let v = v_resid(x);
        if v != 0.0 {
            acc += w * bra(x) * v * u;
        }
    }
    for (d, u) in sol.pot.deltas().iter().zip(&sol.delta_values) {
        acc += bra(d.x0) * d.strength * u;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{scattering_wave, step_amplitudes, WaveSign};
    use crate::potential::{branch_momentum, DeltaSpike, Potential, Segment, Units};

    fn bm(p: f64, v0: f64) -> BranchMomentum {
        branch_momentum(p, v0, Units::default()).unwrap()
    }

    #[test]
    fn lp_on_pure_step_returns_reference() {
        let pot = Potential::pure_step(1.0).unwrap();
        let b = bm(2.0, 1.0);
        let sol = solve_ls_n(&pot, &b, Partitioning::Lp, 1.0, 200).unwrap();
        assert_eq!(sol.diagnostics.unknowns, 0);
        // the state is the step eigenstate itself
        let st = StepState::left(b);
        for &x in &[-2.0, -0.3, 0.4, 1.7] {
            let v = sol.eval_reduced(x).unwrap();
            assert!((v - st.ket_reduced(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn mm_left_solves_square_barrier_over_step() {
        let pot = Potential::new(
            1.0,
            -0.4,
            0.6,
            vec![Segment { lo: -0.4, hi: 0.6, v: 2.0 }],
            vec![],
        )
        .unwrap();
        let b = bm(2.0, 1.0);
        let sol = solve_ls_n(&pot, &b, Partitioning::MmLeft, 1.0, 480).unwrap();
        assert!(sol.diagnostics.relative_residual < 1e-10);
        let wave = scattering_wave(&pot, &b, WaveSign::Plus, Incidence::Left).unwrap();
        // grid values match the transfer-matrix wave (both reduced)
        let mut worst: f64 = 0.0;
        for (&x, u) in sol.grid.nodes().iter().zip(&sol.values) {
            worst = worst.max((u - wave.eval_reduced(x)).norm());
        }
        assert!(worst < 2e-7, "grid disagreement {worst:.3e}");
        // the closure amplitude is the transmission amplitude
        let t_l = sol.tail_amp.unwrap();
        assert!((t_l - wave.amps.t_l).norm() < 1e-8, "T^l from closure");
    }

    #[test]
    fn mm_right_solves_square_barrier_over_step() {
        let pot = Potential::new(
            1.0,
            -0.4,
            0.6,
            vec![Segment { lo: -0.4, hi: 0.6, v: 2.0 }],
            vec![],
        )
        .unwrap();
        // state |(-p)^+>: right incidence at label -p
        let b = bm(-2.0, 1.0);
        let sol = solve_ls_n(&pot, &b, Partitioning::MmRight, 1.0, 480).unwrap();
        let wave = scattering_wave(&pot, &b, WaveSign::Plus, Incidence::Right).unwrap();
        let mut worst: f64 = 0.0;
        for (&x, u) in sol.grid.nodes().iter().zip(&sol.values) {
            worst = worst.max((u - wave.eval_reduced(x)).norm());
        }
        assert!(worst < 2e-7, "grid disagreement {worst:.3e}");
        // closure amplitude = T^r(p) with p = -label = +2
        let t_r = sol.tail_amp.unwrap();
        let amps = crate::closed_form::transfer_matrix_amplitudes(&pot, &bm(2.0, 1.0)).unwrap();
        assert!((t_r - amps.t_r.unwrap()).norm() < 1e-8);
    }

    #[test]
    fn lp_solution_matches_mm_solution_pointwise() {
        let pot = Potential::new(
            1.0,
            -0.5,
            0.5,
            vec![Segment { lo: -0.5, hi: 0.5, v: 1.8 }],
            vec![DeltaSpike { x0: 0.25, strength: -0.3 }],
        )
        .unwrap();
        let b = bm(1.9, 1.0);
        let grid = Arc::new(QuadratureGrid::build(&pot, 600, 16).unwrap());
        let lp = solve_ls(&pot, &b, Partitioning::Lp, 1.0, grid.clone()).unwrap();
        let mm = solve_ls(&pot, &b, Partitioning::MmLeft, 1.0, grid).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in lp.values.iter().zip(&mm.values) {
            worst = worst.max((u - v).norm());
        }
        assert!(worst < 1e-7, "LP vs MM pointwise {worst:.3e}");
    }

    #[test]
    fn evanescent_lp_solution_exists() {
        let pot = Potential::step_delta(1.0, 0.01).unwrap();
        let b = bm(0.8, 1.0);
        let sol = solve_ls_n(&pot, &b, Partitioning::Lp, 1.0, 64).unwrap();
        assert_eq!(sol.diagnostics.unknowns, 1);
        // below threshold the right-family solve must be rejected
        assert!(solve_ls_n(&pot, &b, Partitioning::Lp, -1.0, 64).is_err());
        assert!(solve_ls_n(&pot, &b, Partitioning::MmRight, -1.0, 64).is_err());
    }

    #[test]
    fn partitioning_sign_constraints() {
        let pot = Potential::pure_step(1.0).unwrap();
        let b = bm(2.0, 1.0);
        assert!(solve_ls_n(&pot, &b, Partitioning::MmLeft, -1.0, 32).is_err());
        assert!(solve_ls_n(&pot, &b, Partitioning::MmRight, 1.0, 32).is_err());
        let thr = branch_momentum((2.0f64).sqrt(), 1.0, Units::default()).unwrap();
        assert!(solve_ls_n(&pot, &thr, Partitioning::Lp, 1.0, 32).is_err());
    }
}
