//! Nystrom discretization of the Lippmann-Schwinger integral equations.
//!
//! The unknown vector holds the wavefunction at the quadrature nodes plus
//! its values at the delta positions (deltas enter as exact rank-one terms,
//! never as smeared quadrature weights). Resolvent kernels carry an
//! `|x - x'|` derivative kink; for the row at `x_i` the panel containing
//! `x_i` is integrated by product quadrature (exact kernel against the
//! panel's Lagrange interpolant of the unknown), which restores the nominal
//! panel order of the rule.

use num_complex::Complex64;

use crate::error::Result;
use crate::linsolve::{lu_factor, relative_residual, CMatrix, LuFactors};
use crate::quadrature::{legendre_rule, QuadratureGrid};

/// Barycentric weights of a small node set, normalized to unit maximum.
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0f64; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= nodes[j] - nodes[k];
            }
        }
    }
    let m = w.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for v in &mut w {
        *v /= m;
    }
    w
}

/// Lagrange basis values `L_j(t)` for all `j` at one point `t`.
fn lagrange_row(nodes: &[f64], bary: &[f64], t: f64, out: &mut [f64]) {
    let n = nodes.len();
    for j in 0..n {
        if (t - nodes[j]).abs() < 1e-300 {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
            return;
        }
    }
    let mut denom = 0.0;
    for j in 0..n {
        out[j] = bary[j] / (t - nodes[j]);
        denom += out[j];
    }
    for v in out.iter_mut() {
        *v /= denom;
    }
}

/// Quadrature coefficients `c_j(x)` such that
/// `int_a^b K(x, x') phi(x') dx' ~= sum_j c_j phi(x_j)`,
/// with the kink panel of `x` handled by split product quadrature.
pub(crate) fn kernel_row<K: Fn(f64, f64) -> Complex64>(
    grid: &QuadratureGrid,
    kernel: &K,
    x: f64,
) -> Vec<Complex64> {
    let nodes = grid.nodes();
    let weights = grid.weights();
    let mut row: Vec<Complex64> = nodes
        .iter()
        .zip(weights)
        .map(|(&xj, &wj)| wj * kernel(x, xj))
        .collect();
    if let Some(pi) = grid.panel_containing(x) {
        let panel = grid.panels()[pi];
        let pnodes = &nodes[panel.start..panel.start + panel.len];
        let bary = barycentric_weights(pnodes);
        let (gl_nodes, gl_weights) = legendre_rule(16);
        let mut lag = vec![0.0f64; panel.len];
        for c in row[panel.start..panel.start + panel.len].iter_mut() {
            *c = Complex64::new(0.0, 0.0);
        }
        for (lo, hi) in [(panel.lo, x), (x, panel.hi)] {
            let h = hi - lo;
            if h < 1e-300 {
                continue;
            }
            for (t, w) in gl_nodes.iter().zip(&gl_weights) {
                let xq = lo + 0.5 * h * (t + 1.0);
                let kv = 0.5 * h * w * kernel(x, xq);
                lagrange_row(pnodes, &bary, xq, &mut lag);
                for (c, l) in row[panel.start..panel.start + panel.len].iter_mut().zip(&lag) {
                    *c += kv * *l;
                }
            }
        }
    }
    row
}

/// A discretized LS problem `(1 - G_ref V_resid) psi = rhs`.
pub(crate) struct NystromProblem<'a, K: Fn(f64, f64) -> Complex64> {
    pub grid: &'a QuadratureGrid,
    pub kernel: K,
    /// residual potential at the grid nodes
    pub v_nodes: Vec<f64>,
    /// `(position, strength)` of the delta spikes
    pub deltas: Vec<(f64, f64)>,
}

pub(crate) struct NystromSolved {
    /// unknown positions: grid nodes then delta positions
    pub positions: Vec<f64>,
    pub n_nodes: usize,
    /// one solution per right-hand side
    pub solutions: Vec<Vec<Complex64>>,
    pub relative_residual: f64,
    pub condition_indicator: f64,
    lu: LuFactors,
    a: CMatrix,
}

impl<'a, K: Fn(f64, f64) -> Complex64> NystromProblem<'a, K> {
    pub fn positions(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.grid.nodes().to_vec();
        p.extend(self.deltas.iter().map(|d| d.0));
        p
    }

    /// Applies the discrete integral operator `G_ref V_resid` to values
    /// given at the unknown positions, evaluated at an arbitrary probe `x`.
    pub fn apply_operator(&self, x: f64, values: &[Complex64]) -> Complex64 {
        let n = self.grid.len();
        let row = kernel_row(self.grid, &self.kernel, x);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            if self.v_nodes[j] != 0.0 {
                acc += row[j] * self.v_nodes[j] * values[j];
            }
        }
        for (d, &(x0, g)) in self.deltas.iter().enumerate() {
            acc += (self.kernel)(x, x0) * g * values[n + d];
        }
        acc
    }

    /// Assembles and LU-solves for each right-hand side (functions of the
    /// unknown position).
    pub fn solve(&self, rhs: &[&dyn Fn(f64) -> Complex64]) -> Result<NystromSolved> {
        let n = self.grid.len();
        let d = self.deltas.len();
        let m = n + d;
        let positions = self.positions();
        let mut a = CMatrix::zeros(m, m);
        for (i, &x) in positions.iter().enumerate() {
            let row = kernel_row(self.grid, &self.kernel, x);
            for j in 0..n {
                let val = -row[j] * self.v_nodes[j];
                *a.at_mut(i, j) = val;
            }
            for (dd, &(x0, g)) in self.deltas.iter().enumerate() {
                *a.at_mut(i, n + dd) = -(self.kernel)(x, x0) * g;
            }
            *a.at_mut(i, i) += 1.0;
        }
        let rhs_vecs: Vec<Vec<Complex64>> = rhs
            .iter()
            .map(|f| positions.iter().map(|&x| f(x)).collect())
            .collect();
        let lu = lu_factor(a.clone())?;
        let mut solutions = Vec::with_capacity(rhs_vecs.len());
        let mut worst = 0.0f64;
        for b in &rhs_vecs {
            let x = lu.solve(b);
            worst = worst.max(relative_residual(&a, &x, b));
            solutions.push(x);
        }
        Ok(NystromSolved {
            positions,
            n_nodes: n,
            solutions,
            relative_residual: worst,
            condition_indicator: lu.diag_ratio,
            lu,
            a,
        })
    }
}

impl NystromSolved {
    /// Solves one more right-hand side with the existing factorization.
    pub fn solve_extra(&mut self, b: &[Complex64]) -> (Vec<Complex64>, f64) {
        let x = self.lu.solve(b);
        let r = relative_residual(&self.a, &x, b);
        (x, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Potential, Segment};
    use crate::I;

    #[test]
    fn kernel_row_integrates_kinked_product_accurately() {
        // int K(x, x') phi(x') with K = e^{ik|x-x'|}: compare high-order
        // reference to the corrected row at modest panel count.
        let pot = Potential::new(
            1.0,
            -1.0,
            1.0,
            vec![Segment { lo: -1.0, hi: 1.0, v: 1.0 }],
            vec![],
        )
        .unwrap();
        let grid = QuadratureGrid::build(&pot, 64, 8).unwrap();
        let k = 3.0;
        let kernel = |x: f64, xp: f64| (I * k * (x - xp).abs()).exp();
        let phi = |x: f64| (I * 1.3 * x).exp() * (0.7 * x).cos();
        let x = grid.nodes()[grid.len() / 2] + 1e-3;
        let row = kernel_row(&grid, &kernel, x);
        let approx: Complex64 = row
            .iter()
            .zip(grid.nodes())
            .map(|(c, &xj)| c * phi(xj))
            .sum();
        // reference splits at the kink
        let reference = crate::quadrature::integrate(|xp| kernel(x, xp) * phi(xp), -1.0, x, 64, 32)
            + crate::quadrature::integrate(|xp| kernel(x, xp) * phi(xp), x, 1.0, 64, 32);
        assert!(
            (approx - reference).norm() < 1e-10,
            "corrected row error {:.3e}",
            (approx - reference).norm()
        );
        // without the correction the kink panel is visibly worse
        let plain: Complex64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&xj, &wj)| wj * kernel(x, xj) * phi(xj))
            .sum();
        assert!((plain - reference).norm() > 1e-7);
    }

    #[test]
    fn solves_trivial_identity_problem() {
        // V = 0 everywhere: psi = rhs exactly
        let pot = Potential::new(
            0.0,
            -0.5,
            0.5,
            vec![Segment { lo: -0.5, hi: 0.5, v: 0.0 }],
            vec![],
        )
        .unwrap();
        let grid = QuadratureGrid::build(&pot, 32, 8).unwrap();
        let problem = NystromProblem {
            grid: &grid,
            kernel: |_x: f64, _xp: f64| Complex64::new(0.3, 0.1),
            v_nodes: vec![0.0; grid.len()],
            deltas: vec![],
        };
        let rhs = |x: f64| Complex64::new(x, -x);
        let solved = problem.solve(&[&rhs]).unwrap();
        for (&x, v) in solved.positions.iter().zip(&solved.solutions[0]) {
            assert!((v - rhs(x)).norm() < 1e-14);
        }
        assert!(solved.relative_residual < 1e-13);
    }
}
