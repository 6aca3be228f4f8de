//! Gauss-Legendre panel quadrature over the potential support.
//!
//! The grid is built from panels that never straddle a segment edge, a delta
//! position, or the origin, so every integrand assembled downstream is smooth
//! panel by panel except for the `|x - x'|` kink of the resolvent kernels,
//! which gets a dedicated product-quadrature correction in the solver.

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; accurate to machine
/// precision for the orders used here (n <= 64).
pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && n <= 64);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrates `f` over `[lo, hi]` with `panels` Gauss-Legendre panels of the
/// given order. Plain helper for oracles and smooth one-off integrals.
pub fn integrate<F: FnMut(f64) -> num_complex::Complex64>(
    mut f: F,
    lo: f64,
    hi: f64,
    panels: usize,
    order: usize,
) -> num_complex::Complex64 {
    let (nodes, weights) = legendre_rule(order);
    let h = (hi - lo) / panels as f64;
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let a = lo + k as f64 * h;
        for (t, w) in nodes.iter().zip(&weights) {
            let x = a + 0.5 * h * (t + 1.0);
            total += 0.5 * h * w * f(x);
        }
    }
    total
}

/// One quadrature panel: `len` consecutive nodes on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub start: usize,
    pub len: usize,
}

/// Gauss-Legendre panel grid over the support `[a, b]` of a potential.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: Vec<Panel>,
    order: usize,
    support: (f64, f64),
}

impl QuadratureGrid {
    /// Builds a grid with roughly `n_target` nodes using panels of the given
    /// order. Panels split at every breakpoint of the potential and at the
    /// origin, so nodes never coincide with a delta position.
    pub fn build(pot: &Potential, n_target: usize, order: usize) -> Result<Self> {
        if order < 2 || order > 64 {
            return Err(Error::Config(format!("panel order {order} out of range")));
        }
        let (a, b) = (pot.support_lo(), pot.support_hi());
        let mut cuts = pot.breakpoints();
        if a < 0.0 && b > 0.0 && !cuts.iter().any(|&c| c.abs() < 1e-14) {
            cuts.push(0.0);
            cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
        }
        let length = b - a;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panels = Vec::new();
        if length > 0.0 {
            let n_panels_target = (n_target + order - 1) / order;
            let target_h = length / n_panels_target.max(1) as f64;
            let (ref_nodes, ref_weights) = legendre_rule(order);
            for win in cuts.windows(2) {
                let (lo, hi) = (win[0], win[1]);
                if hi - lo < 1e-14 * length.max(1.0) {
                    continue;
                }
                let m = (((hi - lo) / target_h).ceil() as usize).max(1);
                let h = (hi - lo) / m as f64;
                for k in 0..m {
                    let plo = lo + k as f64 * h;
                    let phi = plo + h;
                    let start = nodes.len();
                    for (t, w) in ref_nodes.iter().zip(&ref_weights) {
                        nodes.push(plo + 0.5 * h * (t + 1.0));
                        weights.push(0.5 * h * w);
                    }
                    panels.push(Panel { lo: plo, hi: phi, start, len: order });
                }
            }
        }
        Ok(QuadratureGrid { nodes, weights, panels, order, support: (a, b) })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Index of the panel whose interval contains `x`, if any.
    pub fn panel_containing(&self, x: f64) -> Option<usize> {
        self.panels.iter().position(|p| x > p.lo && x < p.hi)
    }
}
