//! Dense complex linear algebra for the Nystrom systems.
//!
//! Column-major LU with partial pivoting and a right-looking update that
//! walks contiguous columns, which keeps the 2000x2000 systems of the
//! identity suites fast enough on small machines. Also a tiny least-squares
//! helper for the asymptotic-coefficient fits.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Column-major dense matrix.
#[derive(Debug, Clone)]
pub struct CMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CMatrix { n_rows, n_cols, data: vec![Complex64::new(0.0, 0.0); n_rows * n_cols] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.n_rows + i]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[j * self.n_rows + i]
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn mat_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_rows];
        for j in 0..self.n_cols {
            let xj = x[j];
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (yi, aij) in y.iter_mut().zip(self.col(j)) {
                *yi += *aij * xj;
            }
        }
        y
    }
}

/// LU factorization with partial pivoting, consuming the matrix.
pub struct LuFactors {
    lu: CMatrix,
    pivots: Vec<usize>,
    /// max |U_kk| / min |U_kk|, a cheap conditioning indicator.
    pub diag_ratio: f64,
}

pub fn lu_factor(mut a: CMatrix) -> Result<LuFactors> {
    let n = a.n_rows;
    assert_eq!(n, a.n_cols, "LU needs a square matrix");
    let mut pivots = vec![0usize; n];
    let mut diag_min = f64::INFINITY;
    let mut diag_max: f64 = 0.0;
    for k in 0..n {
        // pivot search in column k
        let (mut best, mut best_val) = (k, 0.0f64);
        {
            let colk = a.col(k);
            for i in k..n {
                let v = colk[i].norm_sqr();
                if v > best_val {
                    best_val = v;
                    best = i;
                }
            }
        }
        if best_val == 0.0 || !best_val.is_finite() {
            return Err(Error::SingularSystem { indicator: f64::INFINITY });
        }
        pivots[k] = best;
        if best != k {
            for j in 0..a.n_cols {
                a.data.swap(j * n + k, j * n + best);
            }
        }
        let pivot = a.at(k, k);
        let pn = pivot.norm();
        diag_min = diag_min.min(pn);
        diag_max = diag_max.max(pn);
        let inv = pivot.finv();
        // scale the subdiagonal of column k
        for i in k + 1..n {
            let idx = k * n + i;
            a.data[idx] *= inv;
        }
        // rank-1 update of the trailing block, column by column
        let (head, tail) = a.data.split_at_mut((k + 1) * n);
        let lcol = &head[k * n + k + 1..k * n + n];
        for j in 0..n - k - 1 {
            let col = &mut tail[j * n..(j + 1) * n];
            let m = col[k];
            if m != Complex64::new(0.0, 0.0) {
                let target = &mut col[k + 1..n];
                for (t, l) in target.iter_mut().zip(lcol) {
                    *t -= m * *l;
                }
            }
        }
    }
    Ok(LuFactors { lu: a, pivots, diag_ratio: diag_max / diag_min })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.lu.n_rows
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n();
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        // forward: L y = P b (unit diagonal)
        for k in 0..n {
            let bk = b[k];
            if bk != Complex64::new(0.0, 0.0) {
                let col = self.lu.col(k);
                for i in k + 1..n {
                    b[i] -= col[i] * bk;
                }
            }
        }
        // backward: U x = y
        for k in (0..n).rev() {
            let col = self.lu.col(k);
            b[k] /= col[k];
            let bk = b[k];
            if bk != Complex64::new(0.0, 0.0) {
                for i in 0..k {
                    b[i] -= col[i] * bk;
                }
            }
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Relative residual `||A x - b|| / ||b||`.
pub fn relative_residual(a: &CMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.mat_vec(x);
    let mut rn = 0.0;
    let mut bn = 0.0;
    for i in 0..b.len() {
        rn += (ax[i] - b[i]).norm_sqr();
        bn += b[i].norm_sqr();
    }
    if bn == 0.0 {
        rn.sqrt()
    } else {
        (rn / bn).sqrt()
    }
}

/// Least-squares solve of an overdetermined `m x n` system (`m >= n`, tiny
/// `n`) by normal equations; adequate for the 2-4 column asymptotic fits.
pub fn least_squares(a: &CMatrix, b: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let (m, n) = (a.n_rows, a.n_cols);
    assert!(m >= n && b.len() == m);
    let mut ata = CMatrix::zeros(n, n);
    let mut atb = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..m {
                s += a.at(k, i).conj() * a.at(k, j);
            }
            *ata.at_mut(i, j) = s;
        }
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..m {
            s += a.at(k, i).conj() * b[k];
        }
        atb[i] = s;
    }
    let lu = lu_factor(ata)?;
    let x = lu.solve(&atb);
    let mut res = 0.0;
    for k in 0..m {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            s += a.at(k, j) * x[j];
        }
        res += (s - b[k]).norm_sqr();
    }
    Ok((x, res.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn solves_random_system_to_machine_precision() {
        let n = 120;
        let mut s = 7u64;
        let mut a = CMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                *a.at_mut(i, j) = Complex64::new(lcg(&mut s), lcg(&mut s));
            }
            // diagonal boost keeps the test well-conditioned
            *a.at_mut(j, j) += Complex64::new(4.0, 1.0);
        }
        let x_true: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(lcg(&mut s), lcg(&mut s))).collect();
        let b = a.mat_vec(&x_true);
        let lu = lu_factor(a.clone()).unwrap();
        let x = lu.solve(&b);
        assert!(relative_residual(&a, &x, &b) < 1e-13);
        let err: f64 = x.iter().zip(&x_true).map(|(u, v)| (u - v).norm()).sum::<f64>() / n as f64;
        assert!(err < 1e-11);
        assert!(lu.diag_ratio.is_finite());
    }

    #[test]
    fn singular_matrix_reported() {
        let mut a = CMatrix::zeros(3, 3);
        *a.at_mut(0, 0) = Complex64::new(1.0, 0.0);
        *a.at_mut(1, 1) = Complex64::new(1.0, 0.0);
        // third row/col zero
        assert!(lu_factor(a).is_err());
    }

    #[test]
    fn least_squares_exact_fit() {
        // fit y = 2 - 3i x on three points
        let mut a = CMatrix::zeros(3, 2);
        let xs = [0.5, 1.0, 2.0];
        for (k, &x) in xs.iter().enumerate() {
            *a.at_mut(k, 0) = Complex64::new(1.0, 0.0);
            *a.at_mut(k, 1) = Complex64::new(x, 0.0);
        }
        let c0 = Complex64::new(2.0, 0.0);
        let c1 = Complex64::new(0.0, -3.0);
        let b: Vec<Complex64> = xs.iter().map(|&x| c0 + c1 * x).collect();
        let (c, res) = least_squares(&a, &b).unwrap();
        assert!((c[0] - c0).norm() < 1e-12);
        assert!((c[1] - c1).norm() < 1e-12);
        assert!(res < 1e-12);
    }
}
