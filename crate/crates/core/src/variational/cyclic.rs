//! Tridiagonal systems with two corner entries, solved in O(n).
//!
//! The band is factored by Gaussian elimination with partial pivoting (the
//! upper factor gains a second superdiagonal); the corners are folded in by a
//! rank-2 Sherman–Morrison–Woodbury correction.

use crate::error::{Error, Result};

/// `sub[i]` is entry `(i+1, i)`, `sup[i]` is `(i, i+1)`; `top_right` is
/// `(0, N-1)` and `bottom_left` is `(N-1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub top_right: f64,
    pub bottom_left: f64,
}

impl CyclicTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Row-major dense copy (for diagnostics and tests).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] += self.diag[i];
            if i + 1 < n {
                a[i][i + 1] += self.sup[i];
                a[i + 1][i] += self.sub[i];
            }
        }
        if n > 1 {
            a[0][n - 1] += self.top_right;
            a[n - 1][0] += self.bottom_left;
        }
        a
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i + 1 < n {
                acc += self.sup[i] * x[i + 1];
            }
            if i > 0 {
                acc += self.sub[i - 1] * x[i - 1];
            }
            y[i] = acc;
        }
        if n > 1 {
            y[0] += self.top_right * x[n - 1];
            y[n - 1] += self.bottom_left * x[0];
        }
        y
    }

    /// Max-norm of the matrix (largest absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        self.to_rows_abs().into_iter().fold(0.0, f64::max)
    }

    fn to_rows_abs(&self) -> Vec<f64> {
        let n = self.dim();
        let mut r: Vec<f64> = self.diag.iter().map(|v| v.abs()).collect();
        for i in 0..n.saturating_sub(1) {
            r[i] += self.sup[i].abs();
            r[i + 1] += self.sub[i].abs();
        }
        if n > 1 {
            r[0] += self.top_right.abs();
            r[n - 1] += self.bottom_left.abs();
        }
        r
    }

    pub fn factor(&self) -> Result<CyclicLu> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::Contract("empty matrix".into()));
        }
        if n <= 2 {
            // Corners coincide with the band; fold them in and skip the correction.
            let mut band = self.clone();
            if n == 2 {
                band.sup[0] += self.top_right;
                band.sub[0] += self.bottom_left;
            }
            band.top_right = 0.0;
            band.bottom_left = 0.0;
            let lu = BandLu::new(&band.sub, &band.diag, &band.sup)?;
            return Ok(CyclicLu {
                lu,
                correction: None,
            });
        }
        let lu = BandLu::new(&self.sub, &self.diag, &self.sup)?;
        // A = T + u1 v1^T + u2 v2^T, u1 = e_0, v1 = c e_{N-1}, u2 = e_{N-1}, v2 = d e_0.
        let mut z1 = vec![0.0; n];
        z1[0] = 1.0;
        lu.solve_in_place(&mut z1);
        let mut z2 = vec![0.0; n];
        z2[n - 1] = 1.0;
        lu.solve_in_place(&mut z2);
        let (c, d) = (self.top_right, self.bottom_left);
        // Capacitance S = I + V^T Z.
        let s = [
            [1.0 + c * z1[n - 1], c * z2[n - 1]],
            [d * z1[0], 1.0 + d * z2[0]],
        ];
        let det_s = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        if det_s == 0.0 || !det_s.is_finite() {
            return Err(Error::Solver {
                message: "singular corner correction".into(),
                residual: f64::NAN,
            });
        }
        Ok(CyclicLu {
            lu,
            correction: Some(Correction { z1, z2, c, d, s, det_s }),
        })
    }
}

#[derive(Debug, Clone)]
struct Correction {
    z1: Vec<f64>,
    z2: Vec<f64>,
    c: f64,
    d: f64,
    s: [[f64; 2]; 2],
    det_s: f64,
}

#[derive(Debug, Clone)]
pub struct CyclicLu {
    lu: BandLu,
    correction: Option<Correction>,
}

impl CyclicLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.lu.solve_in_place(b);
        if let Some(k) = &self.correction {
            let n = b.len();
            // w = S^{-1} V^T z
            let r0 = k.c * b[n - 1];
            let r1 = k.d * b[0];
            let w0 = (k.s[1][1] * r0 - k.s[0][1] * r1) / k.det_s;
            let w1 = (k.s[0][0] * r1 - k.s[1][0] * r0) / k.det_s;
            for i in 0..n {
                b[i] -= k.z1[i] * w0 + k.z2[i] * w1;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn det(&self) -> f64 {
        let base = self.lu.det();
        match &self.correction {
            Some(k) => base * k.det_s,
            None => base,
        }
    }
}

/// LU factors of a tridiagonal matrix with row interchanges.
#[derive(Debug, Clone)]
struct BandLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl BandLu {
    fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if let Some(k) = d.iter().position(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::Solver {
                message: format!("zero pivot at row {k}"),
                residual: f64::NAN,
            });
        }
        Ok(Self { dl, d, du, du2, swapped })
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    fn det(&self) -> f64 {
        let swaps = self.swapped.iter().filter(|&&s| s).count();
        let p: f64 = self.d.iter().product();
        if swaps % 2 == 0 {
            p
        } else {
            -p
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn dense(m: &CyclicTridiagonal) -> DMatrix<f64> {
        let rows = m.to_dense();
        let n = m.dim();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    fn random_matrix(vals: &[f64], n: usize) -> CyclicTridiagonal {
        CyclicTridiagonal {
            sub: vals[..n - 1].to_vec(),
            diag: vals[n - 1..2 * n - 1].to_vec(),
            sup: vals[2 * n - 1..3 * n - 2].to_vec(),
            top_right: vals[3 * n - 2],
            bottom_left: vals[3 * n - 1],
        }
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        // The leading diagonal entry vanishes, so elimination must swap rows.
        let m = CyclicTridiagonal {
            sub: vec![1.0, 1.0, 1.0, 1.0],
            diag: vec![0.0, 0.0, 2.0, 0.0, 1.0],
            sup: vec![-1.0, -1.0, -1.0, -1.0],
            top_right: 1.0,
            bottom_left: -1.0,
        };
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let x = m.factor().unwrap().solve(&b);
        let r = m.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-13);
        }
        let want = dense(&m).determinant();
        assert!((m.factor().unwrap().det() - want).abs() < 1e-12 * want.abs().max(1.0));
    }

    proptest! {
        #[test]
        fn matches_dense_solve(n in 1usize..12, vals in proptest::collection::vec(-2.0f64..2.0, 40),
                               rhs in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let mut m = random_matrix(&vals, n.max(2));
            if n == 1 {
                m = CyclicTridiagonal { sub: vec![], diag: vec![vals[0]], sup: vec![], top_right: 0.0, bottom_left: 0.0 };
            }
            let dm = dense(&m);
            let det = dm.determinant();
            prop_assume!(det.abs() > 1e-3);
            let b = &rhs[..m.dim()];
            let lu = m.factor().unwrap();
            let x = lu.solve(b);
            let want = dm.lu().solve(&DVector::from_column_slice(b)).unwrap();
            let scale = want.amax().max(1.0);
            for i in 0..m.dim() {
                prop_assert!((x[i] - want[i]).abs() <= 1e-9 * scale);
            }
            prop_assert!((lu.det() - det).abs() <= 1e-10 * det.abs().max(1.0));
        }
    }
}
