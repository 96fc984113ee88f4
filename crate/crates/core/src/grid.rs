//! Periodic label grids and the three basic difference operators.
//!
//! All sequences are stored with exactly `n` entries and interpreted
//! n-periodically; wrap-around is done by index arithmetic.

use crate::error::{ensure_len, Error, Result};

/// Uniform periodic grid: `n` cells of width `dxi` covering one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    period: f64,
    dxi: f64,
}

impl GridSpec {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("grid needs at least one cell".into()));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Contract(format!("period must be positive, got {period}")));
        }
        Ok(Self {
            n,
            period,
            dxi: period / n as f64,
        })
    }

    /// Dyadic grid with `2^k` cells.
    pub fn dyadic(k: u32, period: f64) -> Result<Self> {
        Self::new(1usize << k, period)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    /// Grid label `xi_i = i * dxi`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.dxi
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// An n-periodic sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn from_fn(g: &GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::new(g.nodes().into_iter().map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Periodic access; any integer index is valid.
    pub fn at(&self, i: isize) -> f64 {
        self.values[wrap(i, self.values.len())]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl From<Vec<f64>> for GridFunction {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

#[inline]
pub fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    Forward,
    Backward,
    Central,
}

/// `D+`, `D-` or `D0` of a periodic sequence.
pub fn diff(f: &GridFunction, mode: DiffMode, g: &GridSpec) -> Result<GridFunction> {
    ensure_len("diff", f.len(), g.n())?;
    let mut out = vec![0.0; g.n()];
    diff_into(f.values(), mode, g.dxi(), &mut out);
    Ok(GridFunction::new(out))
}

/// Slice version of [`diff`]; `out` must have the same length as `f`.
pub fn diff_into(f: &[f64], mode: DiffMode, dxi: f64, out: &mut [f64]) {
    let n = f.len();
    debug_assert_eq!(out.len(), n);
    for i in 0..n {
        let next = f[if i + 1 == n { 0 } else { i + 1 }];
        let prev = f[if i == 0 { n - 1 } else { i - 1 }];
        out[i] = match mode {
            DiffMode::Forward => (next - f[i]) / dxi,
            DiffMode::Backward => (f[i] - prev) / dxi,
            DiffMode::Central => (next - prev) / (2.0 * dxi),
        };
    }
}

pub fn forward(f: &[f64], dxi: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    diff_into(f, DiffMode::Forward, dxi, &mut out);
    out
}

pub fn backward(f: &[f64], dxi: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    diff_into(f, DiffMode::Backward, dxi, &mut out);
    out
}

pub fn central(f: &[f64], dxi: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    diff_into(f, DiffMode::Central, dxi, &mut out);
    out
}

/// Riemann-sum inner product `sum_i dxi * f_i * w_i`, summed in ascending index order.
pub fn inner(f: &GridFunction, w: &GridFunction, g: &GridSpec) -> Result<f64> {
    ensure_len("inner", f.len(), g.n())?;
    ensure_len("inner", w.len(), g.n())?;
    Ok(inner_slices(f.values(), w.values(), g.dxi()))
}

pub fn inner_slices(f: &[f64], w: &[f64], dxi: f64) -> f64 {
    let mut acc = 0.0;
    for (a, b) in f.iter().zip(w) {
        acc += dxi * (a * b);
    }
    acc
}

/// `sum_i dxi * f_i`.
pub fn riemann_sum(f: &[f64], dxi: f64) -> f64 {
    let mut acc = 0.0;
    for a in f {
        acc += dxi * a;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants_have_zero_differences() {
        let g = GridSpec::new(7, 3.0).unwrap();
        let f = GridFunction::new(vec![2.5; 7]);
        for mode in [DiffMode::Forward, DiffMode::Backward, DiffMode::Central] {
            let d = diff(&f, mode, &g).unwrap();
            assert!(d.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn forward_difference_wraps() {
        let g = GridSpec::new(4, 4.0).unwrap();
        let f = GridFunction::new(vec![0.0, 1.0, 2.0, 3.0]);
        let d = diff(&f, DiffMode::Forward, &g).unwrap();
        assert_eq!(d.values(), &[1.0, 1.0, 1.0, -3.0]);
        let b = diff(&f, DiffMode::Backward, &g).unwrap();
        assert_eq!(b.values(), &[-3.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn periodic_access() {
        let f = GridFunction::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(f.at(3), 1.0);
        assert_eq!(f.at(-1), 3.0);
        assert_eq!(f.at(7), 2.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let g = GridSpec::new(4, 1.0).unwrap();
        let f = GridFunction::new(vec![0.0; 3]);
        assert!(matches!(diff(&f, DiffMode::Forward, &g), Err(Error::Contract(_))));
        assert!(inner(&f, &f, &g).is_err());
    }

    #[test]
    fn inner_product_basics() {
        let g = GridSpec::new(10, std::f64::consts::TAU).unwrap();
        let one = GridFunction::new(vec![1.0; 10]);
        let v = inner(&one, &one, &g).unwrap();
        assert!((v - std::f64::consts::TAU).abs() < 1e-14);

        let alt = GridFunction::new((0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect());
        assert!(inner(&one, &alt, &g).unwrap().abs() < 1e-15);
    }

    #[test]
    fn inner_is_symmetric_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GridSpec::new(13, 2.0).unwrap();
        let f = GridFunction::new((0..13).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let w = GridFunction::new((0..13).map(|_| rng.gen_range(-1.0..1.0)).collect());
        assert_eq!(inner(&f, &w, &g).unwrap(), inner(&w, &f, &g).unwrap());
    }

    #[test]
    fn forward_backward_adjoint_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = GridSpec::new(8, 1.7).unwrap();
        let f = GridFunction::new((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let w = GridFunction::new((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let lhs = inner(&diff(&f, DiffMode::Forward, &g).unwrap(), &w, &g).unwrap();
        let rhs = -inner(&f, &diff(&w, DiffMode::Backward, &g).unwrap(), &g).unwrap();
        assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(rhs.abs()));
    }

    #[test]
    fn forward_differences_telescope() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = GridSpec::new(32, 5.0).unwrap();
        let f = GridFunction::new((0..32).map(|_| rng.gen_range(-3.0..3.0)).collect());
        let d = diff(&f, DiffMode::Forward, &g).unwrap();
        assert!(riemann_sum(d.values(), g.dxi()).abs() < 1e-13);
    }
}
