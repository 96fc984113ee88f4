//! Discrete Fourier transforms, Helmholtz inversion and trigonometric
//! interpolation on uniform periodic grids.
//!
//! Convention: `F[f]_k = sum_j f_j e^{-2 pi i jk/n}` with the `1/n` on the
//! inverse. Coefficient vectors are stored in FFT order, index `i` holding
//! wavenumber `i` for `i < n/2` and `i - n` otherwise.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{ensure_len, Error, Result};
use crate::grid::GridSpec;

/// Forward and inverse plans for one transform length.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("transform length must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fwd.process(buf);
    }

    /// Inverse transform including the `1/n` factor.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }

    pub fn forward_real(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }
}

/// O(n^2) reference transform, same convention as [`Dft`].
pub fn dft_direct(f: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = f.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in f.iter().enumerate() {
                let phase = sign * 2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                acc += v * Complex64::from_polar(1.0, phase);
            }
            acc * scale
        })
        .collect()
}

/// Signed wavenumber of FFT slot `i`; the Nyquist slot maps to `-n/2`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if 2 * i < n {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Wavenumber used for differentiation: the Nyquist mode gets zero so real
/// data stay real.
pub fn derivative_wavenumber(i: usize, n: usize) -> f64 {
    if n.is_multiple_of(2) && 2 * i == n {
        0.0
    } else {
        wavenumber(i, n) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `Id - D-D+`.
    Compact,
    /// `Id - D0D0`.
    Noncompact,
}

/// Circulant Helmholtz operator diagonalised by the DFT.
#[derive(Debug, Clone)]
pub struct Helmholtz {
    dft: Dft,
    stencil: Stencil,
    dx: f64,
    inv_eig: Vec<f64>,
}

impl Helmholtz {
    pub fn new(stencil: Stencil, g: &GridSpec) -> Result<Self> {
        let n = g.n();
        if n < 2 {
            return Err(Error::Contract("Helmholtz inversion needs n >= 2".into()));
        }
        let dx = g.dxi();
        let inv_eig = (0..n)
            .map(|j| 1.0 / eigenvalue(stencil, j, n, dx))
            .collect();
        Ok(Self {
            dft: Dft::new(n)?,
            stencil,
            dx,
            inv_eig,
        })
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    /// `u = F^{-1}[d^{-1} F[m]]`.
    pub fn invert_into(&self, m: &[f64], out: &mut [f64]) {
        let mut buf: Vec<Complex64> = m.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.dft.forward_in_place(&mut buf);
        for (b, d) in buf.iter_mut().zip(&self.inv_eig) {
            *b *= d;
        }
        self.dft.inverse_in_place(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
    }

    pub fn invert(&self, m: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; m.len()];
        self.invert_into(m, &mut out);
        out
    }

    /// The difference operator itself.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let dx2 = self.dx * self.dx;
        (0..n)
            .map(|j| {
                let (a, b) = match self.stencil {
                    Stencil::Compact => ((j + n - 1) % n, (j + 1) % n),
                    Stencil::Noncompact => ((j + n - 2) % n, (j + 2) % n),
                };
                match self.stencil {
                    Stencil::Compact => u[j] - (u[b] - 2.0 * u[j] + u[a]) / dx2,
                    Stencil::Noncompact => u[j] - (u[b] - 2.0 * u[j] + u[a]) / (4.0 * dx2),
                }
            })
            .collect()
    }
}

fn eigenvalue(stencil: Stencil, j: usize, n: usize, dx: f64) -> f64 {
    let t = std::f64::consts::PI * j as f64 / n as f64;
    match stencil {
        Stencil::Compact => 1.0 + (2.0 / dx * t.sin()).powi(2),
        Stencil::Noncompact => 1.0 + ((2.0 * t).sin() / dx).powi(2),
    }
}

pub fn helmholtz_invert(m: &[f64], stencil: Stencil, g: &GridSpec) -> Result<Vec<f64>> {
    ensure_len("helmholtz_invert", m.len(), g.n())?;
    Ok(Helmholtz::new(stencil, g)?.invert(m))
}

/// Closed-form periodic Green's function of `Id - D-D+`, normalised so that
/// `(Id - D-D+) g = e_0 / dx`.
pub fn green_periodic(g: &GridSpec) -> Vec<f64> {
    let n = g.n() as f64;
    let dx = g.dxi();
    let root = (4.0 + dx * dx).sqrt();
    let kappa = (1.0 + 0.5 * dx * dx + 0.5 * dx * root).ln();
    (0..g.n())
        .map(|j| (kappa * (j as f64 - 0.5 * n)).cosh() / (root * (0.5 * kappa * n).sinh()))
        .collect()
}

/// Trigonometric interpolant of `u` sampled on `target` uniform points
/// `(i + shift) * L / target`, together with its derivative.
///
/// An even-length Nyquist coefficient is split evenly between `+-n/2`.
pub fn fourier_interpolate_shifted(
    u: &[f64],
    target: usize,
    shift: f64,
    period: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = u.len();
    if n == 0 || target < n {
        return Err(Error::Contract(format!(
            "interpolation target {target} smaller than source {n}"
        )));
    }
    let v = Dft::new(n)?.forward_real(u);
    interpolate_coefficients(&v, target, shift, period)
}

pub fn fourier_interpolate(u: &[f64], target: usize) -> Result<Vec<f64>> {
    Ok(fourier_interpolate_shifted(u, target, 0.0, 1.0)?.0)
}

/// Same as [`fourier_interpolate_shifted`] starting from coefficients.
pub fn interpolate_coefficients(
    v: &[Complex64],
    target: usize,
    shift: f64,
    period: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = v.len();
    if n == 0 || target < n {
        return Err(Error::Contract(format!(
            "interpolation target {target} smaller than source {n}"
        )));
    }
    let mut w = vec![Complex64::new(0.0, 0.0); target];
    let mut put = |k: i64, c: Complex64| {
        let slot = k.rem_euclid(target as i64) as usize;
        w[slot] += c;
    };
    for (i, &c) in v.iter().enumerate() {
        let k = wavenumber(i, n);
        if n.is_multiple_of(2) && 2 * i == n {
            put(k, 0.5 * c);
            put(-k, 0.5 * c);
        } else {
            put(k, c);
        }
    }
    let scale = target as f64 / n as f64;
    let tau = 2.0 * std::f64::consts::PI;
    let mut dw = w.clone();
    for (i, (a, b)) in w.iter_mut().zip(dw.iter_mut()).enumerate() {
        let k = wavenumber(i, target) as f64;
        let phase = Complex64::from_polar(scale, tau * k * shift / target as f64);
        *a *= phase;
        *b = *a * Complex64::new(0.0, tau * k / period);
    }
    let dft = Dft::new(target)?;
    dft.inverse_in_place(&mut w);
    dft.inverse_in_place(&mut dw);
    Ok((w.iter().map(|c| c.re).collect(), dw.iter().map(|c| c.re).collect()))
}
