//! Fourier pseudospectral scheme for CH with optional 2/3 dealiasing.

use num_complex::Complex64;

use super::fourier::{derivative_wavenumber, interpolate_coefficients, wavenumber, Dft};
use crate::error::{ensure_len, Error, Result};
use crate::grid::GridSpec;

/// Fourier coefficients in FFT order; `scale` is `L / 2 pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub v: Vec<Complex64>,
    pub scale: f64,
    pub dealias: bool,
}

impl SpectralState {
    pub fn from_samples(u0: impl Fn(f64) -> f64, g: &GridSpec, dealias: bool) -> Result<Self> {
        if !g.n().is_multiple_of(2) {
            return Err(Error::Contract(format!("pseudospectral scheme needs even n, got {}", g.n())));
        }
        let u: Vec<f64> = g.nodes().into_iter().map(u0).collect();
        Ok(Self {
            v: Dft::new(g.n())?.forward_real(&u),
            scale: g.period() / (2.0 * std::f64::consts::PI),
            dealias,
        })
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.scale
    }

    /// Layout `[Re V, Im V]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.v.iter().map(|c| c.re).chain(self.v.iter().map(|c| c.im)).collect()
    }

    pub fn from_slice(&self, x: &[f64]) -> Result<Self> {
        let n = self.n();
        ensure_len("SpectralState", x.len(), 2 * n)?;
        Ok(Self {
            v: (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect(),
            ..*self
        })
    }

    /// Coefficients that actually enter the dynamics.
    pub fn effective(&self) -> Vec<Complex64> {
        let mut v = self.v.clone();
        if self.dealias {
            apply_mask(&mut v);
        }
        v
    }

    /// `u` and `u_x` on `target` uniform points `(i + shift) L / target`.
    pub fn sample(&self, target: usize, shift: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        interpolate_coefficients(&self.effective(), target, shift, self.period())
    }

    /// Largest conjugate-symmetry defect, Nyquist slot excluded.
    pub fn reality_defect(&self) -> f64 {
        conjugate_defect(&self.v)
    }
}

pub(crate) fn conjugate_defect(v: &[Complex64]) -> f64 {
    let n = v.len();
    (1..n)
        .filter(|&i| 2 * i != n)
        .map(|i| (v[n - i] - v[i].conj()).norm())
        .fold((v[0].im).abs(), f64::max)
}

/// Zero every mode with `|k| > floor(n/3)`.
fn apply_mask(v: &mut [Complex64]) {
    let n = v.len();
    let keep = (n / 3) as i64;
    for (i, c) in v.iter_mut().enumerate() {
        if wavenumber(i, n).abs() > keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

#[derive(Debug, Clone)]
pub struct PsRhs {
    dft: Dft,
    scale: f64,
    dealias: bool,
}

impl PsRhs {
    pub fn new(n: usize, scale: f64, dealias: bool) -> Result<Self> {
        if !n.is_multiple_of(2) || n == 0 {
            return Err(Error::Contract(format!("pseudospectral scheme needs even n, got {n}")));
        }
        Ok(Self { dft: Dft::new(n)?, scale, dealias })
    }

    pub fn for_state(s: &SpectralState) -> Result<Self> {
        Self::new(s.n(), s.scale, s.dealias)
    }

    /// `Vdot(k) = -ik / (2a(a^2+k^2)) [(3a^2+k^2) F[u^2] + F[(F^{-1}[ikV])^2]]`.
    pub fn eval_complex(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = v.len();
        let a = self.scale;
        let mut w = v.to_vec();
        if self.dealias {
            apply_mask(&mut w);
        }
        let mut dw: Vec<Complex64> = w
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::new(0.0, derivative_wavenumber(i, n)))
            .collect();
        self.dft.inverse_in_place(&mut w);
        self.dft.inverse_in_place(&mut dw);
        for c in w.iter_mut() {
            *c = *c * *c;
        }
        for c in dw.iter_mut() {
            *c = *c * *c;
        }
        self.dft.forward_in_place(&mut w);
        self.dft.forward_in_place(&mut dw);
        for i in 0..n {
            let k = derivative_wavenumber(i, n);
            let pre = Complex64::new(0.0, -k / (2.0 * a * (a * a + k * k)));
            out[i] = pre * ((3.0 * a * a + k * k) * w[i] + dw[i]);
        }
        if self.dealias {
            apply_mask(out);
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = x.len() / 2;
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect();
        let mut dv = vec![Complex64::new(0.0, 0.0); n];
        self.eval_complex(&v, &mut dv);
        for i in 0..n {
            out[i] = dv[i].re;
            out[n + i] = dv[i].im;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pseudospectral right-hand side".into()));
        }
        Ok(())
    }
}

pub fn rhs_ps(s: &SpectralState) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); s.n()];
    PsRhs::for_state(s)?.eval_complex(&s.v, &mut out);
    Ok(out)
}
