//! Comparison schemes: Eulerian finite differences for CH and 2CH, the
//! staggered upwind scheme, and the Fourier pseudospectral method.

pub mod fourier;
pub mod spectral;

use crate::error::{ensure_len, Error, Result};
use crate::grid::GridSpec;
use fourier::{Helmholtz, Stencil};

pub use spectral::{rhs_ps, PsRhs, SpectralState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    /// Compact Helmholtz, upwinded transport.
    Hr,
    /// Noncompact central scheme; conserves momentum and energy.
    Lp,
    /// Two-component version of `Lp`.
    Lp2ch,
    /// Staggered upwind scheme in the `u`, `P` formulation.
    Ckr,
}

impl FdScheme {
    /// Number of state values per grid point.
    pub fn components(self) -> usize {
        match self {
            FdScheme::Lp2ch => 2,
            _ => 1,
        }
    }

    fn stencil(self) -> Stencil {
        match self {
            FdScheme::Hr | FdScheme::Ckr => Stencil::Compact,
            FdScheme::Lp | FdScheme::Lp2ch => Stencil::Noncompact,
        }
    }
}

/// Grid values of an Eulerian scheme. `values` holds `m` for the momentum
/// schemes and `u` at the half nodes `(j + 1/2) dx` for `Ckr`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianState {
    pub grid: GridSpec,
    pub scheme: FdScheme,
    pub values: Vec<f64>,
    pub rho: Option<Vec<f64>>,
}

impl EulerianState {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = self.values.clone();
        if let Some(r) = &self.rho {
            x.extend_from_slice(r);
        }
        x
    }

    pub fn from_slice(&self, x: &[f64]) -> Result<Self> {
        let n = self.grid.n();
        ensure_len("EulerianState", x.len(), n * self.scheme.components())?;
        Ok(Self {
            grid: self.grid,
            scheme: self.scheme,
            values: x[..n].to_vec(),
            rho: (self.scheme == FdScheme::Lp2ch).then(|| x[n..].to_vec()),
        })
    }

    /// Grid velocities; for `Ckr` these sit at the half nodes.
    pub fn velocity(&self) -> Result<Vec<f64>> {
        match self.scheme {
            FdScheme::Ckr => Ok(self.values.clone()),
            s => Ok(Helmholtz::new(s.stencil(), &self.grid)?.invert(&self.values)),
        }
    }

    /// Abscissa of the first velocity sample.
    pub fn offset(&self) -> f64 {
        match self.scheme {
            FdScheme::Ckr => 0.5 * self.grid.dxi(),
            _ => 0.0,
        }
    }

    /// `dx sum m` and `1/2 dx sum (u^2 + (D0 u)^2)`, the conserved pair of
    /// the central schemes.
    pub fn invariants(&self) -> Result<(f64, f64)> {
        let dx = self.grid.dxi();
        let u = self.velocity()?;
        let du = crate::grid::central(&u, dx);
        let mass = match self.scheme {
            FdScheme::Ckr => crate::grid::riemann_sum(&u, dx),
            _ => crate::grid::riemann_sum(&self.values, dx),
        };
        let du_energy = match self.scheme {
            FdScheme::Ckr => crate::grid::backward(&u, dx),
            _ => du,
        };
        let mut e = 0.0;
        for j in 0..u.len() {
            e += 0.5 * dx * (u[j] * u[j] + du_energy[j] * du_energy[j]);
        }
        if let Some(r) = &self.rho {
            for v in r {
                e += 0.5 * dx * v * v;
            }
        }
        Ok((e, mass))
    }
}

/// Initial state from point values of `u0` (and `rho0` for `Lp2ch`).
///
/// `Hr` requires a nonnegative discrete momentum; values down to
/// `-1e-2 * max m` are accepted since sampling a peaked profile produces
/// small negative curvature terms away from the peak.
pub fn init_eulerian(
    scheme: FdScheme,
    u0: impl Fn(f64) -> f64,
    rho0: Option<&dyn Fn(f64) -> f64>,
    g: &GridSpec,
) -> Result<EulerianState> {
    let dx = g.dxi();
    let rho = match (scheme, rho0) {
        (FdScheme::Lp2ch, Some(r)) => Some(g.nodes().into_iter().map(r).collect::<Vec<f64>>()),
        (FdScheme::Lp2ch, None) => Some(vec![0.0; g.n()]),
        (_, Some(_)) => {
            return Err(Error::Configuration(format!("{scheme:?} has no density component")))
        }
        _ => None,
    };
    let values = match scheme {
        FdScheme::Ckr => (0..g.n()).map(|j| u0((j as f64 + 0.5) * dx)).collect(),
        s => {
            let u: Vec<f64> = g.nodes().into_iter().map(&u0).collect();
            Helmholtz::new(s.stencil(), g)?.apply(&u)
        }
    };
    if scheme == FdScheme::Hr {
        let max = values.iter().fold(0.0f64, |a: f64, &b| a.max(b));
        let min = values.iter().fold(f64::INFINITY, |a: f64, &b| a.min(b));
        if min < -1e-2 * max || max <= 0.0 && min < 0.0 {
            return Err(Error::Configuration(format!(
                "HR needs nonnegative momentum, min m = {min:e}, max m = {max:e}"
            )));
        }
    }
    let s = EulerianState { grid: *g, scheme, values, rho };
    if s.to_vec().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial Eulerian data".into()));
    }
    Ok(s)
}

/// Right-hand side with a cached Helmholtz inverse.
#[derive(Debug, Clone)]
pub struct FdRhs {
    scheme: FdScheme,
    dx: f64,
    helm: Helmholtz,
}

impl FdRhs {
    pub fn new(scheme: FdScheme, g: &GridSpec) -> Result<Self> {
        Ok(Self {
            scheme,
            dx: g.dxi(),
            helm: Helmholtz::new(scheme.stencil(), g)?,
        })
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = x.len() / self.scheme.components();
        let dx = self.dx;
        let nx = |j: usize| if j + 1 == n { 0 } else { j + 1 };
        let pv = |j: usize| if j == 0 { n - 1 } else { j - 1 };
        match self.scheme {
            FdScheme::Hr | FdScheme::Lp | FdScheme::Lp2ch => {
                let m = &x[..n];
                let u = self.helm.invert(m);
                let mu: Vec<f64> = m.iter().zip(&u).map(|(a, b)| a * b).collect();
                for j in 0..n {
                    let (a, b) = (pv(j), nx(j));
                    let d0u = (u[b] - u[a]) / (2.0 * dx);
                    let transport = match self.scheme {
                        FdScheme::Hr => (mu[j] - mu[a]) / dx,
                        _ => (mu[b] - mu[a]) / (2.0 * dx),
                    };
                    out[j] = -transport - m[j] * d0u;
                }
                if self.scheme == FdScheme::Lp2ch {
                    let rho = &x[n..];
                    let flux: Vec<f64> = (0..n)
                        .map(|j| 0.25 * (rho[j] + rho[nx(j)]) * (u[j] + u[nx(j)]))
                        .collect();
                    for j in 0..n {
                        let (a, b) = (pv(j), nx(j));
                        let avg = 0.5 * (rho[b] + rho[a]);
                        out[j] -= avg * (rho[b] - rho[a]) / (2.0 * dx);
                        out[n + j] = -(flux[j] - flux[a]) / dx;
                    }
                }
            }
            FdScheme::Ckr => {
                let u = x;
                let mut src = vec![0.0; n];
                for j in 0..n {
                    let dm = (u[j] - u[pv(j)]) / dx;
                    src[j] = u[j] * u[j] + 0.5 * dm * dm;
                }
                let p = self.helm.invert(&src);
                for j in 0..n {
                    let dm = (u[j] - u[pv(j)]) / dx;
                    let dp = (u[nx(j)] - u[j]) / dx;
                    out[j] = -u[j].max(0.0) * dm - u[j].min(0.0) * dp - (p[nx(j)] - p[j]) / dx;
                }
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{:?} right-hand side", self.scheme)));
        }
        Ok(())
    }
}

pub fn rhs_fd(s: &EulerianState) -> Result<Vec<f64>> {
    let x = s.to_vec();
    let mut out = vec![0.0; x.len()];
    FdRhs::new(s.scheme, &s.grid)?.eval(&x, &mut out)?;
    Ok(out)
}
