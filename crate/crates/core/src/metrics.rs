//! Error norms on uniform reference grids, convergence rates and invariant
//! deviations.

use crate::error::{Error, Result};
use crate::multipeakon::{self, PeakonState};
use crate::reference_schemes::SpectralState;
use crate::variational::{self, LagrangianState};

/// Reference grid `x_i = (i + s) 2^{-k0} L` with `s = 1/2` when shifted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefGrid {
    pub k0: u32,
    pub period: f64,
    pub shifted: bool,
}

impl RefGrid {
    pub fn new(k0: u32, period: f64, shifted: bool) -> Result<Self> {
        if k0 > 24 {
            return Err(Error::Contract(format!("reference grid 2^{k0} is too large")));
        }
        if !(period > 0.0) {
            return Err(Error::Contract(format!("period must be positive, got {period}")));
        }
        Ok(Self { k0, period, shifted })
    }

    pub fn count(&self) -> usize {
        1usize << self.k0
    }

    pub fn dx(&self) -> f64 {
        self.period / self.count() as f64
    }

    pub fn offset(&self) -> f64 {
        if self.shifted {
            0.5
        } else {
            0.0
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        let s = self.offset();
        (0..self.count()).map(|i| (i as f64 + s) * dx).collect()
    }
}

/// Values of an interpolant on a reference grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub rho: Option<Vec<f64>>,
}

pub trait Interpolant {
    fn sample(&self, grid: &RefGrid) -> Result<Sampled>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2: f64,
    pub h1: f64,
    pub rho_l2: Option<f64>,
    pub grid_k0: u32,
    pub shifted: bool,
}

/// Riemann-sum L2 and H1 distances; the density distance is reported when
/// both sides carry one.
pub fn error_norms(num: &dyn Interpolant, reference: &dyn Interpolant, grid: &RefGrid) -> Result<ErrorReport> {
    let a = num.sample(grid)?;
    let b = reference.sample(grid)?;
    let dx = grid.dx();
    let (mut l2, mut d1) = (0.0, 0.0);
    for i in 0..grid.count() {
        let e = a.u[i] - b.u[i];
        let f = a.ux[i] - b.ux[i];
        l2 += dx * e * e;
        d1 += dx * f * f;
    }
    let rho_l2 = match (&a.rho, &b.rho) {
        (Some(p), Some(q)) => Some(
            p.iter()
                .zip(q)
                .map(|(x, y)| dx * (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        ),
        _ => None,
    };
    let report = ErrorReport {
        l2: l2.sqrt(),
        h1: (l2 + d1).sqrt(),
        rho_l2,
        grid_k0: grid.k0,
        shifted: grid.shifted,
    };
    if !(report.h1.is_finite() && report.rho_l2.is_none_or(f64::is_finite)) {
        return Err(Error::NonFinite("error norm".into()));
    }
    Ok(report)
}

/// Least-squares slope of `log2(error)` against `-k`.
pub fn fit_rate(ks: &[f64], errors: &[f64]) -> Result<f64> {
    if ks.len() != errors.len() || ks.len() < 3 {
        return Err(Error::Contract(format!(
            "rate fit needs >= 3 matching points, got {} and {}",
            ks.len(),
            errors.len()
        )));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::Contract(format!("rate fit needs positive errors, got {e}")));
    }
    let m = ks.len() as f64;
    let xs: Vec<f64> = ks.iter().map(|k| -k).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::Contract("rate fit needs distinct k".into()));
    }
    Ok(sxy / sxx)
}

/// `I_j(t_i) - I_j(t_0)` for each invariant `j`, one row per invariant.
pub fn invariant_trace(states: &[Vec<f64>], invariants: &[&dyn Fn(&[f64]) -> f64]) -> Vec<Vec<f64>> {
    invariants
        .iter()
        .map(|f| {
            let base = states.first().map(|x| f(x)).unwrap_or(0.0);
            states.iter().map(|x| f(x) - base).collect()
        })
        .collect()
}

/// Density reconstruction between grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoInterp {
    Constant,
    Linear,
}

/// Periodic piecewise-linear interpolant through uniform nodes
/// `offset + j dx`; cells are half-open so slopes are right limits.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLinear {
    pub offset: f64,
    pub period: f64,
    pub u: Vec<f64>,
    pub rho: Option<(Vec<f64>, RhoInterp)>,
}

impl GridLinear {
    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.u.len();
        let dx = self.period / n as f64;
        let s = (x - self.offset).rem_euclid(self.period) / dx;
        let j = (s.floor() as usize).min(n - 1);
        (j, s - j as f64)
    }
}

impl Interpolant for GridLinear {
    fn sample(&self, grid: &RefGrid) -> Result<Sampled> {
        let n = self.u.len();
        if n == 0 {
            return Err(Error::Contract("empty interpolant".into()));
        }
        let dx = self.period / n as f64;
        let pts = grid.points();
        let mut u = Vec::with_capacity(pts.len());
        let mut ux = Vec::with_capacity(pts.len());
        let mut rho = self.rho.as_ref().map(|_| Vec::with_capacity(pts.len()));
        for &x in &pts {
            let (j, t) = self.locate(x);
            let k = (j + 1) % n;
            u.push(self.u[j] + t * (self.u[k] - self.u[j]));
            ux.push((self.u[k] - self.u[j]) / dx);
            if let (Some((r, mode)), Some(out)) = (&self.rho, rho.as_mut()) {
                out.push(match mode {
                    RhoInterp::Constant => r[j],
                    RhoInterp::Linear => r[j] + t * (r[k] - r[j]),
                });
            }
        }
        Ok(Sampled { u, ux, rho })
    }
}

/// Lagrangian interpolant; `with_rho` attaches the piecewise-constant density.
pub struct LagrangianInterp<'a> {
    pub state: &'a LagrangianState,
    pub with_rho: bool,
}

impl Interpolant for LagrangianInterp<'_> {
    fn sample(&self, grid: &RefGrid) -> Result<Sampled> {
        let s = variational::eval_interpolant(self.state, &grid.points());
        Ok(Sampled {
            u: s.u,
            ux: s.ux,
            rho: self.with_rho.then_some(s.rho),
        })
    }
}

pub struct PeakonInterp<'a>(pub &'a PeakonState);

impl Interpolant for PeakonInterp<'_> {
    fn sample(&self, grid: &RefGrid) -> Result<Sampled> {
        let (u, ux) = multipeakon::eval_interpolant(self.0, &grid.points());
        Ok(Sampled { u, ux, rho: None })
    }
}

pub struct FourierInterp<'a>(pub &'a SpectralState);

impl Interpolant for FourierInterp<'_> {
    fn sample(&self, grid: &RefGrid) -> Result<Sampled> {
        let (u, ux) = self.0.sample(grid.count(), grid.offset())?;
        Ok(Sampled { u, ux, rho: None })
    }
}

/// Closed-form profile `x -> (u, u_x, rho)`.
pub struct FnInterp<F>(pub F);

impl<F> Interpolant for FnInterp<F>
where
    F: Fn(f64) -> (f64, f64, Option<f64>),
{
    fn sample(&self, grid: &RefGrid) -> Result<Sampled> {
        let pts = grid.points();
        let mut out = Sampled {
            u: Vec::with_capacity(pts.len()),
            ux: Vec::with_capacity(pts.len()),
            rho: None,
        };
        let mut rho = Vec::new();
        for &x in &pts {
            let (a, b, r) = (self.0)(x);
            out.u.push(a);
            out.ux.push(b);
            if let Some(r) = r {
                rho.push(r);
            }
        }
        if rho.len() == pts.len() {
            out.rho = Some(rho);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::ode::{integrate, Tolerances};
    use crate::reference_solutions::{PeriodicPeakon, Side};
    use crate::variational::{init_lagrangian, Formulation, VdRhs};

    fn sine() -> FnInterp<impl Fn(f64) -> (f64, f64, Option<f64>)> {
        FnInterp(|x: f64| (x.sin(), x.cos(), None))
    }

    #[test]
    fn identical_profiles_have_zero_error() {
        let g = RefGrid::new(8, 2.0 * std::f64::consts::PI, false).unwrap();
        let r = error_norms(&sine(), &sine(), &g).unwrap();
        assert_eq!((r.l2, r.h1), (0.0, 0.0));
    }

    #[test]
    fn constant_offset() {
        let l = 2.0 * std::f64::consts::PI;
        let g = RefGrid::new(9, l, true).unwrap();
        let shifted = FnInterp(|x: f64| (x.sin() + 0.25, x.cos(), None));
        let r = error_norms(&shifted, &sine(), &g).unwrap();
        assert!((r.l2 - 0.25 * l.sqrt()).abs() < 1e-13);
        assert!((r.h1 - 0.25 * l.sqrt()).abs() < 1e-13);
        assert!(r.h1 >= r.l2 && r.shifted && r.grid_k0 == 9);
    }

    #[test]
    fn rates() {
        assert!((fit_rate(&[1.0, 2.0, 3.0], &[1.0, 0.5, 0.25]).unwrap() - 1.0).abs() < 1e-14);
        assert!((fit_rate(&[1.0, 2.0, 3.0], &[1.0, 0.25, 1.0 / 16.0]).unwrap() - 2.0).abs() < 1e-14);
        assert!(fit_rate(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).is_err());
        assert!(fit_rate(&[1.0, 2.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn linear_interpolant_basics() {
        let gl = GridLinear {
            offset: 0.5,
            period: 4.0,
            u: vec![0.0, 1.0, 2.0, 1.0],
            rho: Some((vec![1.0, 3.0, 5.0, 7.0], RhoInterp::Linear)),
        };
        let s = gl.sample(&RefGrid::new(3, 4.0, false).unwrap()).unwrap();
        // Points 0, 0.5, 1, ..., 3.5.
        assert_eq!(s.u[1], 0.0);
        assert_eq!(s.u[2], 0.5);
        assert_eq!(s.ux[2], 1.0);
        assert_eq!(s.u[0], 0.5);
        assert_eq!(s.rho.as_ref().unwrap()[0], 4.0);
    }

    #[test]
    fn invariant_trace_subtracts_start() {
        let states = vec![vec![1.0, 2.0], vec![1.5, 2.0], vec![3.0, 2.0]];
        let sum = |x: &[f64]| x.iter().sum::<f64>();
        let first = |x: &[f64]| x[0];
        let tr = invariant_trace(&states, &[&sum, &first]);
        assert_eq!(tr, vec![vec![0.0, 0.5, 2.0], vec![0.0, 0.5, 2.0]]);
    }

    fn vd_peakon(n: usize) -> LagrangianState {
        let p = PeriodicPeakon::new(1.0, 0.5, 1.0);
        let g = GridSpec::new(n, 1.0).unwrap();
        let s = init_lagrangian(|x| p.eval(0.0, x, Side::Right).0, None, &g, Formulation::Cumulative).unwrap();
        let rhs = VdRhs::new(g, Formulation::Cumulative);
        let traj = integrate(
            |_, x, dx| rhs.eval(x, dx),
            &s.to_vec(),
            (0.0, 1.0),
            Tolerances::uniform(1e-8).unwrap(),
            &[1.0],
        )
        .unwrap();
        s.from_slice(traj.last()).unwrap()
    }

    #[test]
    fn lagrangian_error_is_invariant_under_period_shift() {
        let s = vd_peakon(16);
        let mut t = s.clone();
        t.y.iter_mut().for_each(|v| *v += 1.0);
        let p = PeriodicPeakon::new(1.0, 0.5, 1.0);
        let exact = FnInterp(|x: f64| {
            let (u, ux) = p.eval(1.0, x, Side::Right);
            (u, ux, None)
        });
        let g = RefGrid::new(10, 1.0, true).unwrap();
        let a = error_norms(&LagrangianInterp { state: &s, with_rho: false }, &exact, &g).unwrap();
        let b = error_norms(&LagrangianInterp { state: &t, with_rho: false }, &exact, &g).unwrap();
        assert!((a.l2 - b.l2).abs() < 1e-12 && (a.h1 - b.h1).abs() < 1e-12);
    }

    #[test]
    fn measurement_converges_in_k0() {
        let s = vd_peakon(16);
        let p = PeriodicPeakon::new(1.0, 0.5, 1.0);
        let exact = FnInterp(|x: f64| {
            let (u, ux) = p.eval(1.0, x, Side::Right);
            (u, ux, None)
        });
        let num = LagrangianInterp { state: &s, with_rho: false };
        let a = error_norms(&num, &exact, &RefGrid::new(10, 1.0, true).unwrap()).unwrap();
        let b = error_norms(&num, &exact, &RefGrid::new(11, 1.0, true).unwrap()).unwrap();
        assert!(((a.l2 - b.l2) / b.l2).abs() < 0.01);
        assert!(((a.h1 - b.h1) / b.h1).abs() < 0.01);
    }
}
