//! Variational finite-difference Lagrangian scheme for CH and 2CH.
//!
//! The state evolves characteristics `y`, velocities `U` and either the
//! cumulative energy `H` (length `n + 1`, `H_0 = 0`) or the cell energy
//! density `h` (length `n`). Each right-hand-side evaluation solves the
//! interleaved `2n x 2n` momentum system for `(Q, R)` in O(n).

pub mod cyclic;

use crate::error::{ensure_len, Error, Result};
use crate::grid::GridSpec;
use cyclic::CyclicTridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    Ch,
    TwoCh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// Cumulative energy `H`; the total `H_n` is frozen by construction.
    Cumulative,
    /// Cell densities `h`; the total is a linear invariant.
    Density,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Energy {
    Cumulative(Vec<f64>),
    Density(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianState {
    pub grid: GridSpec,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub energy: Energy,
    /// Lagrangian density `rho * D+y`, constant in time.
    pub r: Vec<f64>,
}

impl LagrangianState {
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn formulation(&self) -> Formulation {
        match self.energy {
            Energy::Cumulative(_) => Formulation::Cumulative,
            Energy::Density(_) => Formulation::Density,
        }
    }

    /// `D+y` with the wrap `y_n = y_0 + L`.
    pub fn dy(&self) -> Vec<f64> {
        forward_y(&self.y, self.grid.period(), self.grid.dxi())
    }

    /// Cell energy densities regardless of the stored formulation.
    pub fn h(&self) -> Vec<f64> {
        match &self.energy {
            Energy::Density(h) => h.clone(),
            Energy::Cumulative(big) => {
                let dxi = self.grid.dxi();
                big.windows(2).map(|w| (w[1] - w[0]) / dxi).collect()
            }
        }
    }

    /// Same data in the other formulation.
    pub fn with_formulation(&self, f: Formulation) -> Self {
        let mut s = self.clone();
        s.energy = match f {
            Formulation::Density => Energy::Density(self.h()),
            Formulation::Cumulative => Energy::Cumulative(cumulate(&self.h(), self.grid.dxi())),
        };
        s
    }

    /// Density on each cell, `r / D+y` (infinite on collapsed cells with mass).
    pub fn rho(&self) -> Vec<f64> {
        self.r.iter().zip(self.dy()).map(|(r, d)| r / d).collect()
    }

    /// Flat layout `[y, U, H or h]` for the integrator.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.n() + 1);
        v.extend_from_slice(&self.y);
        v.extend_from_slice(&self.u);
        match &self.energy {
            Energy::Cumulative(e) | Energy::Density(e) => v.extend_from_slice(e),
        }
        v
    }

    /// Rebuild a state from the flat layout, reusing grid, density and formulation.
    pub fn from_slice(&self, x: &[f64]) -> Result<Self> {
        let n = self.n();
        let extra = match self.formulation() {
            Formulation::Cumulative => 1,
            Formulation::Density => 0,
        };
        ensure_len("flat lagrangian state", x.len(), 3 * n + extra)?;
        let e = x[2 * n..].to_vec();
        Ok(Self {
            grid: self.grid,
            y: x[..n].to_vec(),
            u: x[n..2 * n].to_vec(),
            energy: match self.formulation() {
                Formulation::Cumulative => Energy::Cumulative(e),
                Formulation::Density => Energy::Density(e),
            },
            r: self.r.clone(),
        })
    }
}

fn forward_y(y: &[f64], period: f64, dxi: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let next = if i + 1 == n { y[0] + period } else { y[i + 1] };
            (next - y[i]) / dxi
        })
        .collect()
}

fn forward_u(u: &[f64], dxi: f64) -> Vec<f64> {
    crate::grid::forward(u, dxi)
}

fn cumulate(h: &[f64], dxi: f64) -> Vec<f64> {
    let mut big = Vec::with_capacity(h.len() + 1);
    big.push(0.0);
    let mut acc = 0.0;
    for v in h {
        acc += dxi * v;
        big.push(acc);
    }
    big
}

/// Interleaved `(Q_j, R_j)` momentum matrix with its two corner entries.
pub fn assemble_momentum_matrix(dy: &[f64], g: &GridSpec) -> Result<CyclicTridiagonal> {
    ensure_len("D+y", dy.len(), g.n())?;
    if let Some(j) = dy.iter().position(|&d| d < 0.0 || !d.is_finite()) {
        return Err(Error::Contract(format!("D+y[{j}] = {:e} is negative", dy[j])));
    }
    let total: f64 = dy.iter().sum::<f64>() * g.dxi();
    if (total - g.period()).abs() > 1e-10 * g.period() {
        return Err(Error::Contract(format!(
            "cell sizes sum to {total}, expected the period {}",
            g.period()
        )));
    }
    Ok(band(dy, g.dxi()))
}

fn band(dy: &[f64], dxi: f64) -> CyclicTridiagonal {
    let n = dy.len();
    let m = 2 * n;
    let inv = 1.0 / dxi;
    let mut diag = vec![0.0; m];
    for j in 0..n {
        diag[2 * j] = dy[j];
        diag[2 * j + 1] = dy[j];
    }
    CyclicTridiagonal {
        sub: vec![inv; m - 1],
        diag,
        sup: vec![-inv; m - 1],
        top_right: inv,
        bottom_left: -inv,
    }
}

/// Below this (times `L`) a negative `D+y` is treated as integrator overshoot.
pub const OVERSHOOT: f64 = 1e-13;

/// Overshoot slack matching an integrator tolerance: near wave breaking the
/// accepted `D+y` dips below zero by roughly `abs_tol`.
pub fn overshoot_for(abs_tol: f64) -> f64 {
    OVERSHOOT.max(10.0 * abs_tol)
}

fn clamp_dy(dy: &mut [f64], period: f64, slack: f64) -> Result<()> {
    for (j, d) in dy.iter_mut().enumerate() {
        if *d < 0.0 {
            if *d >= -slack * period {
                *d = 0.0;
            } else {
                return Err(Error::Configuration(format!(
                    "characteristics crossed at cell {j} (D+y = {:e})",
                    *d
                )));
            }
        }
    }
    Ok(())
}

/// Solve `(D+y) Q - D-R = f`, `-D+Q + (D+y) R = h` with periodic wrap.
pub fn solve_qr_raw(dy: &[f64], dxi: f64, f: &[f64], h: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = dy.len();
    let m = band(dy, dxi);
    let mut b = vec![0.0; 2 * n];
    for j in 0..n {
        b[2 * j] = f[j];
        b[2 * j + 1] = h[j];
    }
    let lu = m.factor()?;
    let mut x = lu.solve(&b);
    // One step of refinement keeps the residual at rounding level near breaking.
    let r = m.matvec(&x);
    let bnorm = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut res: Vec<f64> = b.iter().zip(&r).map(|(bi, ri)| bi - ri).collect();
    let rnorm = res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if rnorm > 1e-14 * bnorm {
        lu.solve_in_place(&mut res);
        for (xi, ci) in x.iter_mut().zip(&res) {
            *xi += ci;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver {
            message: "non-finite solution".into(),
            residual: f64::NAN,
        });
    }
    let q = (0..n).map(|j| x[2 * j]).collect();
    let rr = (0..n).map(|j| x[2 * j + 1]).collect();
    Ok((q, rr))
}

/// `(Q, R)` for a state; the right-hand side is `(U D+U, h)`.
pub fn solve_qr(s: &LagrangianState) -> Result<(Vec<f64>, Vec<f64>)> {
    let dxi = s.grid.dxi();
    let mut dy = s.dy();
    clamp_dy(&mut dy, s.grid.period(), OVERSHOOT)?;
    let du = forward_u(&s.u, dxi);
    let f: Vec<f64> = s.u.iter().zip(&du).map(|(u, d)| u * d).collect();
    solve_qr_raw(&dy, dxi, &f, &s.h())
}

/// Residual of the momentum system, relative to the right-hand side.
pub fn qr_residual(s: &LagrangianState, q: &[f64], r: &[f64]) -> f64 {
    let n = s.n();
    let dxi = s.grid.dxi();
    let dy = s.dy();
    let du = forward_u(&s.u, dxi);
    let h = s.h();
    let m = band(&dy, dxi);
    let mut x = vec![0.0; 2 * n];
    let mut b = vec![0.0; 2 * n];
    for j in 0..n {
        x[2 * j] = q[j];
        x[2 * j + 1] = r[j];
        b[2 * j] = s.u[j] * du[j];
        b[2 * j + 1] = h[j];
    }
    let ax = m.matvec(&x);
    let gap = ax.iter().zip(&b).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    let scale = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        gap
    } else {
        gap / scale
    }
}

/// Context for the flat right-hand side.
#[derive(Debug, Clone, Copy)]
pub struct VdRhs {
    pub grid: GridSpec,
    pub formulation: Formulation,
    /// Tolerated negative `D+y`, relative to `L`.
    pub overshoot: f64,
}

impl VdRhs {
    pub fn new(grid: GridSpec, formulation: Formulation) -> Self {
        Self {
            grid,
            formulation,
            overshoot: OVERSHOOT,
        }
    }

    pub fn with_overshoot(mut self, overshoot: f64) -> Self {
        self.overshoot = overshoot;
        self
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.grid.n();
        let dxi = self.grid.dxi();
        let (y, rest) = x.split_at(n);
        let (u, e) = rest.split_at(n);
        let mut dy = forward_y(y, self.grid.period(), dxi);
        clamp_dy(&mut dy, self.grid.period(), self.overshoot)?;
        let h: Vec<f64> = match self.formulation {
            Formulation::Cumulative => e.windows(2).map(|w| (w[1] - w[0]) / dxi).collect(),
            Formulation::Density => e.to_vec(),
        };
        let du = forward_u(u, dxi);
        let f: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a * b).collect();
        let (q, r) = solve_qr_raw(&dy, dxi, &f, &h)?;
        out[..n].copy_from_slice(u);
        for j in 0..n {
            out[n + j] = -q[j];
        }
        let prev = |j: usize| if j == 0 { r[n - 1] } else { r[j - 1] };
        match self.formulation {
            Formulation::Cumulative => {
                let top = u[0] * r[n - 1];
                for j in 0..=n {
                    let uj = if j == n { u[0] } else { u[j] };
                    let rj = if j == n { r[n - 1] } else { prev(j) };
                    out[2 * n + j] = top - uj * rj;
                }
            }
            Formulation::Density => {
                for j in 0..n {
                    let next = if j + 1 == n { u[0] * r[n - 1] } else { u[j + 1] * r[j] };
                    out[2 * n + j] = -(next - u[j] * prev(j)) / dxi;
                }
            }
        }
        Ok(())
    }
}

/// Time derivatives of a state, in its own flat layout.
pub fn rhs_vd(s: &LagrangianState) -> Result<Vec<f64>> {
    let x = s.to_vec();
    let mut out = vec![0.0; x.len()];
    VdRhs::new(s.grid, s.formulation()).eval(&x, &mut out)?;
    Ok(out)
}

/// `h_j = (U_j^2 D+y_j^2 + (D+U_j)^2 + r_j^2) / (2 D+y_j)`.
pub fn compute_h(u: &[f64], dy: &[f64], r: &[f64], dxi: f64) -> Result<Vec<f64>> {
    let n = u.len();
    ensure_len("D+y", dy.len(), n)?;
    ensure_len("r", r.len(), n)?;
    let du = forward_u(u, dxi);
    (0..n)
        .map(|j| {
            if !(dy[j] > 0.0) {
                return Err(Error::DegenerateCell { index: j, dy: dy[j] });
            }
            Ok((u[j] * u[j] * dy[j] * dy[j] + du[j] * du[j] + r[j] * r[j]) / (2.0 * dy[j]))
        })
        .collect()
}

/// `(E, I)`: total energy and total momentum.
pub fn lagrangian_invariants(s: &LagrangianState) -> (f64, f64) {
    let dxi = s.grid.dxi();
    let e = match &s.energy {
        Energy::Cumulative(big) => big[big.len() - 1],
        Energy::Density(h) => crate::grid::riemann_sum(h, dxi),
    };
    let dy = s.dy();
    (e, crate::grid::inner_slices(&s.u, &dy, dxi))
}

/// Characteristics at the labels, sampled velocity and density.
pub fn init_lagrangian(
    u0: impl Fn(f64) -> f64,
    rho0: Option<&dyn Fn(f64) -> f64>,
    g: &GridSpec,
    formulation: Formulation,
) -> Result<LagrangianState> {
    let y = g.nodes();
    let u: Vec<f64> = y.iter().map(|&x| u0(x)).collect();
    let r: Vec<f64> = match rho0 {
        Some(f) => y.iter().map(|&x| f(x)).collect(),
        None => vec![0.0; g.n()],
    };
    let h = compute_h(&u, &vec![1.0; g.n()], &r, g.dxi())?;
    let energy = match formulation {
        Formulation::Density => Energy::Density(h),
        Formulation::Cumulative => Energy::Cumulative(cumulate(&h, g.dxi())),
    };
    Ok(LagrangianState {
        grid: *g,
        y,
        u,
        energy,
        r,
    })
}

/// Initial data whose energy is a measure with cumulative function `f_mu`
/// (`f_mu(x)` is the mass of `[0, x)`), possibly with atoms.
pub fn init_from_measure(
    u0: impl Fn(f64) -> f64,
    f_mu: impl Fn(f64) -> f64,
    e_total: f64,
    g: &GridSpec,
    formulation: Formulation,
) -> Result<LagrangianState> {
    let l = g.period();
    let slope = 1.0 + e_total / l;
    let phi = |y: f64| y + f_mu(y);
    // Monotonicity spot check on a fine grid.
    let probes = 64 * g.n();
    let mut last = f_mu(0.0);
    for k in 1..=probes {
        let v = f_mu(l * k as f64 / probes as f64);
        if v < last {
            return Err(Error::Contract("cumulative measure must be nondecreasing".into()));
        }
        last = v;
    }
    let mut y = Vec::with_capacity(g.n());
    let mut big = Vec::with_capacity(g.n() + 1);
    for i in 0..g.n() {
        let s = slope * g.node(i);
        let yi = if i == 0 { 0.0 } else { first_reaching(&phi, s, 0.0, l) };
        y.push(yi);
        big.push(s - yi);
    }
    big.push(e_total);
    let u: Vec<f64> = y.iter().map(|&v| u0(v)).collect();
    let dxi = g.dxi();
    let energy = match formulation {
        Formulation::Cumulative => Energy::Cumulative(big),
        Formulation::Density => Energy::Density(big.windows(2).map(|w| (w[1] - w[0]) / dxi).collect()),
    };
    Ok(LagrangianState {
        grid: *g,
        y,
        u,
        energy,
        r: vec![0.0; g.n()],
    })
}

/// Smallest float `y` in `[lo, hi]` with `phi(y) >= s`, i.e. `sup {y : phi(y) < s}`.
fn first_reaching(phi: &impl Fn(f64) -> f64, s: f64, mut lo: f64, mut hi: f64) -> f64 {
    if phi(lo) >= s {
        return lo;
    }
    for _ in 0..2000 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) >= s {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Periodized fundamental solutions read off the inverse of `dxi * A`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    pub g: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub k: Vec<Vec<f64>>,
    pub kappa: Vec<Vec<f64>>,
}

pub fn compute_kernels(dy: &[f64], g: &GridSpec) -> Result<KernelSet> {
    let n = g.n();
    let a = assemble_momentum_matrix(dy, g)?;
    let lu = a.factor()?;
    let dxi = g.dxi();
    let mut ks = KernelSet {
        g: vec![vec![0.0; n]; n],
        gamma: vec![vec![0.0; n]; n],
        k: vec![vec![0.0; n]; n],
        kappa: vec![vec![0.0; n]; n],
    };
    let column = |c: usize| {
        let mut e = vec![0.0; 2 * n];
        e[c] = 1.0 / dxi;
        lu.solve_in_place(&mut e);
        e
    };
    for i in 0..n {
        let left = column(2 * i);
        let right = column(2 * i + 1);
        for j in 0..n {
            ks.g[i][j] = left[2 * j];
            ks.gamma[i][j] = left[2 * j + 1];
            ks.kappa[i][j] = right[2 * j];
            ks.k[i][j] = right[2 * j + 1];
        }
    }
    Ok(ks)
}

/// `(Q, R)` assembled from kernel sums, an independent path to [`solve_qr`].
pub fn qr_from_kernels(ks: &KernelSet, f: &[f64], h: &[f64], dxi: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let mut q = vec![0.0; n];
    let mut r = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            q[j] += dxi * (ks.g[i][j] * f[i] + ks.kappa[i][j] * h[i]);
            r[j] += dxi * (ks.gamma[i][j] * f[i] + ks.k[i][j] * h[i]);
        }
    }
    (q, r)
}

/// Monodromy data: the product of the per-cell transfer matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Floquet {
    pub trace: f64,
    pub det: f64,
    pub multiplier_plus: f64,
    pub multiplier_minus: f64,
    /// Floquet exponent with `multiplier_plus = exp(q L)`.
    pub exponent: f64,
}

pub fn floquet(dy: &[f64], g: &GridSpec) -> Floquet {
    let dxi = g.dxi();
    let mut p = [[1.0, 0.0], [0.0, 1.0]];
    for &d in dy {
        let a = dxi * d;
        let m = [[1.0 + a * a, a], [a, 1.0]];
        p = [
            [
                m[0][0] * p[0][0] + m[0][1] * p[1][0],
                m[0][0] * p[0][1] + m[0][1] * p[1][1],
            ],
            [
                m[1][0] * p[0][0] + m[1][1] * p[1][0],
                m[1][0] * p[0][1] + m[1][1] * p[1][1],
            ],
        ];
    }
    let tr = p[0][0] + p[1][1];
    let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let plus = 0.5 * (tr + disc);
    Floquet {
        trace: tr,
        det,
        multiplier_plus: plus,
        multiplier_minus: det / plus,
        exponent: plus.ln() / g.period(),
    }
}

/// Eigenvalues `lambda^+ >= lambda^-` of one transfer matrix.
pub fn cell_multipliers(dxi_dy: f64) -> (f64, f64) {
    let a = dxi_dy;
    let plus = 1.0 + 0.5 * a * a + 0.5 * a * (4.0 + a * a).sqrt();
    (plus, 1.0 / plus)
}

/// Piecewise-linear velocity, its slope and piecewise-constant density.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub rho: Vec<f64>,
}

pub fn eval_interpolant(s: &LagrangianState, x: &[f64]) -> Samples {
    let n = s.n();
    let l = s.grid.period();
    let mut nodes = s.y.clone();
    nodes.push(s.y[0] + l);
    let dy = s.dy();
    let y0 = nodes[0];
    let mut out = Samples {
        u: Vec::with_capacity(x.len()),
        ux: Vec::with_capacity(x.len()),
        rho: Vec::with_capacity(x.len()),
    };
    for &xq in x {
        let mut z = y0 + (xq - y0).rem_euclid(l);
        if z >= y0 + l {
            z = y0;
        }
        let i = nodes.partition_point(|&v| v <= z).saturating_sub(1).min(n - 1);
        let (a, b) = (nodes[i], nodes[i + 1]);
        let (ua, ub) = (s.u[i], s.u[(i + 1) % n]);
        if b > a {
            let slope = (ub - ua) / (b - a);
            out.u.push(ua + (z - a) * slope);
            out.ux.push(slope);
            out.rho.push(s.r[i] / dy[i]);
        } else {
            // Only reachable when every cell has collapsed onto one point.
            out.u.push(ua);
            out.ux.push(0.0);
            out.rho.push(0.0);
        }
    }
    out
}
