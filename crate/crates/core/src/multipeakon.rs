//! Conservative multipeakon scheme on the real line and on a periodic domain.
//!
//! Storage: slot `k` of `y`, `u`, `h_cum` holds peak `k + 1` of the usual
//! 1-based numbering. The periodic ghost peak 0 sits at `(y[n-1] - L, u[n-1])`
//! and carries `H = 0`, so `h_cum[n-1]` is the energy of one period.
//! Interval `j` (for `j in 0..n`) joins peak `j` and peak `j + 1`.

use crate::error::{ensure_len, Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct PeakonState {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    /// Cumulative energy measured from the ghost peak.
    pub h_cum: Vec<f64>,
    pub period: f64,
}

impl PeakonState {
    pub fn new(y: Vec<f64>, u: Vec<f64>, h_cum: Vec<f64>, period: f64) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::Contract("need at least one peak".into()));
        }
        ensure_len("u", u.len(), n)?;
        ensure_len("H", h_cum.len(), n)?;
        if !(period > 0.0) {
            return Err(Error::Contract(format!("period must be positive, got {period}")));
        }
        Ok(Self { y, u, h_cum, period })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Flat `[y, u, H]` layout used by the time integrator.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.n());
        v.extend_from_slice(&self.y);
        v.extend_from_slice(&self.u);
        v.extend_from_slice(&self.h_cum);
        v
    }

    pub fn from_slice(x: &[f64], period: f64) -> Result<Self> {
        if !x.len().is_multiple_of(3) || x.is_empty() {
            return Err(Error::Contract(format!("flat peakon state has length {}", x.len())));
        }
        let n = x.len() / 3;
        Self::new(x[..n].to_vec(), x[n..2 * n].to_vec(), x[2 * n..].to_vec(), period)
    }

    /// Total energy of one period.
    pub fn energy(&self) -> f64 {
        self.h_cum[self.n() - 1]
    }
}

/// Midpoints and half-differences per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    pub ybar: Vec<f64>,
    pub dy: Vec<f64>,
    pub ubar: Vec<f64>,
    pub du: Vec<f64>,
    /// Half the energy contained in each interval, read from the state's `H`.
    pub dh: Vec<f64>,
}

/// Peak `i` in 1-based numbering (0 is the ghost), for `i` in `0..=n`.
#[inline]
fn peak(s: &[f64], i: usize, shift: f64) -> f64 {
    if i == 0 {
        s[s.len() - 1] - shift
    } else {
        s[i - 1]
    }
}

pub fn pair_stats(s: &PeakonState) -> PairStats {
    pair_stats_raw(&s.y, &s.u, &s.h_cum, s.period)
}

fn pair_stats_raw(y: &[f64], u: &[f64], h: &[f64], period: f64) -> PairStats {
    let n = y.len();
    let mut ps = PairStats {
        ybar: vec![0.0; n],
        dy: vec![0.0; n],
        ubar: vec![0.0; n],
        du: vec![0.0; n],
        dh: vec![0.0; n],
    };
    for j in 0..n {
        let (y0, y1) = (peak(y, j, period), peak(y, j + 1, period));
        let (u0, u1) = (peak(u, j, 0.0), peak(u, j + 1, 0.0));
        let h0 = if j == 0 { 0.0 } else { h[j - 1] };
        ps.ybar[j] = 0.5 * (y0 + y1);
        ps.dy[j] = 0.5 * (y1 - y0);
        ps.ubar[j] = 0.5 * (u0 + u1);
        ps.du[j] = 0.5 * (u1 - u0);
        ps.dh[j] = 0.5 * (h[j] - h0);
    }
    ps
}

fn half_energy(ubar: f64, du: f64, dy: f64, index: usize, period: f64) -> Result<f64> {
    if dy < 1e-14 * period {
        if du != 0.0 {
            return Err(Error::Singular { index, dy, du });
        }
        return Ok(ubar * ubar * dy.max(0.0).tanh());
    }
    Ok(ubar * ubar * dy.tanh() + du * du / dy.tanh())
}

/// Half-interval energies of the piecewise-exponential interpolant,
/// computed from positions and heights alone (the state's `H` is ignored).
pub fn delta_h(s: &PeakonState) -> Result<Vec<f64>> {
    let ps = pair_stats(s);
    (0..s.n())
        .map(|j| half_energy(ps.ubar[j], ps.du[j], ps.dy[j], j, s.period))
        .collect()
}

/// Cumulative energies `H_i = 2 * sum_{j < i} dH_j` matching positions and heights.
pub fn cumulative_energy(s: &PeakonState) -> Result<Vec<f64>> {
    let dh = delta_h(s)?;
    let mut acc = 0.0;
    Ok(dh
        .iter()
        .map(|d| {
            acc += 2.0 * d;
            acc
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Summation {
    /// O(n^2) double sum.
    Naive,
    /// O(n) recursion.
    Fast,
    /// Fast path verified against the double sum.
    Checked,
}

const CHECK_TOL: f64 = 1e-10;

/// Interval weights: `a` multiplies the kernel, `b` its derivative.
#[inline]
fn weights(ps: &PairStats, j: usize) -> (f64, f64) {
    let (dy, ub, du, dh) = (ps.dy[j], ps.ubar[j], ps.du[j], ps.dh[j]);
    let (sh, ch) = (dy.sinh(), dy.cosh());
    let th = sh / ch;
    let a = 0.5 * (dh * ch + ub * ub * th / ch);
    let b = ub * du * sh * th;
    (a, b)
}

/// Trial stages near a collision can push `dy` slightly negative. The kernels
/// are smooth in `dy`, so only gross disorder is rejected.
const ORDER_SLACK: f64 = 1e-3;

fn check_order(ps: &PairStats, period: f64) -> Result<()> {
    for (j, &d) in ps.dy.iter().enumerate() {
        if d < -ORDER_SLACK * period || !d.is_finite() {
            return Err(Error::Configuration(format!(
                "peaks out of order at interval {j} (dy = {d:e})"
            )));
        }
    }
    Ok(())
}

/// `P_i` and `Q_i` for the periodic scheme.
pub fn pq_periodic(s: &PeakonState, mode: Summation) -> Result<(Vec<f64>, Vec<f64>)> {
    let ps = pair_stats(s);
    check_order(&ps, s.period)?;
    pq_periodic_stats(&s.y, &ps, s.period, mode)
}

fn pq_periodic_stats(
    y: &[f64],
    ps: &PairStats,
    period: f64,
    mode: Summation,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match mode {
        Summation::Naive => Ok(pq_periodic_naive(y, ps, period)),
        Summation::Fast => Ok(pq_periodic_fast(y, ps, period)),
        Summation::Checked => {
            let fast = pq_periodic_fast(y, ps, period);
            let naive = pq_periodic_naive(y, ps, period);
            let rel = relative_gap(&fast, &naive);
            if rel > CHECK_TOL {
                return Err(Error::Consistency { rel });
            }
            Ok(fast)
        }
    }
}

/// Max-norm gap of `(P, Q)` scaled by the reference `P` (which bounds `|Q|`).
pub fn relative_gap(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> f64 {
    let scale = b.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut gap = 0.0f64;
    for i in 0..a.0.len() {
        gap = gap.max((a.0[i] - b.0[i]).abs()).max((a.1[i] - b.1[i]).abs());
    }
    if scale == 0.0 {
        gap
    } else {
        gap / scale
    }
}

/// Sign convention shared by both summation paths.
#[inline]
fn sigma(i: usize, j: usize) -> f64 {
    if j >= i {
        -1.0
    } else {
        1.0
    }
}

fn pq_periodic_naive(y: &[f64], ps: &PairStats, period: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let half = 0.5 * period;
    let inv_sh = 1.0 / half.sinh();
    let w: Vec<(f64, f64)> = (0..n).map(|j| weights(ps, j)).collect();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 1..=n {
        let yi = y[i - 1];
        let (mut pi, mut qi) = (0.0, 0.0);
        for (j, &(a, b)) in w.iter().enumerate() {
            let sg = sigma(i, j);
            let arg = sg * (yi - ps.ybar[j]) - half;
            let e = arg.exp();
            let k = 0.5 * (e + 1.0 / e) * inv_sh;
            let dk = 0.5 * (e - 1.0 / e) * inv_sh;
            pi += k * a - sg * dk * b;
            qi += sg * dk * a - k * b;
        }
        p[i - 1] = pi;
        q[i - 1] = qi;
    }
    (p, q)
}

fn pq_periodic_fast(y: &[f64], ps: &PairStats, period: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let w: Vec<(f64, f64)> = (0..n).map(|j| weights(ps, j)).collect();
    // alpha * e^x evaluated as e^(x - L) / (1 - e^-L) so nothing overflows.
    let denom = -(-period).exp_m1();
    let tail = |x: f64| (x - period).exp() / denom;

    let y1 = y[0];
    let yn = y[n - 1];
    let mut g_minus = 0.0;
    let mut g_plus = 0.0;
    for (j, &(a, b)) in w.iter().enumerate() {
        g_minus += tail(ps.ybar[j] - y1) * (a + b);
        g_plus += tail(yn - ps.ybar[j]) * (a - b);
    }

    // gl[i-1] = g^l_i, i = 1..n
    let mut gl = vec![0.0; n];
    gl[0] = g_minus + (-ps.dy[0]).exp() * (w[0].0 + w[0].1);
    for i in 1..n {
        let d = ps.dy[i];
        gl[i] = (-2.0 * d).exp() * gl[i - 1] + (-d).exp() * (w[i].0 + w[i].1);
    }
    let mut gr = vec![0.0; n];
    gr[n - 1] = g_plus;
    for i in (1..n).rev() {
        let d = ps.dy[i];
        gr[i - 1] = (-2.0 * d).exp() * gr[i] + (-d).exp() * (w[i].0 - w[i].1);
    }
    let p = gl.iter().zip(&gr).map(|(l, r)| l + r).collect();
    let q = gl.iter().zip(&gr).map(|(l, r)| r - l).collect();
    (p, q)
}

/// Time derivatives in the flat `[y, u, H]` layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakonRates {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub h_cum: Vec<f64>,
}

pub fn rhs_periodic(s: &PeakonState, mode: Summation) -> Result<PeakonRates> {
    let mut out = vec![0.0; 3 * s.n()];
    rhs_periodic_into(&s.to_vec(), s.period, mode, &mut out)?;
    let n = s.n();
    Ok(PeakonRates {
        y: out[..n].to_vec(),
        u: out[n..2 * n].to_vec(),
        h_cum: out[2 * n..].to_vec(),
    })
}

/// Flat-layout right-hand side, suitable for [`crate::ode::integrate`].
pub fn rhs_periodic_into(x: &[f64], period: f64, mode: Summation, out: &mut [f64]) -> Result<()> {
    let n = x.len() / 3;
    ensure_len("peakon state", x.len(), 3 * n)?;
    ensure_len("peakon rates", out.len(), 3 * n)?;
    let (y, rest) = x.split_at(n);
    let (u, h) = rest.split_at(n);
    let ps = pair_stats_raw(y, u, h, period);
    check_order(&ps, period)?;
    let (p, q) = pq_periodic_stats(y, &ps, period, mode)?;
    let last = u[n - 1] * (u[n - 1] * u[n - 1] - 2.0 * p[n - 1]);
    for i in 0..n {
        out[i] = u[i];
        out[n + i] = -q[i];
        out[2 * n + i] = u[i] * (u[i] * u[i] - 2.0 * p[i]) - last;
    }
    out[3 * n - 1] = 0.0;
    Ok(())
}

/// Real-line interior interval statistics (intervals 1..n-1 joining slots j-1, j).
fn line_stats(y: &[f64], u: &[f64], h: &[f64]) -> PairStats {
    let n = y.len();
    let m = n.saturating_sub(1);
    let mut ps = PairStats {
        ybar: vec![0.0; m],
        dy: vec![0.0; m],
        ubar: vec![0.0; m],
        du: vec![0.0; m],
        dh: vec![0.0; m],
    };
    for j in 0..m {
        ps.ybar[j] = 0.5 * (y[j + 1] + y[j]);
        ps.dy[j] = 0.5 * (y[j + 1] - y[j]);
        ps.ubar[j] = 0.5 * (u[j + 1] + u[j]);
        ps.du[j] = 0.5 * (u[j + 1] - u[j]);
        ps.dh[j] = 0.5 * (h[j + 1] - h[j]);
    }
    ps
}

/// `P_i` and `Q_i` on the real line, where `u` decays exponentially outside the peaks.
pub fn pq_line(s: &PeakonState, mode: Summation) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = s.n();
    let ps = line_stats(&s.y, &s.u, &s.h_cum);
    for (j, &d) in ps.dy.iter().enumerate() {
        if d < 0.0 || !d.is_finite() {
            return Err(Error::Configuration(format!(
                "peaks out of order at interval {} (dy = {d:e})",
                j + 1
            )));
        }
    }
    let (y, u) = (&s.y, &s.u);
    let left = 0.25 * u[0] * u[0];
    let right = 0.25 * u[n - 1] * u[n - 1];
    let w: Vec<(f64, f64)> = (0..n - 1).map(|j| weights(&ps, j)).collect();

    let naive = || {
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            // Boundary terms: sigma = +1 on the left, -1 on the right.
            let l = left * (y[0] - y[i]).exp();
            let r = right * (y[i] - y[n - 1]).exp();
            let (mut pi, mut qi) = (l + r, r - l);
            for (jj, &(a, b)) in w.iter().enumerate() {
                let sg = sigma(i + 1, jj + 1);
                let pij = (-sg * (y[i] - ps.ybar[jj])).exp() * (a + sg * b);
                pi += pij;
                qi -= sg * pij;
            }
            p[i] = pi;
            q[i] = qi;
        }
        (p, q)
    };
    let fast = || {
        let mut fl = vec![0.0; n];
        let mut fr = vec![0.0; n];
        fl[0] = left;
        for i in 1..n {
            let d = ps.dy[i - 1];
            fl[i] = (-2.0 * d).exp() * fl[i - 1] + (-d).exp() * (w[i - 1].0 + w[i - 1].1);
        }
        fr[n - 1] = right;
        for i in (0..n - 1).rev() {
            let d = ps.dy[i];
            fr[i] = (-2.0 * d).exp() * fr[i + 1] + (-d).exp() * (w[i].0 - w[i].1);
        }
        let p: Vec<f64> = fl.iter().zip(&fr).map(|(l, r)| l + r).collect();
        let q: Vec<f64> = fl.iter().zip(&fr).map(|(l, r)| r - l).collect();
        (p, q)
    };
    match mode {
        Summation::Naive => Ok(naive()),
        Summation::Fast => Ok(fast()),
        Summation::Checked => {
            let (f, nv) = (fast(), naive());
            let rel = relative_gap(&f, &nv);
            if rel > CHECK_TOL {
                return Err(Error::Consistency { rel });
            }
            Ok(f)
        }
    }
}

/// Real-line right-hand side; `period` is ignored.
pub fn rhs_line(s: &PeakonState, mode: Summation) -> Result<PeakonRates> {
    let (p, q) = pq_line(s, mode)?;
    let u = &s.u;
    Ok(PeakonRates {
        y: u.clone(),
        u: q.iter().map(|v| -v).collect(),
        h_cum: (0..s.n()).map(|i| u[i] * u[i] * u[i] - 2.0 * p[i] * u[i]).collect(),
    })
}

/// Piecewise-exponential interpolant and its right-continuous derivative.
pub fn eval_interpolant(s: &PeakonState, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = s.n();
    let l = s.period;
    let ps = pair_stats(s);
    let nodes: Vec<f64> = (0..=n).map(|i| peak(&s.y, i, l)).collect();
    let y0 = nodes[0];
    let mut u = Vec::with_capacity(x.len());
    let mut ux = Vec::with_capacity(x.len());
    for &xq in x {
        let mut z = y0 + (xq - y0).rem_euclid(l);
        if z >= y0 + l {
            z = y0;
        }
        // Last node <= z; half-open cells so exact peaks take the right limit.
        let j = nodes.partition_point(|&v| v <= z).saturating_sub(1).min(n - 1);
        let (dy, ub, du) = (ps.dy[j], ps.ubar[j], ps.du[j]);
        if dy <= 0.0 {
            // Collapsed interval: the point coincides with the peak.
            u.push(peak(&s.u, j + 1, 0.0));
            ux.push(0.0);
            continue;
        }
        let r = z - ps.ybar[j];
        let (ch, sh) = (dy.cosh(), dy.sinh());
        u.push(ub * r.cosh() / ch + du * r.sinh() / sh);
        ux.push(ub * r.sinh() / ch + du * r.cosh() / sh);
    }
    (u, ux)
}

/// Integral of `u` over one period (equal to the integral of `m = u - u_xx`).
pub fn momentum(s: &PeakonState) -> f64 {
    let ps = pair_stats(s);
    (0..s.n())
        .map(|j| 2.0 * ps.ubar[j] * ps.dy[j].tanh())
        .sum()
}

/// Peaks at the grid labels with heights sampled from `u0`.
pub fn init_peakons(u0: impl Fn(f64) -> f64, g: &GridSpec) -> Result<PeakonState> {
    let y = g.nodes();
    let u: Vec<f64> = y.iter().map(|&x| u0(x)).collect();
    let mut s = PeakonState::new(y, u, vec![0.0; g.n()], g.period())?;
    s.h_cum = cumulative_energy(&s)?;
    Ok(s)
}
