//! Dormand–Prince 5(4) integrator with dense output and scalar event location.
//!
//! The right-hand side is any `FnMut(t, x, dx) -> Result<()>` writing the
//! derivative into `dx`. Domain errors from the rhs (configuration, singular,
//! solver) reject the trial step and retry with a smaller one; any other error
//! aborts integration unchanged.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Tolerances {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v <= 1.0;
        if !ok(abs_tol) || !ok(rel_tol) {
            return Err(Error::Contract(format!(
                "tolerances must lie in (0, 1], got abs {abs_tol:e}, rel {rel_tol:e}"
            )));
        }
        Ok(Self { abs_tol, rel_tol })
    }

    /// Same value for both components.
    pub fn uniform(tol: f64) -> Result<Self> {
        Self::new(tol, tol)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub tol: Tolerances,
    /// Take steps of exactly this size (last one clipped) and skip error control.
    pub fixed_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Options {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            fixed_step: None,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }

    pub fn fixed(h: f64) -> Self {
        let mut o = Self::new(Tolerances { abs_tol: 1.0, rel_tol: 1.0 });
        o.fixed_step = Some(h);
        o
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
}

/// Integrate from `t_span.0` to `t_span.1`, sampling at `output_times`.
///
/// The returned trajectory starts with `(t0, x0)`; sample times equal to `t0`
/// are merged into that first entry.
pub fn integrate<F>(
    rhs: F,
    x0: &[f64],
    t_span: (f64, f64),
    tol: Tolerances,
    output_times: &[f64],
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    integrate_with(rhs, x0, t_span, &Options::new(tol), output_times)
}

pub fn integrate_with<F>(
    rhs: F,
    x0: &[f64],
    t_span: (f64, f64),
    opts: &Options,
    output_times: &[f64],
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::Contract(format!("empty time span [{t0}, {t1}]")));
    }
    let mut prev = t0;
    for &s in output_times {
        if s < prev || s > t1 {
            return Err(Error::Contract(format!(
                "output times must be ascending within [{t0}, {t1}], got {s}"
            )));
        }
        prev = s;
    }

    let mut times = vec![t0];
    let mut states = vec![x0.to_vec()];
    let mut pending = output_times.iter().copied().skip_while(|&s| s == t0).peekable();

    let mut st = Stepper::new(rhs, x0, t0, opts)?;
    while st.t < t1 {
        st.advance(t1)?;
        while let Some(&s) = pending.peek() {
            if s > st.t {
                break;
            }
            let x = if s == st.t { st.x.clone() } else { st.dense(s) };
            times.push(s);
            states.push(x);
            pending.next();
        }
    }
    Ok(Trajectory {
        times,
        states,
        stats: st.stats,
    })
}

/// Event description for [`integrate_to_event`].
pub struct Event<'a> {
    pub g: &'a dyn Fn(&[f64]) -> f64,
    pub direction: Direction,
    /// Crossings whose state fails this check are ignored.
    pub guard: Option<&'a dyn Fn(&[f64]) -> bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub t: f64,
    pub x: Vec<f64>,
    pub stats: Stats,
}

/// Integrate from `t0` until the first admissible crossing of `event.g`
/// in the requested direction, giving up at `horizon`.
pub fn integrate_to_event<F>(
    rhs: F,
    x0: &[f64],
    t0: f64,
    horizon: f64,
    event: &Event<'_>,
    tol: Tolerances,
) -> Result<EventHit>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(horizon > t0) {
        return Err(Error::Contract(format!("empty time span [{t0}, {horizon}]")));
    }
    let opts = Options::new(tol);
    let mut st = Stepper::new(rhs, x0, t0, &opts)?;
    let mut g_old = (event.g)(x0);
    let crossed = |a: f64, b: f64| match event.direction {
        Direction::Rising => a < 0.0 && b >= 0.0,
        Direction::Falling => a > 0.0 && b <= 0.0,
    };
    while st.t < horizon {
        st.advance(horizon)?;
        let g_new = (event.g)(&st.x);
        if crossed(g_old, g_new) {
            let (ta, tb) = (st.t_old, st.t);
            let tev = refine_root(|s| (event.g)(&st.dense(s)), ta, tb, g_old, g_new, tol.abs_tol);
            let x = if tev == tb { st.x.clone() } else { st.exact_from_old(tev)? };
            let admissible = event.guard.is_none_or(|ok| ok(&x));
            if admissible {
                return Ok(EventHit {
                    t: tev,
                    x,
                    stats: st.stats,
                });
            }
        }
        g_old = g_new;
    }
    Err(Error::EventNotFound { t0, t1: horizon })
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn refine_root(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64, atol: f64) -> f64 {
    let target = 1e-3 * atol;
    let mut side = 0i8;
    for _ in 0..200 {
        if gb.abs() <= target {
            return b;
        }
        if ga.abs() <= target {
            return a;
        }
        let width = b - a;
        if width.abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let mut c = b - gb * width / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let gc = g(c);
        if (gc < 0.0) == (ga < 0.0) && gc != 0.0 {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    if ga.abs() < gb.abs() {
        a
    } else {
        b
    }
}

struct Stepper<'o, F> {
    rhs: F,
    opts: &'o Options,
    n: usize,
    t: f64,
    t_old: f64,
    x: Vec<f64>,
    x_old: Vec<f64>,
    h: f64,
    h_done: f64,
    err_old: f64,
    k: [Vec<f64>; 7],
    k_old: [Vec<f64>; 7],
    tmp: Vec<f64>,
    xn: Vec<f64>,
    stats: Stats,
    dense_ready: std::cell::RefCell<Option<[Vec<f64>; 5]>>,
}

impl<'o, F> Stepper<'o, F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn new(mut rhs: F, x0: &[f64], t0: f64, opts: &'o Options) -> Result<Self> {
        let n = x0.len();
        let zeros = || vec![0.0; n];
        let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| zeros());
        let mut stats = Stats::default();
        eval(&mut rhs, t0, x0, &mut k[0], &mut stats)?;
        let mut s = Self {
            rhs,
            opts,
            n,
            t: t0,
            t_old: t0,
            x: x0.to_vec(),
            x_old: x0.to_vec(),
            h: 0.0,
            h_done: 0.0,
            err_old: 1e-4,
            k_old: std::array::from_fn(|_| zeros()),
            k,
            tmp: zeros(),
            xn: zeros(),
            stats,
            dense_ready: std::cell::RefCell::new(None),
        };
        s.h = match opts.fixed_step {
            Some(h) => {
                if !(h > 0.0) {
                    return Err(Error::Contract(format!("fixed step must be positive, got {h}")));
                }
                h
            }
            None => s.initial_step()?,
        };
        Ok(s)
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.opts.tol.abs_tol + self.opts.tol.rel_tol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> Result<f64> {
        let n = self.n.max(1) as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..self.n {
            let sk = self.scale(self.x[i], self.x[i]);
            d0 += (self.x[i] / sk).powi(2);
            d1 += (self.k[0][i] / sk).powi(2);
        }
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.opts.max_step);
        for i in 0..self.n {
            self.tmp[i] = self.x[i] + h0 * self.k[0][i];
        }
        let mut f1 = vec![0.0; self.n];
        eval(&mut self.rhs, self.t + h0, &self.tmp, &mut f1, &mut self.stats)?;
        let mut d2 = 0.0;
        for i in 0..self.n {
            let sk = self.scale(self.x[i], self.x[i]);
            d2 += ((f1[i] - self.k[0][i]) / sk).powi(2);
        }
        let d2 = (d2 / n).sqrt() / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(self.opts.max_step))
    }

    /// Take one accepted step towards `t_end` (rejecting as often as needed).
    fn advance(&mut self, t_end: f64) -> Result<()> {
        let fixed = self.opts.fixed_step.is_some();
        let mut domain_error = None;
        loop {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(self.fail("maximum number of steps exceeded".into()));
            }
            let mut h = self.h.min(self.opts.max_step);
            let last = self.t + 1.01 * h >= t_end;
            if last {
                h = t_end - self.t;
            }
            if !fixed && h < 1e3 * f64::EPSILON * self.t.abs() {
                let why = match &domain_error {
                    Some(e) => format!("step size underflow after rhs failure: {e}"),
                    None => format!("step size underflow (h = {h:e})"),
                };
                return Err(self.fail(why));
            }
            match self.stage(h) {
                Ok(()) => {}
                // A trial stage left the rhs domain: retry with a smaller step.
                Err(e) if !fixed && recoverable(&e) => {
                    if h < 1e3 * f64::EPSILON * self.t.abs().max(1.0) {
                        return Err(self.fail(format!("step size underflow after rhs failure: {e}")));
                    }
                    domain_error = Some(e);
                    self.stats.rejected += 1;
                    self.h = h * DOMAIN_SHRINK;
                    continue;
                }
                Err(e) => return Err(e),
            }
            let err = if fixed { 0.0 } else { self.error_norm(h) };
            if !err.is_finite() {
                return Err(self.fail("non-finite error estimate".into()));
            }
            if err <= 1.0 {
                self.stats.accepted += 1;
                std::mem::swap(&mut self.x_old, &mut self.x);
                std::mem::swap(&mut self.x, &mut self.xn);
                std::mem::swap(&mut self.k_old, &mut self.k);
                // FSAL: the last stage of the old step is the first of the next.
                self.k[0].copy_from_slice(&self.k_old[6]);
                self.t_old = self.t;
                self.t = if last { t_end } else { self.t + h };
                self.h_done = h;
                *self.dense_ready.borrow_mut() = None;
                if !fixed {
                    let fac = (err.max(1e-300).powf(EXPO) / self.err_old.powf(BETA) / SAFETY)
                        .clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
                    self.err_old = err.max(1e-4);
                    let grown = h / fac;
                    // A clipped final step says nothing about the natural step size.
                    self.h = if last { self.h.max(grown) } else { grown };
                }
                return Ok(());
            }
            self.stats.rejected += 1;
            let fac = (err.powf(EXPO) / SAFETY).min(1.0 / MIN_FACTOR);
            self.h = h / fac;
        }
    }

    fn stage(&mut self, h: f64) -> Result<()> {
        let n = self.n;
        let t = self.t;
        let (k1, rest) = self.k.split_at_mut(1);
        let k1 = &k1[0];
        let [k2, k3, k4, k5, k6, k7] = rest else { unreachable!() };
        let x = &self.x;
        let tmp = &mut self.tmp;
        let rhs = &mut self.rhs;
        let stats = &mut self.stats;

        for i in 0..n {
            tmp[i] = x[i] + h * A21 * k1[i];
        }
        eval(rhs, t + C2 * h, tmp, k2, stats)?;
        for i in 0..n {
            tmp[i] = x[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        eval(rhs, t + C3 * h, tmp, k3, stats)?;
        for i in 0..n {
            tmp[i] = x[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        eval(rhs, t + C4 * h, tmp, k4, stats)?;
        for i in 0..n {
            tmp[i] = x[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        eval(rhs, t + C5 * h, tmp, k5, stats)?;
        for i in 0..n {
            tmp[i] = x[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        eval(rhs, t + h, tmp, k6, stats)?;
        for i in 0..n {
            self.xn[i] = x[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        eval(rhs, t + h, &self.xn, k7, stats)?;
        Ok(())
    }

    fn error_norm(&self, h: f64) -> f64 {
        let k = &self.k;
        let mut acc = 0.0;
        for i in 0..self.n {
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sk = self.scale(self.x[i], self.xn[i]);
            acc += (e / sk).powi(2);
        }
        (acc / self.n.max(1) as f64).sqrt()
    }

    /// Continuous extension over the last accepted step.
    fn dense(&self, s: f64) -> Vec<f64> {
        let h = self.h_done;
        let mut cache = self.dense_ready.borrow_mut();
        let r = cache.get_or_insert_with(|| {
            let k = &self.k_old;
            let mut r: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; self.n]);
            for i in 0..self.n {
                let dy = self.x[i] - self.x_old[i];
                let bspl = h * k[0][i] - dy;
                r[0][i] = self.x_old[i];
                r[1][i] = dy;
                r[2][i] = bspl;
                r[3][i] = dy - h * k[6][i] - bspl;
                r[4][i] = h
                    * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            r
        });
        let th = (s - self.t_old) / h;
        let th1 = 1.0 - th;
        (0..self.n)
            .map(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
            .collect()
    }

    /// One full Runge–Kutta step from the start of the last accepted step to `s`.
    fn exact_from_old(&mut self, s: f64) -> Result<Vec<f64>> {
        let h = s - self.t_old;
        if h <= 0.0 {
            return Ok(self.x_old.clone());
        }
        let saved_t = self.t;
        let saved_x = self.x.clone();
        let saved_k1 = self.k[0].clone();
        self.t = self.t_old;
        self.x.copy_from_slice(&self.x_old);
        self.k[0].copy_from_slice(&self.k_old[0]);
        let res = self.stage(h);
        let out = self.xn.clone();
        self.t = saved_t;
        self.x = saved_x;
        self.k[0] = saved_k1;
        res.map(|_| out)
    }

    fn fail(&self, reason: String) -> Error {
        Error::Integration {
            t: self.t,
            reason,
            last_state: self.x.clone(),
        }
    }
}

/// Step factor after a stage lands outside the rhs domain.
const DOMAIN_SHRINK: f64 = 0.25;

/// Domain errors a smaller step can avoid, e.g. stage overshoot near a collision.
fn recoverable(e: &Error) -> bool {
    matches!(e, Error::Configuration(_) | Error::Singular { .. } | Error::Solver { .. })
}

fn eval<F>(rhs: &mut F, t: f64, x: &[f64], out: &mut [f64], stats: &mut Stats) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    stats.rhs_evals += 1;
    rhs(t, x, out)?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration {
            t,
            reason: "non-finite right-hand side".into(),
            last_state: x.to_vec(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn decay(_t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        dx[0] = -x[0];
        Ok(())
    }

    fn oscillator(_t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        dx[0] = x[1];
        dx[1] = -x[0];
        Ok(())
    }

    #[test]
    fn exponential_decay() {
        let tol = Tolerances::uniform(1e-10).unwrap();
        let tr = integrate(decay, &[1.0], (0.0, 1.0), tol, &[1.0]).unwrap();
        assert_eq!(tr.times, vec![0.0, 1.0]);
        assert!((tr.last()[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let tol = Tolerances::uniform(1e-9).unwrap();
        let tr = integrate(oscillator, &[1.0, 0.0], (0.0, 2.0 * PI), tol, &[2.0 * PI]).unwrap();
        let x = tr.last();
        assert!((x[0] - 1.0).abs() < 1e-7 && x[1].abs() < 1e-7);
    }

    #[test]
    fn dense_output_tracks_solution() {
        let tol = Tolerances::uniform(1e-10).unwrap();
        let ts: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let tr = integrate(oscillator, &[1.0, 0.0], (0.0, 5.0), tol, &ts).unwrap();
        assert_eq!(tr.times.len(), ts.len());
        for (t, x) in tr.times.iter().zip(&tr.states) {
            assert!((x[0] - t.cos()).abs() < 1e-8, "t = {t}");
            assert!((x[1] + t.sin()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn initial_state_is_first_sample() {
        let tol = Tolerances::uniform(1e-6).unwrap();
        let tr = integrate(decay, &[2.0], (0.0, 1.0), tol, &[0.0, 0.5]).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.5]);
        assert_eq!(tr.states[0], vec![2.0]);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let tol = Tolerances::uniform(1e-6).unwrap();
        assert!(integrate(decay, &[1.0], (1.0, 1.0), tol, &[]).is_err());
        assert!(integrate(decay, &[1.0], (0.0, 1.0), tol, &[0.5, 0.2]).is_err());
        assert!(integrate(decay, &[1.0], (0.0, 1.0), tol, &[2.0]).is_err());
        assert!(Tolerances::new(0.0, 1e-6).is_err());
        assert!(Tolerances::new(1e-6, 2.0).is_err());
    }

    #[test]
    fn non_finite_rhs_fails_immediately() {
        let tol = Tolerances::uniform(1e-6).unwrap();
        let rhs = |t: f64, _x: &[f64], dx: &mut [f64]| {
            dx[0] = if t > 0.5 { f64::NAN } else { 1.0 };
            Ok(())
        };
        match integrate(rhs, &[0.0], (0.0, 1.0), tol, &[1.0]) {
            Err(Error::Integration { t, reason, .. }) => {
                assert!(t > 0.5 && t <= 1.0);
                assert!(reason.contains("non-finite"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn domain_errors_in_trial_stages_shrink_the_step() {
        let tol = Tolerances::uniform(1e-10).unwrap();
        let mut calls = 0;
        let rhs = |_t: f64, x: &[f64], dx: &mut [f64]| {
            calls += 1;
            if calls == 4 {
                return Err(Error::Configuration("stage overshoot".into()));
            }
            dx[0] = -x[0];
            Ok(())
        };
        let tr = integrate(rhs, &[1.0], (0.0, 1.0), tol, &[1.0]).unwrap();
        assert!(tr.stats.rejected >= 1);
        assert!((tr.last()[0] - (-1f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn contract_errors_from_the_rhs_propagate() {
        let tol = Tolerances::uniform(1e-8).unwrap();
        let rhs = |t: f64, _x: &[f64], dx: &mut [f64]| {
            if t > 0.5 {
                return Err(Error::Contract("bad".into()));
            }
            dx[0] = 1.0;
            Ok(())
        };
        assert!(matches!(
            integrate(rhs, &[0.0], (0.0, 1.0), tol, &[1.0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn persistent_domain_errors_end_in_underflow() {
        let tol = Tolerances::uniform(1e-8).unwrap();
        let rhs = |t: f64, _x: &[f64], dx: &mut [f64]| {
            if t > 0.5 {
                return Err(Error::Configuration("wall".into()));
            }
            dx[0] = 1.0;
            Ok(())
        };
        match integrate(rhs, &[0.0], (0.0, 1.0), tol, &[1.0]) {
            Err(Error::Integration { t, reason, .. }) => {
                assert!((t - 0.5).abs() < 1e-6, "t = {t}");
                assert!(reason.contains("wall"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blow_up_underflows_step_size() {
        let tol = Tolerances::uniform(1e-8).unwrap();
        let rhs = |_t: f64, x: &[f64], dx: &mut [f64]| {
            dx[0] = x[0] * x[0];
            Ok(())
        };
        // x(t) = 1 / (1 - t) blows up at t = 1.
        match integrate(rhs, &[1.0], (0.0, 2.0), tol, &[]) {
            Err(Error::Integration { t, last_state, .. }) => {
                assert!(t > 0.99 && t < 1.1, "t = {t}");
                assert!(last_state[0] > 1e3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fixed_step_global_error_is_fifth_order() {
        let hs: Vec<f64> = (3..=7).map(|p| 2f64.powi(-p)).collect();
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let tr = integrate_with(decay, &[1.0], (0.0, 1.0), &Options::fixed(h), &[1.0]).unwrap();
                (tr.last()[0] - (-1.0f64).exp()).abs()
            })
            .collect();
        let lx: Vec<f64> = hs.iter().map(|h| h.log2()).collect();
        let ly: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
        let mx = lx.iter().sum::<f64>() / lx.len() as f64;
        let my = ly.iter().sum::<f64>() / ly.len() as f64;
        let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = num / den;
        assert!((slope - 5.0).abs() < 0.3, "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn linear_crossing_event() {
        let tol = Tolerances::uniform(1e-10).unwrap();
        let g = |x: &[f64]| x[0] - 1.0;
        let ev = Event { g: &g, direction: Direction::Rising, guard: None };
        let rhs = |_t: f64, _x: &[f64], dx: &mut [f64]| {
            dx[0] = 1.0;
            Ok(())
        };
        let hit = integrate_to_event(rhs, &[0.0], 0.0, 10.0, &ev, tol).unwrap();
        assert!((hit.t - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillator_half_period_event() {
        let tol = Tolerances::uniform(1e-10).unwrap();
        let g = |x: &[f64]| x[1];
        let ev = Event { g: &g, direction: Direction::Rising, guard: None };
        let hit = integrate_to_event(oscillator, &[1.0, 0.0], 0.0, 10.0, &ev, tol).unwrap();
        assert!((hit.t - PI).abs() < 1e-8, "t = {}", hit.t);
        assert!((hit.x[0] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn guard_skips_crossings() {
        let tol = Tolerances::uniform(1e-10).unwrap();
        // Third component is a clock; the first falling crossing of v at pi/2 is vetoed.
        let rhs = |_t: f64, x: &[f64], dx: &mut [f64]| {
            dx[0] = x[1];
            dx[1] = -x[0];
            dx[2] = 1.0;
            Ok(())
        };
        let g = |x: &[f64]| x[1];
        let guard = |x: &[f64]| x[2] > 3.0;
        let ev = Event { g: &g, direction: Direction::Falling, guard: Some(&guard) };
        let hit = integrate_to_event(rhs, &[0.0, 1.0, 0.0], 0.0, 20.0, &ev, tol).unwrap();
        assert!((hit.t - 2.5 * PI).abs() < 1e-8, "t = {}", hit.t);
    }

    #[test]
    fn missing_event_is_reported() {
        let tol = Tolerances::uniform(1e-8).unwrap();
        let g = |x: &[f64]| x[0] + 5.0;
        let ev = Event { g: &g, direction: Direction::Rising, guard: None };
        assert!(matches!(
            integrate_to_event(decay, &[1.0], 0.0, 3.0, &ev, tol),
            Err(Error::EventNotFound { .. })
        ));
    }

    #[test]
    fn deterministic_bitwise() {
        let tol = Tolerances::uniform(1e-9).unwrap();
        let a = integrate(oscillator, &[1.0, 0.3], (0.0, 7.0), tol, &[1.0, 3.0, 7.0]).unwrap();
        let b = integrate(oscillator, &[1.0, 0.3], (0.0, 7.0), tol, &[1.0, 3.0, 7.0]).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // Columns of a zero-column-sum matrix: the component sum is a linear invariant.
        #[test]
        fn linear_invariants_conserved(
            raw in proptest::collection::vec(-1.0f64..1.0, 16),
            x0 in proptest::collection::vec(-1.0f64..1.0, 4),
            tol_exp in 4i32..10,
        ) {
            let n = 4;
            let mut a = vec![0.0; n * n];
            for j in 0..n {
                let mut s = 0.0;
                for i in 0..n - 1 {
                    a[i * n + j] = raw[i * n + j];
                    s += raw[i * n + j];
                }
                a[(n - 1) * n + j] = -s;
            }
            let rhs = |_t: f64, x: &[f64], dx: &mut [f64]| {
                for i in 0..n {
                    dx[i] = (0..n).map(|j| a[i * n + j] * x[j]).sum();
                }
                Ok(())
            };
            let tol = Tolerances::uniform(10f64.powi(-tol_exp)).unwrap();
            let tr = integrate(rhs, &x0, (0.0, 1.0), tol, &[1.0]).unwrap();
            let s0: f64 = x0.iter().sum();
            let s1: f64 = tr.last().iter().sum();
            let scale = tr.last().iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            prop_assert!((s1 - s0).abs() <= 100.0 * f64::EPSILON * scale,
                "drift {}", s1 - s0);
        }
    }
}
