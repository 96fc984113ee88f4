//! Reference solutions: traveling waves by shooting, the periodic peakon,
//! peakon-antipeakon data and multipeakon reference trajectories.

use crate::error::{Error, Result};
use crate::multipeakon::{self, PeakonState, Summation};
use crate::ode::{integrate, integrate_to_event, Direction, Event, Tolerances};

/// Number of intervals of the dense period table.
pub const WAVE_SAMPLES: usize = 4096;

/// Parameters of `phi'' = phi - A^2/(c - phi)^3 + B/(c - phi)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub phi0: f64,
}

impl WaveParams {
    pub fn ch() -> Self {
        Self { c: 3.0, a: 0.0, b: -3.0, phi0: 1.0 }
    }

    pub fn two_ch() -> Self {
        Self { c: 2.0, a: 2.0, b: 2.0, phi0: 0.5 }
    }

    pub fn accel(&self, phi: f64) -> f64 {
        let d = self.c - phi;
        phi - self.a * self.a / (d * d * d) + self.b / (d * d)
    }
}

/// One period of a traveling wave `u = phi(x - ct)`, `rho = psi(x - ct)`.
#[derive(Debug, Clone)]
pub struct TravelingWave {
    pub params: WaveParams,
    pub period: f64,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

impl TravelingWave {
    pub fn speed(&self) -> f64 {
        self.params.c
    }

    pub fn has_density(&self) -> bool {
        self.params.a != 0.0
    }

    /// `(phi, phi')` at `z`, reduced modulo the period, by cubic Hermite
    /// interpolation of the dense table.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        let h = self.period / WAVE_SAMPLES as f64;
        let s = z.rem_euclid(self.period) / h;
        let i = (s.floor() as usize).min(WAVE_SAMPLES - 1);
        let t = s - i as f64;
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let (d0, d1) = (self.dphi[i], self.dphi[i + 1]);
        let (a0, a1) = (self.params.accel(p0), self.params.accel(p1));
        (hermite(t, h, p0, p1, d0, d1), hermite(t, h, d0, d1, a0, a1))
    }

    /// `psi = A / (c - phi)`.
    pub fn density(&self, z: f64) -> f64 {
        self.params.a / (self.params.c - self.eval(z).0)
    }

    /// `u(t, x)` and `u_x(t, x)`.
    pub fn solution(&self, t: f64, x: f64) -> (f64, f64) {
        self.eval(x - self.params.c * t)
    }

    /// Raw table values `(phi_i, phi'_i)` at `z_i = i p / WAVE_SAMPLES`.
    pub fn table(&self) -> (&[f64], &[f64]) {
        (&self.phi, &self.dphi)
    }
}

fn hermite(t: f64, h: f64, p0: f64, p1: f64, m0: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * p0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * p1
        + (t3 - t2) * h * m1
}

/// Shoot from `(phi0, 0)`, detect the period as the next rising zero of
/// `phi'` near `phi0`, then tabulate one period.
pub fn traveling_wave(params: WaveParams) -> Result<TravelingWave> {
    let tol = Tolerances::new(1e-13, 1e-12)?;
    let rhs = |_: f64, x: &[f64], dx: &mut [f64]| {
        dx[0] = x[1];
        dx[1] = params.accel(x[0]);
        if dx[1].is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("traveling-wave profile reached the speed".into()))
        }
    };
    let x0 = [params.phi0, 0.0];
    let g = |x: &[f64]| x[1];
    let near = |x: &[f64]| (x[0] - params.phi0).abs() < 0.1;
    let event = Event { g: &g, direction: Direction::Rising, guard: Some(&near) };
    let hit = integrate_to_event(rhs, &x0, 0.0, 100.0, &event, tol)?;
    let period = hit.t;
    let times: Vec<f64> = (0..=WAVE_SAMPLES)
        .map(|i| period * i as f64 / WAVE_SAMPLES as f64)
        .collect();
    // The table is built tighter than the shooting so its second differences
    // stay clean.
    let table_tol = Tolerances::new(1e-15, 1e-14)?;
    let traj = integrate(rhs, &x0, (0.0, period), table_tol, &times)?;
    let phi = traj.states.iter().map(|x| x[0]).collect();
    let dphi = traj.states.iter().map(|x| x[1]).collect();
    Ok(TravelingWave { params, period, phi, dphi })
}

pub fn traveling_wave_ch() -> Result<TravelingWave> {
    traveling_wave(WaveParams::ch())
}

pub fn traveling_wave_2ch() -> Result<TravelingWave> {
    traveling_wave(WaveParams::two_ch())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Periodic peakon `c cosh(|x - x0 - ct| - L/2) / cosh(L/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicPeakon {
    pub c: f64,
    pub x0: f64,
    pub period: f64,
}

impl PeriodicPeakon {
    pub fn new(c: f64, x0: f64, period: f64) -> Self {
        Self { c, x0, period }
    }

    /// `(u, u_x)`; at the peak `side` picks the one-sided derivative.
    pub fn eval(&self, t: f64, x: f64, side: Side) -> (f64, f64) {
        let l = self.period;
        let mut z = (x - self.x0 - self.c * t).rem_euclid(l);
        if z == 0.0 && side == Side::Left {
            z = l;
        }
        let d = (0.5 * l).cosh();
        (
            self.c * (z - 0.5 * l).cosh() / d,
            self.c * (z - 0.5 * l).sinh() / d,
        )
    }
}

/// Peakon-antipeakon datum with peaks `+-c` at `L/4` and `3L/4`.
pub fn peakon_antipeakon_initial(c: f64, period: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x: f64| {
        let l = period;
        let x = x.rem_euclid(l);
        let s = if x < 0.25 * l {
            x.sinh()
        } else if x < 0.75 * l {
            (0.5 * l - x).sinh()
        } else {
            (x - l).sinh()
        };
        c * s / (0.25 * l).sinh()
    }
}

/// Slope of [`peakon_antipeakon_initial`], right-continuous at the kinks.
pub fn peakon_antipeakon_slope(c: f64, period: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x: f64| {
        let l = period;
        let x = x.rem_euclid(l);
        let s = if x < 0.25 * l {
            x.cosh()
        } else if x < 0.75 * l {
            -(0.5 * l - x).cosh()
        } else {
            (x - l).cosh()
        };
        c * s / (0.25 * l).sinh()
    }
}

/// Tolerances for multipeakon reference trajectories.
pub fn strict_tolerances() -> Tolerances {
    Tolerances { abs_tol: 1e-15, rel_tol: 1e-13 }
}

/// Multipeakon trajectory sampled at fixed times.
#[derive(Debug, Clone)]
pub struct PeakonReference {
    pub times: Vec<f64>,
    pub states: Vec<PeakonState>,
}

impl PeakonReference {
    pub fn compute(initial: &PeakonState, times: &[f64], tol: Tolerances) -> Result<Self> {
        let period = initial.period;
        let t_end = times.iter().cloned().fold(0.0, f64::max);
        let rhs = |_: f64, x: &[f64], dx: &mut [f64]| {
            multipeakon::rhs_periodic_into(x, period, Summation::Fast, dx)
        };
        let states = if t_end > 0.0 {
            let traj = integrate(rhs, &initial.to_vec(), (0.0, t_end), tol, times)?;
            times
                .iter()
                .map(|&t| {
                    let k = traj.times.iter().position(|&s| s == t).expect("output time present");
                    PeakonState::from_slice(&traj.states[k], period)
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![initial.clone(); times.len()]
        };
        Ok(Self { times: times.to_vec(), states })
    }

    pub fn at(&self, t: f64) -> Option<&PeakonState> {
        self.times.iter().position(|&s| s == t).map(|k| &self.states[k])
    }
}

/// Two peaks at `L/4`, `3L/4` with heights `+-c`.
pub fn peakon_antipeakon_state(c: f64, period: f64) -> Result<PeakonState> {
    let mut s = PeakonState::new(
        vec![0.25 * period, 0.75 * period],
        vec![c, -c],
        vec![0.0; 2],
        period,
    )?;
    s.h_cum = multipeakon::cumulative_energy(&s)?;
    Ok(s)
}

pub fn reference_peakon_antipeakon(times: &[f64]) -> Result<PeakonReference> {
    let s = peakon_antipeakon_state(1.0, 2.0 * std::f64::consts::PI)?;
    PeakonReference::compute(&s, times, strict_tolerances())
}

/// Two pairs of coincident peaks at rest at `x = 2, 6`, energy 6 in each pair.
pub fn collision_state() -> Result<PeakonState> {
    PeakonState::new(
        vec![2.0, 2.0, 6.0, 6.0],
        vec![0.0; 4],
        vec![0.0, 6.0, 6.0, 12.0],
        8.0,
    )
}

pub fn reference_collision(times: &[f64]) -> Result<PeakonReference> {
    PeakonReference::compute(&collision_state()?, times, strict_tolerances())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ch_wave_period_and_start() {
        let w = traveling_wave_ch().unwrap();
        assert!((w.period - 6.4695469424989).abs() < 1e-9, "{}", w.period);
        let (p, d) = w.eval(0.0);
        assert!((p - 1.0).abs() < 1e-12 && d.abs() < 1e-12);
        let (p, d) = w.eval(w.period);
        assert!((p - 1.0).abs() < 1e-12 && d.abs() < 1e-12);
    }

    #[test]
    fn two_ch_wave_period_and_density() {
        let w = traveling_wave_2ch().unwrap();
        assert!((w.period - 5.1475159326651).abs() < 1e-8, "{}", w.period);
        assert!((w.density(0.0) - 2.0 / 1.5).abs() < 1e-12);
        for i in 0..50 {
            let z = i as f64 * w.period / 50.0;
            let (p, _) = w.eval(z);
            assert!((w.density(z) * (2.0 - p) - 2.0).abs() < 1e-11);
        }
    }

    #[test]
    fn table_closes_over_one_period() {
        for w in [traveling_wave_ch().unwrap(), traveling_wave_2ch().unwrap()] {
            let (phi, dphi) = w.table();
            assert!((phi[WAVE_SAMPLES] - phi[0]).abs() < 1e-9);
            assert!((dphi[WAVE_SAMPLES] - dphi[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn profiles_satisfy_the_wave_ode() {
        for w in [traveling_wave_ch().unwrap(), traveling_wave_2ch().unwrap()] {
            let (phi, _) = w.table();
            // Stride keeps the stencil above the dense-output noise floor.
            let st = 4;
            let h = st as f64 * w.period / WAVE_SAMPLES as f64;
            for k in 0..100 {
                let i = 2 * st + k * (WAVE_SAMPLES - 4 * st) / 100;
                let d2 = (-phi[i + 2 * st] + 16.0 * phi[i + st] - 30.0 * phi[i] + 16.0 * phi[i - st]
                    - phi[i - 2 * st])
                    / (12.0 * h * h);
                let res = d2 - w.params.accel(phi[i]);
                assert!(res.abs() < 1e-8, "residual at {i}: {res:e}");
            }
        }
    }

    #[test]
    fn evaluator_is_consistent_between_nodes() {
        let w = traveling_wave_ch().unwrap();
        let h = 1e-5;
        for k in 0..40 {
            let z = 0.123 + k as f64 * 0.15;
            let fd = (w.eval(z + h).0 - w.eval(z - h).0) / (2.0 * h);
            assert!((fd - w.eval(z).1).abs() < 1e-8);
        }
    }

    #[test]
    fn periodic_peakon_values() {
        let p = PeriodicPeakon::new(1.5, 0.5, 2.0);
        assert!((p.eval(0.0, 0.5, Side::Right).0 - 1.5).abs() < 1e-15);
        assert!((p.eval(0.0, 1.5, Side::Right).0 - 1.5 / 1f64.cosh()).abs() < 1e-15);
        let right = p.eval(0.0, 0.5, Side::Right).1;
        let left = p.eval(0.0, 0.5, Side::Left).1;
        assert!((right - left + 2.0 * 1.5 * 1f64.tanh()).abs() < 1e-14);
        assert!((p.eval(1.0, 2.0, Side::Right).0 - 1.5).abs() < 1e-14);
    }

    #[test]
    fn periodic_peakon_is_helmholtz_harmonic_off_the_peak() {
        let p = PeriodicPeakon::new(1.0, 0.5, 1.0);
        let h = 1e-4;
        for k in 1..20 {
            let x = 0.5 + 0.049 * k as f64;
            if (x - 1.5).abs() < 1e-3 {
                continue;
            }
            let f = |x: f64| p.eval(0.0, x, Side::Right).0;
            let uxx = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            assert!((f(x) - uxx).abs() < 1e-6);
        }
    }

    #[test]
    fn peakon_antipeakon_datum() {
        let l = 2.0 * PI;
        let u0 = peakon_antipeakon_initial(1.0, l);
        assert!((u0(0.25 * l) - 1.0).abs() < 1e-15);
        assert!((u0(0.75 * l) + 1.0).abs() < 1e-15);
        assert!(u0(0.0).abs() < 1e-15 && u0(0.5 * l).abs() < 1e-15);
        for k in 0..50 {
            let s = 0.06 * k as f64;
            assert!((u0(0.5 * l + s) + u0(0.5 * l - s)).abs() < 1e-13);
        }
    }

    #[test]
    fn two_peakon_reference_matches_datum_and_keeps_energy() {
        let times = [0.0, 1.5, 3.0, 4.5];
        let r = reference_peakon_antipeakon(&times).unwrap();
        let l = 2.0 * PI;
        let u0 = peakon_antipeakon_initial(1.0, l);
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * l / 200.0).collect();
        let (u, _) = multipeakon::eval_interpolant(&r.states[0], &xs);
        for (x, v) in xs.iter().zip(&u) {
            assert!((v - u0(*x)).abs() < 1e-10);
        }
        let e0 = r.states[0].energy();
        for s in &r.states {
            assert!((s.energy() - e0).abs() < 1e-12);
            let (a, _) = multipeakon::eval_interpolant(s, &xs);
            let mirrored: Vec<f64> = xs.iter().map(|x| l - x).collect();
            let (b, _) = multipeakon::eval_interpolant(s, &mirrored);
            for k in 1..xs.len() {
                assert!((a[k] + b[k]).abs() < 1e-9);
            }
        }
        let end = r.at(4.5).unwrap();
        assert!((end.y[0] - 0.5 * PI).abs() < 0.3 && (end.y[1] - 1.5 * PI).abs() < 0.3);
    }

    #[test]
    fn collision_reference_separates_pairs() {
        let r = reference_collision(&[2.0]).unwrap();
        let s = &r.states[0];
        assert!((s.energy() - 12.0).abs() < 1e-12);
        assert!(s.y[1] - s.y[0] > 0.5);
        assert!(s.u[0] < 0.0 && s.u[1] > 0.0);
    }
}
