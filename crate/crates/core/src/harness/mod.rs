//! Experiment registry and convergence sweeps.

pub mod config;
pub mod emit;
pub mod registry;

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::metrics::{
    error_norms, ErrorReport, FnInterp, FourierInterp, GridLinear, Interpolant, LagrangianInterp,
    PeakonInterp, RefGrid, RhoInterp,
};
use crate::multipeakon::{self, PeakonState, Summation};
use crate::ode::{integrate_with, Options, Stats, Tolerances, Trajectory};
use crate::reference_schemes::{init_eulerian, EulerianState, FdRhs, FdScheme, PsRhs, SpectralState};
use crate::reference_solutions::{
    peakon_antipeakon_initial, reference_collision, reference_peakon_antipeakon, traveling_wave_2ch,
    traveling_wave_ch, PeakonReference, PeriodicPeakon, Side, TravelingWave,
};
use crate::variational::{self, init_from_measure, init_lagrangian, Formulation, LagrangianState, VdRhs};

pub use config::ExperimentConfig;
pub use emit::{emit, Format, ResultRow};
pub use registry::{compatibility, ExperimentId, SchemeId};

/// Number of equally spaced invariant samples per run.
pub const INVARIANT_SAMPLES: usize = 30;

/// Step cap per integration; long stiff runs fail instead of hanging.
pub const MAX_STEPS: usize = 5_000_000;

/// Reference data shared by every row of an experiment.
#[derive(Debug, Clone)]
pub enum Reference {
    Wave(TravelingWave),
    Peakon(PeriodicPeakon),
    Multi(PeakonReference),
    None,
}

/// Fixed data of one experiment.
#[derive(Debug, Clone)]
pub struct Setup {
    pub experiment: ExperimentId,
    pub period: f64,
    /// Times at which rows are reported.
    pub finals: Vec<f64>,
    pub reference: Reference,
}

impl Setup {
    pub fn new(experiment: ExperimentId) -> Result<Self> {
        use ExperimentId as E;
        let (period, finals, reference) = match experiment {
            E::SmoothCh => {
                let w = traveling_wave_ch()?;
                (w.period, vec![w.period / w.speed()], Reference::Wave(w))
            }
            E::Smooth2ch => {
                let w = traveling_wave_2ch()?;
                (w.period, vec![w.period / w.speed()], Reference::Wave(w))
            }
            E::PeriodicPeakon => (1.0, vec![1.0], Reference::Peakon(PeriodicPeakon::new(1.0, 0.5, 1.0))),
            E::PeakonAntipeakon => (2.0 * PI, vec![4.5], Reference::Multi(reference_peakon_antipeakon(&[4.5])?)),
            E::CollisionInit => (8.0, vec![2.0, 4.0], Reference::Multi(reference_collision(&[2.0, 4.0])?)),
            E::SineCh | E::Sine2ch => (2.0 * PI, vec![6.0 * PI], Reference::None),
        };
        Ok(Self { experiment, period, finals, reference })
    }

    pub fn u0(&self, x: f64) -> f64 {
        use ExperimentId as E;
        match (&self.reference, self.experiment) {
            (Reference::Wave(w), _) => w.eval(x).0,
            (Reference::Peakon(p), _) => p.eval(0.0, x, Side::Right).0,
            (_, E::PeakonAntipeakon) => peakon_antipeakon_initial(1.0, self.period)(x),
            (_, E::SineCh | E::Sine2ch) => x.sin(),
            _ => 0.0,
        }
    }

    pub fn rho0(&self, x: f64) -> Option<f64> {
        match (&self.reference, self.experiment) {
            (Reference::Wave(w), _) if w.has_density() => Some(w.density(x)),
            (_, ExperimentId::Sine2ch) => Some(2.0),
            _ => None,
        }
    }

    /// Exact solution at time `t`, when one is available.
    pub fn reference_at(&self, t: f64) -> Option<Box<dyn Interpolant + '_>> {
        match &self.reference {
            Reference::Wave(w) => Some(Box::new(FnInterp(move |x: f64| {
                let (u, ux) = w.solution(t, x);
                let rho = w.has_density().then(|| w.density(x - w.speed() * t));
                (u, ux, rho)
            }))),
            Reference::Peakon(p) => Some(Box::new(FnInterp(move |x: f64| {
                let (u, ux) = p.eval(t, x, Side::Right);
                (u, ux, None)
            }))),
            Reference::Multi(r) => r.at(t).map(|s| Box::new(PeakonInterp(s)) as Box<dyn Interpolant>),
            Reference::None => None,
        }
    }

    /// Energy formulation used by the variational scheme.
    pub fn formulation(&self) -> Formulation {
        match self.experiment {
            ExperimentId::SineCh | ExperimentId::Sine2ch => Formulation::Density,
            _ => Formulation::Cumulative,
        }
    }
}

/// A built discretization ready for integration.
pub enum Discretization {
    Vd(LagrangianState),
    Cmp(PeakonState),
    Fd { proto: EulerianState, rhs: FdRhs, rho: RhoInterp },
    Ps { proto: SpectralState, rhs: PsRhs },
}

impl Discretization {
    pub fn build(setup: &Setup, scheme: SchemeId, n: usize, rho_interp: Option<RhoInterp>) -> Result<Self> {
        compatibility(setup.experiment, scheme)?;
        let g = GridSpec::new(n, setup.period)?;
        let u0 = |x: f64| setup.u0(x);
        let rho_fn = |x: f64| setup.rho0(x).unwrap_or(0.0);
        let rho0: Option<&dyn Fn(f64) -> f64> = setup.experiment.two_component().then_some(&rho_fn);
        let fd = |s: FdScheme| -> Result<Self> {
            Ok(Discretization::Fd {
                proto: init_eulerian(s, u0, rho0, &g)?,
                rhs: FdRhs::new(s, &g)?,
                rho: rho_interp.unwrap_or(RhoInterp::Linear),
            })
        };
        match scheme {
            SchemeId::Vd if setup.experiment == ExperimentId::CollisionInit => {
                let f = |x: f64| if x <= 2.0 { 0.0 } else if x <= 6.0 { 3.0 } else { 6.0 };
                Ok(Discretization::Vd(init_from_measure(|_| 0.0, f, 6.0, &g, setup.formulation())?))
            }
            SchemeId::Vd => Ok(Discretization::Vd(init_lagrangian(u0, rho0, &g, setup.formulation())?)),
            SchemeId::Cmp => Ok(Discretization::Cmp(multipeakon::init_peakons(u0, &g)?)),
            SchemeId::Hr => fd(FdScheme::Hr),
            SchemeId::Lp => fd(FdScheme::Lp),
            SchemeId::Lp2ch => fd(FdScheme::Lp2ch),
            SchemeId::Ckr => fd(FdScheme::Ckr),
            SchemeId::Ps | SchemeId::Psda => {
                let proto = SpectralState::from_samples(u0, &g, scheme == SchemeId::Psda)?;
                let rhs = PsRhs::for_state(&proto)?;
                Ok(Discretization::Ps { proto, rhs })
            }
        }
    }

    pub fn initial(&self) -> Vec<f64> {
        match self {
            Discretization::Vd(s) => s.to_vec(),
            Discretization::Cmp(s) => s.to_vec(),
            Discretization::Fd { proto, .. } => proto.to_vec(),
            Discretization::Ps { proto, .. } => proto.to_vec(),
        }
    }

    /// Right-hand side; `tol` sets how much `D+y` overshoot VD tolerates.
    pub fn eval(&self, x: &[f64], out: &mut [f64], tol: Tolerances) -> Result<()> {
        match self {
            Discretization::Vd(s) => VdRhs::new(s.grid, s.formulation())
                .with_overshoot(variational::overshoot_for(tol.abs_tol))
                .eval(x, out),
            Discretization::Cmp(s) => multipeakon::rhs_periodic_into(x, s.period, Summation::Fast, out),
            Discretization::Fd { rhs, .. } => rhs.eval(x, out),
            Discretization::Ps { rhs, .. } => rhs.eval(x, out),
        }
    }

    /// `(energy, momentum)` of a flat state.
    pub fn invariants(&self, x: &[f64]) -> Result<(f64, f64)> {
        match self {
            Discretization::Vd(s) => Ok(variational::lagrangian_invariants(&s.from_slice(x)?)),
            Discretization::Cmp(s) => {
                let p = PeakonState::from_slice(x, s.period)?;
                Ok((p.energy(), multipeakon::momentum(&p)))
            }
            Discretization::Fd { proto, .. } => proto.from_slice(x)?.invariants(),
            Discretization::Ps { proto, .. } => Ok(spectral_invariants(&proto.from_slice(x)?)),
        }
    }

    pub fn integrate(&self, t_end: f64, times: &[f64], tol: Tolerances) -> Result<Trajectory> {
        let mut opts = Options::new(tol);
        opts.max_steps = MAX_STEPS;
        integrate_with(|_, x, dx| self.eval(x, dx, tol), &self.initial(), (0.0, t_end), &opts, times)
    }

    pub fn measure(&self, x: &[f64], reference: &dyn Interpolant, grid: &RefGrid, with_rho: bool) -> Result<ErrorReport> {
        match self {
            Discretization::Vd(s) => {
                let st = s.from_slice(x)?;
                error_norms(&LagrangianInterp { state: &st, with_rho }, reference, grid)
            }
            Discretization::Cmp(s) => error_norms(&PeakonInterp(&PeakonState::from_slice(x, s.period)?), reference, grid),
            Discretization::Fd { proto, rho, .. } => {
                let st = proto.from_slice(x)?;
                let lin = GridLinear {
                    offset: st.offset(),
                    period: st.grid.period(),
                    u: st.velocity()?,
                    rho: st.rho.clone().map(|r| (r, *rho)),
                };
                error_norms(&lin, reference, grid)
            }
            Discretization::Ps { proto, .. } => error_norms(&FourierInterp(&proto.from_slice(x)?), reference, grid),
        }
    }

    /// Velocity samples at the scheme's own nodes, for diagnostics.
    pub fn velocity(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Discretization::Vd(s) => Ok(s.from_slice(x)?.u),
            Discretization::Cmp(s) => Ok(PeakonState::from_slice(x, s.period)?.u),
            Discretization::Fd { proto, .. } => proto.from_slice(x)?.velocity(),
            Discretization::Ps { proto, .. } => Ok(proto.from_slice(x)?.sample(proto.n(), 0.0)?.0),
        }
    }
}

/// Riemann-sum energy and momentum of the trigonometric interpolant.
fn spectral_invariants(s: &SpectralState) -> (f64, f64) {
    let n = s.n();
    let l = s.period();
    let v = s.effective();
    let mut e = 0.0;
    for (i, c) in v.iter().enumerate() {
        let k = crate::reference_schemes::fourier::derivative_wavenumber(i, n) / s.scale;
        e += c.norm_sqr() * (1.0 + k * k);
    }
    (0.5 * l * e / (n * n) as f64, l * v[0].re / n as f64)
}

/// Outcome of one `(scheme, n)` integration, before row formatting.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: Stats,
    pub runtime: f64,
    pub energy_dev: Vec<f64>,
    pub momentum_dev: Vec<f64>,
}

/// Sample times: `INVARIANT_SAMPLES` uniform points up to the last final
/// time, merged with the final times.
pub fn sample_times(finals: &[f64]) -> Vec<f64> {
    let t_end = finals.iter().cloned().fold(0.0, f64::max);
    let mut ts: Vec<f64> = (1..=INVARIANT_SAMPLES)
        .map(|i| t_end * i as f64 / INVARIANT_SAMPLES as f64)
        .chain(finals.iter().cloned())
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Integrate `repeats` times and keep the median wall clock.
pub fn run_discretization(d: &Discretization, finals: &[f64], tol: Tolerances, repeats: usize) -> Result<RunOutcome> {
    let times = sample_times(finals);
    let t_end = *times.last().expect("nonempty times");
    let mut clocks = Vec::with_capacity(repeats.max(1));
    let mut traj = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let t = d.integrate(t_end, &times, tol)?;
        clocks.push(start.elapsed().as_secs_f64());
        traj.get_or_insert(t);
    }
    clocks.sort_by(f64::total_cmp);
    let traj = traj.expect("at least one run");
    let inv: Vec<(f64, f64)> = traj.states.iter().map(|x| d.invariants(x)).collect::<Result<_>>()?;
    let (e0, i0) = inv[0];
    Ok(RunOutcome {
        times: traj.times,
        states: traj.states,
        stats: traj.stats,
        runtime: clocks[clocks.len() / 2],
        energy_dev: inv.iter().map(|p| p.0 - e0).collect(),
        momentum_dev: inv.iter().map(|p| p.1 - i0).collect(),
    })
}

fn max_abs_until(times: &[f64], dev: &[f64], t: f64) -> f64 {
    times
        .iter()
        .zip(dev)
        .filter(|(s, _)| **s <= t)
        .fold(0.0, |m, (_, d)| m.max(d.abs()))
}

/// Rows for one grid size, one per final time.
pub fn run_one(setup: &Setup, cfg: &ExperimentConfig, k: u32) -> Vec<ResultRow> {
    let n = 1usize << k;
    let exp = setup.experiment.as_str();
    let sch = cfg.scheme.as_str();
    let fail = |why: String| -> Vec<ResultRow> {
        setup
            .finals
            .iter()
            .map(|&t| ResultRow::failed(exp, sch, n, t, why.clone()))
            .collect()
    };
    let d = match Discretization::build(setup, cfg.scheme, n, cfg.rho_interp) {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    let out = match run_discretization(&d, &setup.finals, cfg.tol, cfg.repeats) {
        Ok(o) => o,
        Err(e) => return fail(e.to_string()),
    };
    let grid = match RefGrid::new(cfg.k0, setup.period, cfg.shifted) {
        Ok(g) => g,
        Err(e) => return fail(e.to_string()),
    };
    setup
        .finals
        .iter()
        .map(|&t| {
            let idx = out.times.iter().position(|&s| s == t).expect("final time sampled");
            let report = match setup.reference_at(t) {
                Some(r) => match d.measure(&out.states[idx], r.as_ref(), &grid, setup.experiment.two_component()) {
                    Ok(rep) => Some(rep),
                    Err(e) => return ResultRow::failed(exp, sch, n, t, e.to_string()),
                },
                None => None,
            };
            ResultRow {
                experiment: exp.into(),
                scheme: sch.into(),
                n,
                t_final: t,
                l2_error: report.map(|r| r.l2),
                h1_error: report.map(|r| r.h1),
                rho_l2_error: report.and_then(|r| r.rho_l2),
                runtime_seconds: Some(out.runtime),
                energy_deviation: Some(max_abs_until(&out.times, &out.energy_dev, t)),
                momentum_deviation: Some(max_abs_until(&out.times, &out.momentum_dev, t)),
                accepted_steps: Some(out.stats.accepted as u64),
                rejected_steps: Some(out.stats.rejected as u64),
                failure: None,
            }
        })
        .collect()
}

/// Full sweep over `k` with a prepared setup; rows in ascending `k`.
pub fn run_with(setup: &Setup, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    if setup.experiment != cfg.experiment {
        return Err(Error::Contract("setup belongs to a different experiment".into()));
    }
    let ks: Vec<u32> = (cfg.kmin..=cfg.kmax).collect();
    let rows: Vec<Vec<ResultRow>> = if cfg.parallel {
        ks.par_iter().map(|&k| run_one(setup, cfg, k)).collect()
    } else {
        ks.iter().map(|&k| run_one(setup, cfg, k)).collect()
    };
    Ok(rows.into_iter().flatten().collect())
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    run_with(&Setup::new(cfg.experiment)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(e: ExperimentId, s: SchemeId, kmin: u32, kmax: u32) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(e, s);
        c.kmin = kmin;
        c.kmax = kmax;
        c.k0 = kmax + 2;
        c.tol = Tolerances::uniform(1e-8).unwrap();
        c.repeats = 1;
        c
    }

    #[test]
    fn incompatible_pairs_are_rejected() {
        let c = cfg(ExperimentId::Smooth2ch, SchemeId::Cmp, 3, 4);
        assert!(matches!(c.validate(), Err(Error::Incompatible { .. })));
    }

    #[test]
    fn row_equals_library_composition() {
        let mut c = cfg(ExperimentId::PeriodicPeakon, SchemeId::Vd, 4, 4);
        c.shifted = true;
        let rows = run(&c).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert!(row.failure.is_none());

        let p = PeriodicPeakon::new(1.0, 0.5, 1.0);
        let g = GridSpec::new(16, 1.0).unwrap();
        let s = init_lagrangian(|x| p.eval(0.0, x, Side::Right).0, None, &g, Formulation::Cumulative).unwrap();
        let rhs = VdRhs::new(g, Formulation::Cumulative).with_overshoot(variational::overshoot_for(c.tol.abs_tol));
        let mut opts = Options::new(c.tol);
        opts.max_steps = MAX_STEPS;
        let traj = integrate_with(|_, x, dx| rhs.eval(x, dx), &s.to_vec(), (0.0, 1.0), &opts, &sample_times(&[1.0])).unwrap();
        let end = s.from_slice(traj.last()).unwrap();
        let exact = FnInterp(|x: f64| {
            let (u, ux) = p.eval(1.0, x, Side::Right);
            (u, ux, None)
        });
        let rep = error_norms(
            &LagrangianInterp { state: &end, with_rho: false },
            &exact,
            &RefGrid::new(6, 1.0, true).unwrap(),
        )
        .unwrap();
        assert_eq!(row.l2_error.unwrap().to_bits(), rep.l2.to_bits());
        assert_eq!(row.h1_error.unwrap().to_bits(), rep.h1.to_bits());
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let mut c = cfg(ExperimentId::PeriodicPeakon, SchemeId::Lp, 3, 5);
        c.parallel = true;
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.iter().map(|r| r.n).collect::<Vec<_>>(), vec![8, 16, 32]);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.l2_error.map(f64::to_bits), y.l2_error.map(f64::to_bits));
            assert_eq!(x.h1_error.map(f64::to_bits), y.h1_error.map(f64::to_bits));
        }
    }

    #[test]
    fn sine_rows_have_no_errors_but_invariants() {
        let mut c = cfg(ExperimentId::Sine2ch, SchemeId::Vd, 4, 4);
        c.tol = Tolerances::uniform(1e-6).unwrap();
        let rows = run(&c).unwrap();
        assert!(rows[0].l2_error.is_none() && rows[0].failure.is_none());
        assert!(rows[0].energy_deviation.unwrap() < 1e-12);
    }

    #[test]
    fn collision_rows_cover_both_times() {
        let c = cfg(ExperimentId::CollisionInit, SchemeId::Vd, 3, 3);
        let rows = run(&c).unwrap();
        assert_eq!(rows.iter().map(|r| r.t_final).collect::<Vec<_>>(), vec![2.0, 4.0]);
        let failures: Vec<_> = rows.iter().filter_map(|r| r.failure.as_ref()).collect();
        assert!(rows.iter().all(|r| r.l2_error.is_some()), "{failures:?}");
    }

    #[test]
    fn spectral_invariants_of_a_sine() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let s = SpectralState::from_samples(f64::sin, &g, false).unwrap();
        let (e, m) = spectral_invariants(&s);
        assert!((e - PI).abs() < 1e-13 && m.abs() < 1e-14);
    }
}
