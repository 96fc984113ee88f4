//! Experiment and scheme identifiers and the compatibility matrix.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    SmoothCh,
    Smooth2ch,
    PeriodicPeakon,
    PeakonAntipeakon,
    CollisionInit,
    SineCh,
    Sine2ch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Vd,
    Cmp,
    Hr,
    Lp,
    Lp2ch,
    Ckr,
    Ps,
    Psda,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::SmoothCh,
        ExperimentId::Smooth2ch,
        ExperimentId::PeriodicPeakon,
        ExperimentId::PeakonAntipeakon,
        ExperimentId::CollisionInit,
        ExperimentId::SineCh,
        ExperimentId::Sine2ch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::SmoothCh => "smooth-ch",
            ExperimentId::Smooth2ch => "smooth-2ch",
            ExperimentId::PeriodicPeakon => "periodic-peakon",
            ExperimentId::PeakonAntipeakon => "peakon-antipeakon",
            ExperimentId::CollisionInit => "collision-init",
            ExperimentId::SineCh => "sine-ch",
            ExperimentId::Sine2ch => "sine-2ch",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentId::SmoothCh => "CH traveling wave after one period",
            ExperimentId::Smooth2ch => "2CH traveling wave after one period",
            ExperimentId::PeriodicPeakon => "single periodic peakon, L = c = 1, t = 1",
            ExperimentId::PeakonAntipeakon => "peakon-antipeakon collision, L = 2 pi, t = 4.5",
            ExperimentId::CollisionInit => "energy concentrated at x = 2, 6, L = 8, t = 2 and 4",
            ExperimentId::SineCh => "u0 = sin x over [0, 6 pi], invariants only",
            ExperimentId::Sine2ch => "u0 = sin x, rho0 = 2 over [0, 6 pi], invariants only",
        }
    }

    pub fn two_component(self) -> bool {
        matches!(self, ExperimentId::Smooth2ch | ExperimentId::Sine2ch)
    }

    /// Schemes the experiment accepts, in registry order.
    pub fn schemes(self) -> Vec<SchemeId> {
        SchemeId::ALL
            .into_iter()
            .filter(|&s| compatibility(self, s).is_ok())
            .collect()
    }
}

impl SchemeId {
    pub const ALL: [SchemeId; 8] = [
        SchemeId::Vd,
        SchemeId::Cmp,
        SchemeId::Hr,
        SchemeId::Lp,
        SchemeId::Lp2ch,
        SchemeId::Ckr,
        SchemeId::Ps,
        SchemeId::Psda,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Vd => "vd",
            SchemeId::Cmp => "cmp",
            SchemeId::Hr => "hr",
            SchemeId::Lp => "lp",
            SchemeId::Lp2ch => "lp2ch",
            SchemeId::Ckr => "ckr",
            SchemeId::Ps => "ps",
            SchemeId::Psda => "psda",
        }
    }

    pub fn spectral(self) -> bool {
        matches!(self, SchemeId::Ps | SchemeId::Psda)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment '{s}'")))
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scheme '{s}'")))
    }
}

/// `Ok` when the scheme may run the experiment.
pub fn compatibility(e: ExperimentId, s: SchemeId) -> Result<()> {
    use ExperimentId as E;
    use SchemeId as S;
    let reason = match (e, s) {
        (E::Smooth2ch | E::Sine2ch, S::Vd | S::Lp2ch) => None,
        (E::Smooth2ch | E::Sine2ch, S::Cmp) => Some("multipeakons are not solutions of the 2CH system"),
        (E::Smooth2ch | E::Sine2ch, _) => Some("scheme has no density component"),
        (_, S::Lp2ch) => Some("two-component scheme on a CH experiment"),
        (E::CollisionInit, S::Vd) => None,
        (E::CollisionInit, _) => Some("initial energy measure has atoms; only the Lagrangian scheme takes it"),
        (E::PeakonAntipeakon | E::SineCh, S::Hr) => Some("sign-changing momentum cannot be handled"),
        _ => None,
    };
    match reason {
        None => Ok(()),
        Some(r) => Err(Error::Incompatible {
            experiment: e.as_str().into(),
            scheme: s.as_str().into(),
            reason: r.into(),
        }),
    }
}
