use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexVec2, C64};

/// A point on the K1/K2 Bloch sphere:
/// `cos(theta/2)|K1> + sin(theta/2) e^{i phi}|K2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quasispin {
    pub theta: f64,
    pub phi: f64,
}

impl Quasispin {
    /// K0 = (K1 + K2)/sqrt 2.
    pub const K0: Quasispin = Quasispin {
        theta: FRAC_PI_2,
        phi: 0.0,
    };
    /// K0bar = (K1 - K2)/sqrt 2.
    pub const K0BAR: Quasispin = Quasispin {
        theta: FRAC_PI_2,
        phi: PI,
    };
    pub const K1: Quasispin = Quasispin {
        theta: 0.0,
        phi: 0.0,
    };
    pub const K2: Quasispin = Quasispin {
        theta: PI,
        phi: 0.0,
    };

    /// Validating constructor; `phi` is wrapped into [0, 2 pi).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::field("theta", format!("{theta} outside [0, pi]")));
        }
        if !phi.is_finite() {
            return Err(Error::field("phi", "must be finite"));
        }
        Ok(Self {
            theta,
            phi: phi.rem_euclid(TAU),
        })
    }

    pub fn ket(&self) -> ComplexVec2 {
        let (s, c) = (0.5 * self.theta).sin_cos();
        ComplexVec2::new(C64::new(c, 0.0), C64::from_polar(s, self.phi))
    }
}

/// The two strangeness questions available to an active measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strangeness {
    K0,
    #[default]
    K0bar,
}

impl Strangeness {
    pub fn quasispin(self) -> Quasispin {
        match self {
            Strangeness::K0 => Quasispin::K0,
            Strangeness::K0bar => Quasispin::K0BAR,
        }
    }
}

impl FromStr for Strangeness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k0" => Ok(Strangeness::K0),
            "k0bar" => Ok(Strangeness::K0bar),
            other => Err(Error::field(
                "question",
                format!("expected k0 or k0bar, got {other:?}"),
            )),
        }
    }
}

impl fmt::Display for Strangeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strangeness::K0 => "k0",
            Strangeness::K0bar => "k0bar",
        })
    }
}

/// "Are you in state `quasispin` at `time`?", time in units of tau_S.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub quasispin: Quasispin,
    pub time: f64,
}

impl Measurement {
    pub fn new(quasispin: Quasispin, time: f64) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::field(
                "time",
                format!("{time} must be finite and >= 0"),
            ));
        }
        Ok(Self { quasispin, time })
    }

    pub fn strangeness(q: Strangeness, time: f64) -> Result<Self> {
        Self::new(q.quasispin(), time)
    }
}
