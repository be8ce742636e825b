#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use kaon_bell::linalg::ComplexVec2;
use kaon_bell::{BellSetting, Measurement, PhysicalConstants, Quasispin};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the Bloch sphere.
pub fn random_quasispin(r: &mut ChaCha8Rng) -> Quasispin {
    let theta = (1.0 - 2.0 * r.random::<f64>()).clamp(-1.0, 1.0).acos();
    Quasispin {
        theta: theta.min(PI),
        phi: TAU * r.random::<f64>(),
    }
}

pub fn random_ket(r: &mut ChaCha8Rng) -> ComplexVec2 {
    random_quasispin(r).ket()
}

pub fn random_measurement(r: &mut ChaCha8Rng, t_max: f64) -> Measurement {
    Measurement::new(random_quasispin(r), t_max * r.random::<f64>()).unwrap()
}

pub fn random_setting(r: &mut ChaCha8Rng, t_max: f64) -> BellSetting {
    BellSetting::new(
        random_measurement(r, t_max),
        random_measurement(r, t_max),
        random_measurement(r, t_max),
        random_measurement(r, t_max),
    )
}

pub fn cp_conserving() -> PhysicalConstants {
    PhysicalConstants::pdg().cp_conserving()
}
