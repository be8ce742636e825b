//! Generalized CHSH Bell inequality for entangled, decaying neutral-kaon pairs.
//!
//! Questions of the form "are you in the quasispin state |k> at time t, or
//! not?" become effective 2x2 observables in the Heisenberg picture. The
//! S-function built from them is compared with its extrema over separable
//! initial states; a value below the separable minimum certifies
//! nonlocality even though decay distorts the usual bound of 2.

pub mod cli;
pub mod constants;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod mc;
pub mod nelder_mead;
pub mod observable;
pub mod output;
pub mod quasispin;
pub mod scan;
pub mod search;
pub mod witness;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use mc::{estimate_s, generate_events, McConfig};
pub use observable::{
    correlation, effective_observable, oracle_correlation, oracle_joint_probs, psi_minus,
    EffectiveObservable, JointProbs, TwoQubitState,
};
pub use quasispin::{Measurement, Quasispin, Strangeness};
pub use scan::{time_scan, ScanAxis, ScanResult, TimeSlot};
pub use search::{optimize_chsh, optimize_times};
pub use witness::{
    ch_function, product_state, s_function, separable_extrema, violation, BellSetting, ChResult,
    SeparableExtrema, WitnessResult,
};
