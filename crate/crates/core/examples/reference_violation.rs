//! The textbook witness check: K0bar questions at t_n = 0, t_m = t_n' = 1.34,
//! t_m' = 2.80 (units of the K_S lifetime) on the antisymmetric state.

use kaon_bell::{psi_minus, violation, BellSetting, PhysicalConstants, TwoQubitState};

fn main() -> kaon_bell::Result<()> {
    let rho = TwoQubitState::pure(&psi_minus())?;
    let setting = BellSetting::reference();

    for (label, c) in [
        ("pdg", PhysicalConstants::pdg()),
        ("calibrated", PhysicalConstants::calibrated()),
        ("cp-conserving", PhysicalConstants::pdg().cp_conserving()),
    ] {
        let w = violation(&setting, &rho, &c)?;
        println!(
            "{label:>13}: S = {:+.4}  min S_sep = {:+.4}  max S_sep = {:+.4}  delta = {:+.4}",
            w.s_state, w.s_sep_min, w.s_sep_max, w.delta_min
        );
    }

    let w = violation(&setting, &rho, &PhysicalConstants::pdg())?;
    let a = w.argmin;
    println!(
        "separable minimizer: |a> at (theta, phi) = ({:.3}, {:.3}), |b> at ({:.3}, {:.3})",
        a.theta_a, a.phi_a, a.theta_b, a.phi_b
    );
    Ok(())
}
