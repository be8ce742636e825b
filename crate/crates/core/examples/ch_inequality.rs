//! The Clauser-Horne form built from Yes-probabilities. It carries the same
//! information as the CHSH form: S = 4 CH + 2 for every state.

use kaon_bell::{ch_function, psi_minus, violation, BellSetting, PhysicalConstants, TwoQubitState};

fn main() -> kaon_bell::Result<()> {
    let rho = TwoQubitState::pure(&psi_minus())?;
    let c = PhysicalConstants::pdg();
    let s = BellSetting::reference();

    let ch = ch_function(&s, &rho, &c)?;
    let w = violation(&s, &rho, &c)?;
    println!(
        "CH = {:+.5}, separable range [{:+.5}, {:+.5}]",
        ch.ch, ch.sep_min, ch.sep_max
    );
    println!(
        "4 CH + 2 = {:+.5}   S = {:+.5}",
        4.0 * ch.ch + 2.0,
        w.s_state
    );
    println!(
        "4 min_CH + 2 = {:+.5}   min S_sep = {:+.5}",
        4.0 * ch.sep_min + 2.0,
        w.s_sep_min
    );
    Ok(())
}
