//! How late can Alice's first measurement be? Scan t_n with the other times
//! fixed and locate where the violation disappears.

use kaon_bell::{
    psi_minus, time_scan, BellSetting, PhysicalConstants, ScanAxis, TimeSlot, TwoQubitState,
};

fn main() -> kaon_bell::Result<()> {
    let rho = TwoQubitState::pure(&psi_minus())?;
    let c = PhysicalConstants::pdg();
    let scan = time_scan(
        &BellSetting::reference(),
        &ScanAxis::single(TimeSlot::N),
        0.0,
        1.6,
        0.02,
        &rho,
        &c,
    )?;

    for p in scan.points.iter().step_by(10) {
        println!(
            "t_n = {:5.2}  S = {:+.4}  min S_sep = {:+.4}  delta = {:+.5}",
            p.t, p.s_state, p.s_sep_min, p.delta_min
        );
    }
    println!("zero crossings: {:?}", scan.zero_crossings());

    if let Some(path) = std::env::args().nth(1) {
        scan.write_csv(path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
