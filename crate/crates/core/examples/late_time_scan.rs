//! Violations at later times: t_n = 4.48, t_m = t_n' = 4.81 and a scan over
//! t_m', for both strangeness questions. The second pass moves t_n far out.

use kaon_bell::scan::scan_grid;
use kaon_bell::{
    psi_minus, BellSetting, PhysicalConstants, ScanAxis, Strangeness, TimeSlot, TwoQubitState,
};

fn main() -> kaon_bell::Result<()> {
    let rho = TwoQubitState::pure(&psi_minus())?;
    let c = PhysicalConstants::pdg();
    let axis = ScanAxis::single(TimeSlot::MPrime);
    let grid = scan_grid(0.0, 120.0, 0.1)?;

    for t_n in [4.48, 80.0] {
        for q in [Strangeness::K0bar, Strangeness::K0] {
            let template = BellSetting::strangeness(q, [t_n, 4.81, 4.81, 0.0])?;
            let scan = kaon_bell::scan::time_scan_at(&template, &axis, &grid, &rho, &c)?;
            let best = scan.min_delta().expect("non-empty scan");
            let span: Vec<f64> = scan.violating(1e-6).map(|p| p.t).collect();
            match (span.first(), span.last()) {
                (Some(a), Some(b)) => println!(
                    "t_n = {t_n:5.2}, {q:>5}: violation for t_m' in [{a:.1}, {b:.1}], deepest {:.3e} at {:.1}",
                    best.delta_min, best.t
                ),
                _ => println!("t_n = {t_n:5.2}, {q:>5}: no violation (min delta {:.3e})", best.delta_min),
            }
        }
    }
    Ok(())
}
