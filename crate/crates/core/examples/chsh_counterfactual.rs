//! The plain CHSH bound |S| <= 2 for strangeness questions: never exceeded
//! with the physical oscillation-to-decay ratio. How much faster would the
//! oscillation have to be?

use kaon_bell::scan::scan_grid;
use kaon_bell::search::chsh_extreme_on_grid;
use kaon_bell::{optimize_chsh, psi_minus, PhysicalConstants, Strangeness, TwoQubitState};

fn main() -> kaon_bell::Result<()> {
    let rho = TwoQubitState::pure(&psi_minus())?;
    let pdg = PhysicalConstants::pdg();
    let grid = scan_grid(0.0, 10.0, 0.25)?;

    for factor in [1.0, 2.0, 2.5, 3.0, 4.0] {
        let c = pdg.with_delta_m(factor * pdg.delta_m())?;
        let on_grid = chsh_extreme_on_grid(Strangeness::K0bar, &grid, &rho, &c)?;
        let refined = optimize_chsh(Strangeness::K0bar, 10.0, &rho, &c)?;
        let best = if refined.max_abs_s > on_grid.max_abs_s {
            refined
        } else {
            on_grid
        };
        println!(
            "delta_m x {factor:.1}: max |S| = {:.6} at times {:?}",
            best.max_abs_s,
            best.times.map(|t| (t * 1000.0).round() / 1000.0)
        );
    }
    Ok(())
}
