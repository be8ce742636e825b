//! Multi-start search over the four measurement times for the strongest
//! violation inside a time box.

use kaon_bell::{optimize_times, psi_minus, PhysicalConstants, Strangeness, TwoQubitState};

fn main() -> kaon_bell::Result<()> {
    let t_max: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("t_max"))
        .unwrap_or(5.0);
    let rho = TwoQubitState::pure(&psi_minus())?;
    let c = PhysicalConstants::pdg();

    let r = optimize_times(Strangeness::K0bar, t_max, &rho, &c)?;
    let t = r.setting.times();
    println!("box [0, {t_max}]^4");
    println!(
        "best times (t_n, t_m, t_n', t_m') = ({:.3}, {:.3}, {:.3}, {:.3})",
        t[0], t[1], t[2], t[3]
    );
    println!(
        "S = {:+.4}, min S_sep = {:+.4}, delta = {:+.4}",
        r.witness.s_state, r.witness.s_sep_min, r.witness.delta_min
    );
    for d in &r.restarts {
        println!(
            "  restart from {:?}: {:+.5} after {} evaluations",
            d.start.map(|x| (x * 100.0).round() / 100.0),
            d.value,
            d.evals
        );
    }
    Ok(())
}
