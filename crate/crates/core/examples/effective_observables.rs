//! What a K0bar question at time t measures on the initial state: the
//! eigenvalue lambda shrinks from 1 toward -1 as the surviving amplitude
//! decays, and the eigenvector chi rotates with the strangeness oscillation.
//! The closed form with the mass-eigenstate overlap dropped is printed next
//! to the exact Heisenberg-picture operator.

use kaon_bell::observable::{chi_state, lambda_eigenvalue};
use kaon_bell::{effective_observable, Measurement, PhysicalConstants, Strangeness};

fn main() -> kaon_bell::Result<()> {
    let c = PhysicalConstants::pdg();
    let q = Strangeness::K0bar.quasispin();
    println!("    t   lambda(exact)  lambda(closed)   |<chi_exact|chi_closed>|");
    for t in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let o = effective_observable(&Measurement::new(q, t)?, &c)?;
        let chi = chi_state(&q, t, &c)?;
        let overlap = o.chi.dotc(&chi).norm();
        println!(
            "{t:5.1}   {:+.8}    {:+.8}    {:.10}",
            o.lambda,
            lambda_eigenvalue(&q, t, &c),
            overlap
        );
    }
    Ok(())
}
