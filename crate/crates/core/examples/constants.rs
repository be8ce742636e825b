//! Constant sets, overrides from JSON, and their fingerprints.

use kaon_bell::PhysicalConstants;

fn main() -> kaon_bell::Result<()> {
    let pdg = PhysicalConstants::pdg();
    println!("pdg        {pdg}  [{}]", pdg.fingerprint());
    let cal = PhysicalConstants::calibrated();
    println!("calibrated {cal}  [{}]", cal.fingerprint());

    let custom = PhysicalConstants::from_json_str(r#"{"eps_re": 2.0e-3, "eps_im": 1.5e-3}"#)?;
    println!("custom     {custom}  [{}]", custom.fingerprint());

    match PhysicalConstants::from_json_str(r#"{"gamma_s": 2.0}"#) {
        Ok(_) => unreachable!("gamma_s is the unit of rates"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
