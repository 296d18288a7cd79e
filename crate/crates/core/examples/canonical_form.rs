// Relabeling a system so that 0 is the likely source value and every channel errs at most half the time.

use biasfusion::{canonicalize, exact_error_probability, map_decide, OutcomeVector, SystemSpec};

pub fn run_example() -> biasfusion::Result<()> {
    let raw = SystemSpec::from_params(0.3, &[0.2, 0.9], &[0.35, 0.7])?;
    let canon = canonicalize(&raw);
    println!("raw:       {}", raw.to_json()?);
    println!("canonical: {}", canon.system.to_json()?);
    println!(
        "labels swapped: {}, flipped channels: {:?}",
        canon.transform.labels_swapped, canon.transform.flipped
    );

    for index in 0..1u64 << raw.n() {
        let y = OutcomeVector::from_index(index, raw.n());
        let via_canonical = canon
            .transform
            .map_decision(map_decide(&canon.system, &canon.transform.map_outcome(&y))?);
        println!(
            "y = {index:02b}: direct {}, via canonical {via_canonical}",
            map_decide(&raw, &y)?
        );
    }
    println!("minimum error: {:.6}", exact_error_probability(&canon.system)?.p_error);
    Ok(())
}

#[allow(dead_code)]
fn main() -> biasfusion::Result<()> {
    run_example()
}
