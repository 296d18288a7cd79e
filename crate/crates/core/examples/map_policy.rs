// Pointwise MAP decisions, the materialized policy table and the LLR form of the same rule.

use biasfusion::decision::llr_decide;
use biasfusion::{likelihoods, llr_weights, map_decide, policy_table, OutcomeVector, SystemSpec};

pub fn run_example() -> biasfusion::Result<()> {
    let system = SystemSpec::from_params(0.6, &[0.1, 0.3, 0.0], &[0.2, 0.1, 0.4])?;
    let weights = llr_weights(&system);
    let policy = policy_table(&system)?;

    println!("y    A(y)      B(y)      MAP  LLR");
    for index in 0..1u64 << system.n() {
        let y = OutcomeVector::from_index(index, system.n());
        let pair = likelihoods(&system, &y)?;
        let bits: String = y.bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
        println!(
            "{bits}  {:.6}  {:.6}  {}    {}",
            pair.a,
            pair.b,
            map_decide(&system, &y)?,
            llr_decide(&system, &weights, &y)?
        );
    }
    let table = policy.table().expect("materialized policy");
    println!("policy table: {}", table.to_json()?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> biasfusion::Result<()> {
    run_example()
}
