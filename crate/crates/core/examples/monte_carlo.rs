// Seeded simulation of the MAP rule and a naive rule on common draws.

use biasfusion::{
    exact_error_probability, make_unbiased_system, simulate_policy_comparison, DecisionPolicy, Prior, SimConfig,
};

pub fn run_example() -> biasfusion::Result<()> {
    let system = make_unbiased_system(5, Prior::new(0.6)?, 0.3)?;
    let config = SimConfig::new(system.clone(), 200_000, 42)?;
    let policies = [DecisionPolicy::map(&system), DecisionPolicy::constant(&system, 0)?];
    let results = simulate_policy_comparison(&config, &policies)?;

    println!("exact MAP error {:.5}", exact_error_probability(&system)?.p_error);
    for (name, r) in ["map", "always 0"].iter().zip(&results) {
        println!(
            "{name:9} {:.5} +- {:.5}  {}",
            r.empirical_error,
            r.std_error,
            r.to_json()?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> biasfusion::Result<()> {
    run_example()
}
