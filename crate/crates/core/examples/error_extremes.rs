// Minimum error of five channels at a shared rate: all S-channels vs all unbiased.

use biasfusion::{exact_error_probability, make_fully_biased_system, make_unbiased_system, Prior, RateVector};

pub fn run_example() -> biasfusion::Result<()> {
    let prior = Prior::new(0.6)?;
    let fully = make_fully_biased_system(prior, &RateVector::uniform(5, 0.3)?)?;
    let unbiased = make_unbiased_system(5, prior, 0.3)?;

    let pf = exact_error_probability(&fully)?;
    let pu = exact_error_probability(&unbiased)?;
    println!("fully biased: {:.5} ({})", pf.p_error, pf.method);
    println!("unbiased:     {:.5} ({})", pu.p_error, pu.method);
    println!("ratio:        {:.3}", pu.p_error / pf.p_error);
    Ok(())
}

#[allow(dead_code)]
fn main() -> biasfusion::Result<()> {
    run_example()
}
