// Distribution of the minimum error over random systems that share one error rate.

use biasfusion::experiments::error_histogram;
use biasfusion::Prior;

pub fn run_example() -> biasfusion::Result<()> {
    let h = error_histogram(5, Prior::new(0.6)?, 0.3, 2000, 1, 12)?;
    println!("floor (all S) {:.5}, unbiased {:.5}", h.fully_biased, h.unbiased);
    println!("sampled range [{:.5}, {:.5}]", h.min, h.max);
    for bin in &h.bins {
        println!(
            "[{:.4}, {:.4}) {:5} {}",
            bin.lo,
            bin.hi,
            bin.count,
            "#".repeat((bin.count / 25) as usize)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> biasfusion::Result<()> {
    run_example()
}
