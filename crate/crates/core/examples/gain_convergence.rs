// Exponential gain of fully-biased over unbiased channels: bounds, exact values and the limiting rate.

use biasfusion::gains::write_convergence_csv;
use biasfusion::{convergence_table, exact_gain_ratio, gain_bounds, Prior};

pub fn run_example() -> biasfusion::Result<()> {
    let prior = Prior::new(0.6)?;
    for n in [2, 4, 8, 16] {
        let g = gain_bounds(n, &prior, 0.3)?;
        let ratio = exact_gain_ratio(n, &prior, 0.3)?;
        println!(
            "n = {n:2}: ln gain {:8.4} in [{:8.4}, {:8.4}], ratio {:.1}",
            g.exact_log_gain, g.log_gain_lower, g.log_gain_upper, ratio.ratio
        );
    }
    let rows = convergence_table(&prior, 0.3, &[25, 50, 100, 200, 400])?;
    write_convergence_csv(&rows, std::io::stdout())
}

#[allow(dead_code)]
fn main() -> biasfusion::Result<()> {
    run_example()
}
