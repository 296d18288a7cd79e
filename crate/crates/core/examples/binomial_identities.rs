// Exact big-integer check of the central-binomial inequality and product identity.

use biasfusion::claim1_check;
use biasfusion::gains::binomial;

pub fn run_example() -> biasfusion::Result<()> {
    for m in [1, 2, 10, 64] {
        let c = claim1_check(m)?;
        println!(
            "m = {m:2}: C(2m, m) = {}, inequality {}, identity {}",
            binomial(2 * m, m),
            c.inequality,
            c.identity
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> biasfusion::Result<()> {
    run_example()
}
