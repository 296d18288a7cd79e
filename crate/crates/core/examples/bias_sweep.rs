// Error along one channel's bias with its rate held fixed; concave, so minimal at an extreme.

use biasfusion::analysis::CONCAVITY_TOL;
use biasfusion::{bias_sweep, llr_rate_constrained_derivative, OutcomeVector, SystemSpec};

pub fn run_example() -> biasfusion::Result<()> {
    let system = SystemSpec::from_params(0.6, &[0.5, 0.3, 0.2], &[0.0, 0.3, 0.45])?;
    let sweep = bias_sweep(&system, 2, 11)?;
    println!("channel 2, rate {:.3}", sweep.rate);
    for ((a, b), p) in sweep.alpha_grid.iter().zip(&sweep.beta_grid).zip(&sweep.p_error_at) {
        println!("alpha {a:.4}  beta {b:.4}  P_e {p:.6}");
    }
    println!(
        "concave: {}, minimum at an endpoint: {}, local max at alpha = {:?}",
        sweep.is_concave(CONCAVITY_TOL),
        sweep.min_at_endpoint(1e-12),
        sweep.local_max_alpha
    );

    let y = OutcomeVector::new(vec![true, false, true]);
    println!(
        "d ln(A/B) / d alpha_1 at y = 101: {:.4}",
        llr_rate_constrained_derivative(&system, 1, &y)?
    );
    sweep.write_csv(std::io::stdout())
}

#[allow(dead_code)]
fn main() -> biasfusion::Result<()> {
    run_example()
}
