macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(error_extremes, "error_extremes.rs");
example!(map_policy, "map_policy.rs");
example!(canonical_form, "canonical_form.rs");
example!(bias_sweep, "bias_sweep.rs");
example!(gain_convergence, "gain_convergence.rs");
example!(binomial_identities, "binomial_identities.rs");
example!(error_histogram, "error_histogram.rs");
example!(monte_carlo, "monte_carlo.rs");

#[test]
fn examples_run() {
    error_extremes::run_example().unwrap();
    map_policy::run_example().unwrap();
    canonical_form::run_example().unwrap();
    bias_sweep::run_example().unwrap();
    gain_convergence::run_example().unwrap();
    binomial_identities::run_example().unwrap();
    error_histogram::run_example().unwrap();
    monte_carlo::run_example().unwrap();
}
