//! Shared helpers for the integration suites.
// Each integration-test binary compiles this module and uses a subset.
#![allow(dead_code)]

use hhbvp::bvp::{compute_constants, Problem};
use hhbvp::expr::parse;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

pub fn example_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

pub fn load_problem(name: &str) -> Problem {
    let text = std::fs::read_to_string(example_path(name)).expect("example problem file");
    hhbvp::cli::parse_problem_file(&text).expect("example parses").problem
}

/// A random well-posed problem: valid ranges, non-degenerate lambda with a
/// margin so the certification constants stay well conditioned.
pub fn random_problem(rng: &mut ChaCha8Rng) -> Problem {
    loop {
        let m = rng.gen_range(1..=3usize);
        let zeta: Vec<f64> = (0..m).map(|_| rng.gen_range(1.05..2.65)).collect();
        let nu: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let sigma: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let problem = Problem::new(
            rng.gen_range(1.1..2.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.1..0.9),
            zeta,
            nu,
            sigma,
            parse("0").unwrap(),
        )
        .expect("ranges are valid by construction");
        match compute_constants(&problem) {
            Ok(c) if c.lambda.abs() > 1e-6 => return problem,
            _ => continue,
        }
    }
}
