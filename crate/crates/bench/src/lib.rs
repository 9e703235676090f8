//! Fixtures shared by the benchmarks.

use pmcode_core::{Code, CodeSpec, Fe, Regime, RegeneratingCode, Share};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A code with its encoded shares and the message behind them.
pub struct Fixture {
    pub code: Code,
    pub message: Vec<Fe>,
    pub shares: Vec<Share>,
}

/// Encodes `stripes` stripes of random data.
pub fn fixture(spec: &CodeSpec, stripes: usize, seed: u64) -> Fixture {
    let code = spec.build().expect("benchmark parameters are valid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = code.field().modulus() as u64;
    let message: Vec<Fe> = (0..code.message_len() * stripes)
        .map(|_| code.field().elem(rng.gen_range(0..q)))
        .collect();
    let shares = code.encode(&message, &mut rng).expect("encoding succeeds");
    Fixture { code, message, shares }
}

/// Parameter sets used across the benchmarks, labelled for reports.
pub fn specs() -> Vec<(&'static str, CodeSpec)> {
    vec![
        ("mbr-10-4-7", CodeSpec::new(Regime::Mbr, 10, 4, 7, 65537)),
        ("msr-7-3-4", CodeSpec::new(Regime::Msr, 7, 3, 4, 65537)),
        ("msr-12-4-8", CodeSpec::new(Regime::Msr, 12, 4, 8, 65537)),
        ("msr-7-3-4-secure", CodeSpec::new(Regime::Msr, 7, 3, 4, 65537).secure(1, 1)),
    ]
}
