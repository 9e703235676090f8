use crate::algebra::Fe;
use crate::code::{node_forms, RegeneratingCode};

/// Per node, per stored symbol: coefficients over (message ++ randomness).
pub fn coefficients<C: RegeneratingCode>(code: &C) -> Vec<Vec<Vec<u64>>> {
    node_forms(code).unwrap().iter().map(|m| m.to_u64_rows()).collect()
}

pub fn corrupt(x: &mut Fe, delta: u64) {
    *x += x.field().elem(delta);
}
