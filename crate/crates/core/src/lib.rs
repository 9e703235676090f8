//! Product-matrix regenerating codes over prime fields, with error
//! correction chosen per repair or read and optional secrecy against
//! eavesdroppers.

pub mod algebra;
pub mod audit;
pub mod cluster;
pub mod code;
pub mod error;
pub mod mbr;
pub mod mds;
pub mod msr;
pub mod sharefile;

#[cfg(test)]
mod testutil;

pub use algebra::{EncodingMatrix, Fe, Flavor, Matrix, PrimeField};
pub use code::{node_forms, Code, CodeSpec, HelperData, Regime, RegeneratingCode, Share};
pub use error::{Error, Result};
pub use mbr::{MbrCode, MbrParams};
pub use mds::{Detection, MdsDecoder, Observation};
pub use msr::{MsrCode, MsrParams};
pub use audit::{Leakage, ViewSpec};
pub use cluster::{ClusterState, Event, SimulationConfig};
