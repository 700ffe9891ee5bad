//! Coded blockchain sharding over exact finite fields.
//!
//! Shards are mixed with Lagrange polynomials so that every node stores one
//! coded sub-chain, verifies proposals directly on coded data, and recovers
//! every shard's verification result through Reed-Solomon decoding even
//! when a fraction of the nodes broadcast garbage. Full replication and
//! uncoded sharding are provided as baselines, together with an iterative
//! variant for layered arithmetic circuits.
//!
//! ```
//! use polyshard::schemes::{capacity, Mu, SchemeKind};
//!
//! let report = capacity(SchemeKind::PolyShard, 30, 3, Mu::from_integer(0), 1).unwrap();
//! assert_eq!(report.beta, 13);
//! ```

pub mod adversary;
pub mod circuit;
pub mod field;
pub mod ledger;
pub mod poly;
pub mod schemes;
pub mod sim;

pub use field::{BinaryField, Field, FieldElement, FieldSpec, Fp, Gf2m, PrimeField};
pub use schemes::{Mu, Scheme, SchemeKind};
pub use sim::{run, RunConfig};

/// Blocks over the default prime field.
pub type PrimeBlock = ledger::Block<Fp>;
/// Blocks over a binary extension field.
pub type BinaryBlock = ledger::Block<Gf2m>;
/// A scheme over the default prime field.
pub type PrimeScheme = schemes::Scheme<Fp>;
/// Node state over the default prime field.
pub type PrimeNodeState = schemes::NodeState<Fp>;
