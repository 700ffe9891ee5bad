//! Verification schemes: full replication, uncoded sharding, PolyShard and
//! iterative PolyShard.
//!
//! Each scheme is split into the four node-local roles of the protocol:
//! [`Scheme::init`] builds per-node storage, [`Scheme::compute`] produces a
//! node's broadcast, [`Scheme::decode`] turns all broadcasts into per-shard
//! verdicts, and [`Scheme::update`] appends the verified epoch to storage.
//! Every method takes the field by reference so callers can pass a
//! [`Counted`](crate::field::Counted) wrapper per node.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{ArithmeticCircuit, CircuitError, CircuitLayer};
use crate::field::Field;
use crate::ledger::{finalize, verify_balance, Block, LedgerError, SubChain, VerificationFn};
use crate::poly::{decode_vectors, encode_vectors, lagrange_table, EvaluationGrid, PolyError};

/// Corrupted fraction of the network, kept exact.
pub type Mu = Ratio<i64>;

/// A node broadcast: one or more vectors of field elements.
pub type Message<E> = Vec<Vec<E>>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("corrupted fraction {0} must lie in [0, 1/2)")]
    InvalidMu(Mu),
    #[error("verification degree must be at least 1")]
    ZeroDegree,
    #[error("need at least one shard and one node (got K={shards}, N={nodes})")]
    Empty { shards: usize, nodes: usize },
    #[error("uncoded sharding needs K={shards} to divide N={nodes}")]
    NotDivisible { nodes: usize, shards: usize },
    #[error(
        "{kind} supports at most {k_max} shards for N={nodes}, mu={mu}, d={degree}; got K={shards}"
    )]
    TooManyShards {
        kind: SchemeKind,
        nodes: usize,
        shards: usize,
        mu: Mu,
        degree: u32,
        k_max: usize,
    },
    #[error("iterative PolyShard needs a circuit verification function")]
    RequiresCircuit,
    #[error("expected {expected} {what}, got {actual}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("node state does not match scheme {0}")]
    StateMismatch(SchemeKind),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    FullReplication,
    UncodedSharding,
    #[serde(rename = "polyshard", alias = "poly-shard")]
    PolyShard,
    #[serde(rename = "iterative-polyshard", alias = "iterative-poly-shard")]
    IterativePolyShard,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::FullReplication,
        SchemeKind::UncodedSharding,
        SchemeKind::PolyShard,
        SchemeKind::IterativePolyShard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::FullReplication => "full-replication",
            SchemeKind::UncodedSharding => "uncoded-sharding",
            SchemeKind::PolyShard => "polyshard",
            SchemeKind::IterativePolyShard => "iterative-polyshard",
        }
    }

    pub fn is_coded(self) -> bool {
        matches!(self, SchemeKind::PolyShard | SchemeKind::IterativePolyShard)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "full-replication" | "full" => Ok(SchemeKind::FullReplication),
            "uncoded-sharding" | "sharding" => Ok(SchemeKind::UncodedSharding),
            "polyshard" | "poly-shard" => Ok(SchemeKind::PolyShard),
            "iterative-polyshard" | "iterative-poly-shard" | "iterative" => {
                Ok(SchemeKind::IterativePolyShard)
            }
            _ => Err(format!("unknown scheme `{s}`")),
        }
    }
}

/// Closed-form shard capacity, security level and storage efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CapacityReport {
    /// Largest securely supported K; `None` when unbounded.
    pub k_max: Option<usize>,
    pub beta: usize,
    pub gamma: usize,
}

fn floor_ratio(r: Ratio<i64>) -> i64 {
    r.floor().to_integer()
}

/// `floor(((1 - 2mu) N - 1) / d + 1)`, clamped at zero.
pub fn polyshard_k_max(nodes: usize, mu: Mu, degree: u32) -> usize {
    let honest = (Ratio::from_integer(1) - mu * 2) * nodes as i64;
    let k = (honest - 1) / degree as i64 + 1;
    floor_ratio(k).max(0) as usize
}

/// `floor(((1 - 2mu) N + 1) / 2)`, clamped at zero.
pub fn iterative_k_max(nodes: usize, mu: Mu) -> usize {
    let honest = (Ratio::from_integer(1) - mu * 2) * nodes as i64;
    floor_ratio((honest + 1) / 2).max(0) as usize
}

/// Errors tolerated when decoding dimension `dim` from `nodes` symbols.
fn coded_beta(nodes: usize, dim: usize) -> usize {
    nodes.saturating_sub(dim) / 2
}

pub fn check_mu(mu: Mu) -> Result<(), SchemeError> {
    if mu < Ratio::from_integer(0) || mu * 2 >= Ratio::from_integer(1) {
        return Err(SchemeError::InvalidMu(mu));
    }
    Ok(())
}

/// Capacity formulas for `kind` with `nodes` nodes and `shards` shards.
///
/// Full replication tolerates `floor(N / 2)` random-value liars under a
/// plurality vote; sharding tolerates `floor((q - 1) / 2)` per shard with
/// `q = N / K`; the coded schemes tolerate half the redundancy of a code of
/// dimension `(K - 1) d + 1` (or `2 (K - 1) + 1` when iterated).
pub fn capacity(
    kind: SchemeKind,
    nodes: usize,
    shards: usize,
    mu: Mu,
    degree: u32,
) -> Result<CapacityReport, SchemeError> {
    check_mu(mu)?;
    if degree == 0 {
        return Err(SchemeError::ZeroDegree);
    }
    if nodes == 0 || shards == 0 {
        return Err(SchemeError::Empty { shards, nodes });
    }
    Ok(match kind {
        SchemeKind::FullReplication => CapacityReport {
            k_max: None,
            beta: nodes / 2,
            gamma: 1,
        },
        SchemeKind::UncodedSharding => {
            if !nodes.is_multiple_of(shards) {
                return Err(SchemeError::NotDivisible { nodes, shards });
            }
            CapacityReport {
                k_max: Some(nodes),
                beta: (nodes / shards).saturating_sub(1) / 2,
                gamma: shards,
            }
        }
        SchemeKind::PolyShard => CapacityReport {
            k_max: Some(polyshard_k_max(nodes, mu, degree)),
            beta: coded_beta(nodes, (shards - 1) * degree as usize + 1),
            gamma: shards,
        },
        SchemeKind::IterativePolyShard => CapacityReport {
            k_max: Some(iterative_k_max(nodes, mu)),
            beta: coded_beta(nodes, 2 * (shards - 1) + 1),
            gamma: shards,
        },
    })
}

/// A Lagrange-coded sub-chain: entry `m` is `sum_k l_ik Y_k(m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedSubChain<E> {
    pub blocks: Vec<Block<E>>,
}

impl<E: Copy> CodedSubChain<E> {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(Block::size).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Storage<E> {
    Full(Vec<SubChain<E>>),
    Shard(SubChain<E>),
    Coded(CodedSubChain<E>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState<E> {
    pub node: usize,
    pub storage: Storage<E>,
    /// Coded proposal of the current epoch, reused by `update`.
    pending: Option<Block<E>>,
    /// Coded layer input of the current iterative round.
    layer_input: Vec<E>,
}

impl<E: Copy> NodeState<E> {
    /// Stored field elements.
    pub fn stored_elements(&self) -> usize {
        match &self.storage {
            Storage::Full(chains) => chains.iter().map(SubChain::size).sum(),
            Storage::Shard(chain) => chain.size(),
            Storage::Coded(chain) => chain.size(),
        }
    }

    pub fn epochs(&self) -> usize {
        match &self.storage {
            Storage::Full(chains) => chains.first().map_or(0, SubChain::len),
            Storage::Shard(chain) => chain.len(),
            Storage::Coded(chain) => chain.len(),
        }
    }

    pub fn coded_chain(&self) -> Option<&CodedSubChain<E>> {
        match &self.storage {
            Storage::Coded(c) => Some(c),
            _ => None,
        }
    }
}

/// One decoded shard result.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShardVerdict<E> {
    /// `None` when a vote had no unique winner.
    pub output: Option<Vec<E>>,
    pub accepted: bool,
}

/// Unique most frequent value, if any.
pub fn plurality<'a, E: Eq + std::hash::Hash + 'a>(
    values: impl IntoIterator<Item = &'a [E]>,
) -> Option<&'a [E]> {
    let mut counts: HashMap<&[E], usize> = HashMap::new();
    let mut order: Vec<&[E]> = Vec::new();
    for v in values {
        let c = counts.entry(v).or_insert(0);
        if *c == 0 {
            order.push(v);
        }
        *c += 1;
    }
    let best = order.iter().map(|v| counts[v]).max()?;
    let mut winners = order.into_iter().filter(|v| counts[v] == best);
    let first = winners.next();
    if winners.next().is_some() {
        None
    } else {
        first
    }
}

/// Seeded combination weights for the vector decoder.
pub fn decode_weights<F: Field>(field: &F, seed: u64, len: usize) -> Vec<F::Elem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| field.random(&mut rng)).collect()
}

/// Static description of a running scheme: parameters, grid and the
/// Lagrange coefficient table.
#[derive(Debug, Clone)]
pub struct Scheme<E> {
    kind: SchemeKind,
    nodes: usize,
    shards: usize,
    mu: Mu,
    vf: VerificationFn,
    report: CapacityReport,
    grid: Option<EvaluationGrid<E>>,
    /// `coeffs[i][k] = l_ik`.
    coeffs: Vec<Vec<E>>,
}

impl<E: Copy + Eq + std::hash::Hash + fmt::Debug + Send + Sync + 'static> Scheme<E> {
    /// Validates the capacity constraints and builds the grid.
    pub fn new<F: Field<Elem = E>>(
        field: &F,
        kind: SchemeKind,
        nodes: usize,
        shards: usize,
        mu: Mu,
        vf: VerificationFn,
    ) -> Result<Self, SchemeError> {
        let degree = vf.degree();
        let report = capacity(kind, nodes, shards, mu, degree)?;
        if kind == SchemeKind::IterativePolyShard && vf.as_circuit().is_none() {
            return Err(SchemeError::RequiresCircuit);
        }
        if let Some(k_max) = report.k_max {
            if shards > k_max {
                return Err(SchemeError::TooManyShards {
                    kind,
                    nodes,
                    shards,
                    mu,
                    degree,
                    k_max,
                });
            }
        }
        let (grid, coeffs) = if kind.is_coded() {
            let grid = EvaluationGrid::standard(field, shards, nodes)?;
            let coeffs = lagrange_table(field, &grid)?;
            (Some(grid), coeffs)
        } else {
            (None, Vec::new())
        };
        Ok(Scheme {
            kind,
            nodes,
            shards,
            mu,
            vf,
            report,
            grid,
            coeffs,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn shards(&self) -> usize {
        self.shards
    }

    pub fn mu(&self) -> Mu {
        self.mu
    }

    pub fn verification(&self) -> &VerificationFn {
        &self.vf
    }

    pub fn capacity(&self) -> CapacityReport {
        self.report
    }

    pub fn grid(&self) -> Option<&EvaluationGrid<E>> {
        self.grid.as_ref()
    }

    /// The `N x K` Lagrange table; empty for uncoded kinds.
    pub fn coefficient_table(&self) -> &[Vec<E>] {
        &self.coeffs
    }

    /// Nodes per shard under uncoded sharding.
    pub fn shard_size(&self) -> usize {
        self.nodes / self.shards
    }

    /// Shard held by `node` under uncoded sharding: one-based node `i`
    /// stores shard `ceil(i / q)`.
    pub fn assignment(&self, node: usize) -> Option<usize> {
        (self.kind == SchemeKind::UncodedSharding).then(|| node / self.shard_size())
    }

    /// Nodes storing `shard` under uncoded sharding.
    pub fn members(&self, shard: usize) -> std::ops::Range<usize> {
        let q = self.shard_size();
        shard * q..(shard + 1) * q
    }

    /// Decoding dimension of the coded kinds.
    pub fn decode_dim(&self) -> usize {
        match self.kind {
            SchemeKind::PolyShard => (self.shards - 1) * self.vf.degree() as usize + 1,
            SchemeKind::IterativePolyShard => 2 * (self.shards - 1) + 1,
            _ => 1,
        }
    }

    fn circuit(&self) -> Result<&ArithmeticCircuit, SchemeError> {
        self.vf.as_circuit().ok_or(SchemeError::RequiresCircuit)
    }

    fn expect_shards<T>(&self, what: &'static str, items: &[T]) -> Result<(), SchemeError> {
        if items.len() != self.shards {
            return Err(SchemeError::Shape {
                what,
                expected: self.shards,
                actual: items.len(),
            });
        }
        Ok(())
    }

    fn encode_block<F: Field<Elem = E>>(
        &self,
        field: &F,
        node: usize,
        blocks: &[&Block<E>],
    ) -> Result<Block<E>, SchemeError> {
        let coeffs = &self.coeffs[node];
        let sends: Vec<&[E]> = blocks.iter().map(|b| b.send.as_slice()).collect();
        let receives: Vec<&[E]> = blocks.iter().map(|b| b.receive.as_slice()).collect();
        Ok(Block {
            send: encode_vectors(field, coeffs, &sends)?,
            receive: encode_vectors(field, coeffs, &receives)?,
        })
    }

    /// Per-node storage after the genesis epoch.
    pub fn init<F: Field<Elem = E>>(
        &self,
        field: &F,
        genesis: &[Block<E>],
    ) -> Result<Vec<NodeState<E>>, SchemeError> {
        self.expect_shards("genesis blocks", genesis)?;
        (0..self.nodes)
            .map(|node| {
                let storage = match self.kind {
                    SchemeKind::FullReplication => Storage::Full(
                        genesis
                            .iter()
                            .enumerate()
                            .map(|(k, b)| SubChain::with_blocks(k, vec![b.clone()]))
                            .collect(),
                    ),
                    SchemeKind::UncodedSharding => {
                        let k = node / self.shard_size();
                        Storage::Shard(SubChain::with_blocks(k, vec![genesis[k].clone()]))
                    }
                    SchemeKind::PolyShard | SchemeKind::IterativePolyShard => {
                        let refs: Vec<&Block<E>> = genesis.iter().collect();
                        Storage::Coded(CodedSubChain {
                            blocks: vec![self.encode_block(field, node, &refs)?],
                        })
                    }
                };
                Ok(NodeState {
                    node,
                    storage,
                    pending: None,
                    layer_input: Vec::new(),
                })
            })
            .collect()
    }

    /// The node's broadcast for this epoch. For iterative PolyShard this is
    /// the first layer's message; later layers come from [`Scheme::advance_layer`].
    pub fn compute<F: Field<Elem = E>>(
        &self,
        field: &F,
        state: &mut NodeState<E>,
        proposals: &[Block<E>],
    ) -> Result<Message<E>, SchemeError> {
        self.expect_shards("proposals", proposals)?;
        match (&state.storage, self.kind) {
            (Storage::Full(chains), SchemeKind::FullReplication) => proposals
                .iter()
                .zip(chains)
                .map(|(p, c)| Ok(self.vf.evaluate(field, p, c.blocks())?))
                .collect(),
            (Storage::Shard(chain), SchemeKind::UncodedSharding) => Ok(vec![self.vf.evaluate(
                field,
                &proposals[chain.shard()],
                chain.blocks(),
            )?]),
            (Storage::Coded(chain), SchemeKind::PolyShard) => {
                let refs: Vec<&Block<E>> = proposals.iter().collect();
                let coded = self.encode_block(field, state.node, &refs)?;
                let out = self.vf.evaluate(field, &coded, &chain.blocks)?;
                state.pending = Some(coded);
                Ok(vec![out])
            }
            (Storage::Coded(chain), SchemeKind::IterativePolyShard) => {
                let refs: Vec<&Block<E>> = proposals.iter().collect();
                let coded = self.encode_block(field, state.node, &refs)?;
                let h = verify_balance(field, &coded, &chain.blocks)?;
                state.pending = Some(coded);
                let circuit = self.circuit()?;
                state.layer_input =
                    crate::ledger::window_inputs(field, &h, circuit.inputs()).concat();
                Ok(vec![layer_message(
                    field,
                    circuit.layer(1)?,
                    &state.layer_input,
                )?])
            }
            _ => Err(SchemeError::StateMismatch(self.kind)),
        }
    }

    fn expect_messages(&self, messages: &[Message<E>]) -> Result<(), SchemeError> {
        if messages.len() != self.nodes {
            return Err(SchemeError::Shape {
                what: "messages",
                expected: self.nodes,
                actual: messages.len(),
            });
        }
        Ok(())
    }

    fn verdict<F: Field<Elem = E>>(&self, field: &F, output: Option<Vec<E>>) -> ShardVerdict<E> {
        let accepted = output.as_ref().is_some_and(|h| self.vf.accept(field, h));
        ShardVerdict { output, accepted }
    }

    fn coded_decode<F: Field<Elem = E>>(
        &self,
        field: &F,
        messages: &[Message<E>],
        dim: usize,
        weights: &[E],
    ) -> Result<Vec<Vec<E>>, SchemeError> {
        let grid = self.grid.as_ref().expect("coded kinds carry a grid");
        let evals: Vec<&[E]> = messages
            .iter()
            .map(|m| m.first().map_or(&[][..], |v| v.as_slice()))
            .collect();
        let width = evals.first().map_or(0, |v| v.len());
        if weights.len() < width {
            return Err(SchemeError::Shape {
                what: "decode weights",
                expected: width,
                actual: weights.len(),
            });
        }
        let out = decode_vectors(
            field,
            grid.alphas(),
            &evals,
            dim,
            grid.omegas(),
            &weights[..width],
        )?;
        Ok(out.values)
    }

    /// Per-shard verdicts from all `N` broadcasts. For the coded kinds a
    /// decoding failure is returned as an error. `weights` must hold at
    /// least as many entries as a coded message.
    pub fn decode<F: Field<Elem = E>>(
        &self,
        field: &F,
        messages: &[Message<E>],
        weights: &[E],
    ) -> Result<Vec<ShardVerdict<E>>, SchemeError> {
        self.expect_messages(messages)?;
        match self.kind {
            SchemeKind::FullReplication => Ok((0..self.shards)
                .map(|k| {
                    let winner =
                        plurality(messages.iter().filter_map(|m| m.get(k)).map(Vec::as_slice));
                    self.verdict(field, winner.map(<[E]>::to_vec))
                })
                .collect()),
            SchemeKind::UncodedSharding => Ok((0..self.shards)
                .map(|k| {
                    let winner = plurality(
                        self.members(k)
                            .filter_map(|i| messages[i].first())
                            .map(Vec::as_slice),
                    );
                    self.verdict(field, winner.map(<[E]>::to_vec))
                })
                .collect()),
            SchemeKind::PolyShard => {
                let values = self.coded_decode(field, messages, self.decode_dim(), weights)?;
                Ok(values
                    .into_iter()
                    .map(|h| self.verdict(field, Some(h)))
                    .collect())
            }
            SchemeKind::IterativePolyShard => {
                let layers = self.circuit()?.layers().len();
                let values = self.decode_layer(field, layers, messages, weights)?;
                Ok(self.final_verdicts(field, values))
            }
        }
    }

    /// Number of circuit layers (iterative PolyShard only).
    pub fn layers(&self) -> usize {
        self.vf.as_circuit().map_or(0, |c| c.layers().len())
    }

    /// Decodes layer `layer`'s broadcasts into the per-shard layer outputs.
    pub fn decode_layer<F: Field<Elem = E>>(
        &self,
        field: &F,
        layer: usize,
        messages: &[Message<E>],
        weights: &[E],
    ) -> Result<Vec<Vec<E>>, SchemeError> {
        self.expect_messages(messages)?;
        self.circuit()?.layer(layer)?;
        self.coded_decode(field, messages, 2 * (self.shards - 1) + 1, weights)
    }

    /// Re-encodes the decoded outputs of layer `layer` at this node and
    /// evaluates layer `layer + 1` on them.
    pub fn advance_layer<F: Field<Elem = E>>(
        &self,
        field: &F,
        state: &mut NodeState<E>,
        layer: usize,
        decoded: &[Vec<E>],
    ) -> Result<Message<E>, SchemeError> {
        self.expect_shards("decoded layer outputs", decoded)?;
        let next = self.circuit()?.layer(layer + 1)?;
        state.layer_input = encode_vectors(field, &self.coeffs[state.node], decoded)?;
        Ok(vec![layer_message(field, next, &state.layer_input)?])
    }

    /// Verdicts from the last layer's decoded outputs.
    pub fn final_verdicts<F: Field<Elem = E>>(
        &self,
        field: &F,
        values: Vec<Vec<E>>,
    ) -> Vec<ShardVerdict<E>> {
        values
            .into_iter()
            .map(|h| self.verdict(field, Some(h)))
            .collect()
    }

    /// Appends the verified epoch. Coded nodes reuse the coded proposal
    /// and subtract `l_ik X_k` for every rejected shard `k`.
    pub fn update<F: Field<Elem = E>>(
        &self,
        field: &F,
        state: &mut NodeState<E>,
        proposals: &[Block<E>],
        accepted: &[bool],
    ) -> Result<(), SchemeError> {
        self.expect_shards("proposals", proposals)?;
        self.expect_shards("verdicts", accepted)?;
        let node = state.node;
        let pending = state.pending.take();
        match &mut state.storage {
            Storage::Full(chains) => {
                for ((chain, p), &e) in chains.iter_mut().zip(proposals).zip(accepted) {
                    chain.push(finalize(field, p, e));
                }
            }
            Storage::Shard(chain) => {
                let k = chain.shard();
                chain.push(finalize(field, &proposals[k], accepted[k]));
            }
            Storage::Coded(chain) => {
                let mut coded = match pending {
                    Some(b) => b,
                    None => {
                        let refs: Vec<&Block<E>> = proposals.iter().collect();
                        self.encode_block(field, node, &refs)?
                    }
                };
                for (k, p) in proposals.iter().enumerate() {
                    if !accepted[k] {
                        let minus = field.neg(self.coeffs[node][k]);
                        field.scaled_add_assign(&mut coded.send, minus, &p.send);
                        field.scaled_add_assign(&mut coded.receive, minus, &p.receive);
                    }
                }
                chain.blocks.push(coded);
            }
        }
        Ok(())
    }

    /// Re-encodes full verified sub-chains from scratch for one node.
    pub fn encode_chains<F: Field<Elem = E>>(
        &self,
        field: &F,
        node: usize,
        chains: &[SubChain<E>],
    ) -> Result<CodedSubChain<E>, SchemeError> {
        self.expect_shards("sub-chains", chains)?;
        let len = chains.first().map_or(0, SubChain::len);
        let blocks = (0..len)
            .map(|m| {
                let refs: Vec<&Block<E>> = chains.iter().map(|c| &c.blocks()[m]).collect();
                self.encode_block(field, node, &refs)
            })
            .collect::<Result<_, _>>()?;
        Ok(CodedSubChain { blocks })
    }
}

/// Evaluates every multiplication gate of `layer` on each window of
/// `input` (a concatenation of layer-input windows).
pub fn layer_message<F: Field>(
    field: &F,
    layer: &CircuitLayer,
    input: &[F::Elem],
) -> Result<Vec<F::Elem>, SchemeError> {
    let arity = layer.input_arity();
    if arity == 0 {
        return Ok(layer.eval(field, &[])?);
    }
    if input.len() % arity != 0 {
        return Err(SchemeError::Shape {
            what: "layer input entries",
            expected: input.len().div_ceil(arity) * arity,
            actual: input.len(),
        });
    }
    let mut out = Vec::with_capacity(input.len() / arity * layer.outputs());
    for window in input.chunks(arity) {
        out.extend(layer.eval(field, window)?);
    }
    Ok(out)
}

/// Runs iterative coded evaluation of `circuit` on per-shard inputs over
/// the whole network. `corrupt(layer, messages)` may overwrite broadcasts
/// before each layer is decoded. Returns the decoded per-shard outputs.
pub fn iterative_epoch<F, C>(
    field: &F,
    grid: &EvaluationGrid<F::Elem>,
    circuit: &ArithmeticCircuit,
    inputs: &[Vec<F::Elem>],
    weight_seed: u64,
    mut corrupt: C,
) -> Result<Vec<Vec<F::Elem>>, SchemeError>
where
    F: Field,
    C: FnMut(usize, &mut [Vec<F::Elem>]),
{
    let shards = grid.shards();
    if inputs.len() != shards {
        return Err(SchemeError::Shape {
            what: "shard inputs",
            expected: shards,
            actual: inputs.len(),
        });
    }
    let table = lagrange_table(field, grid)?;
    let dim = 2 * (shards - 1) + 1;
    let mut per_shard: Vec<Vec<F::Elem>> = inputs.to_vec();
    for (l, layer) in circuit.layers().iter().enumerate() {
        let mut messages = table
            .iter()
            .map(|coeffs| {
                let coded = encode_vectors(field, coeffs, &per_shard)?;
                layer_message(field, layer, &coded)
            })
            .collect::<Result<Vec<_>, SchemeError>>()?;
        corrupt(l + 1, &mut messages);
        let width = messages.first().map_or(0, Vec::len);
        let weights = decode_weights(field, weight_seed.wrapping_add(l as u64), width);
        per_shard = decode_vectors(
            field,
            grid.alphas(),
            &messages,
            dim,
            grid.omegas(),
            &weights,
        )?
        .values;
    }
    Ok(per_shard)
}
