//! Epoch-driven simulation with per-node operation counting.
//!
//! Throughput is computed from field-operation counts rather than wall
//! time: encoding is booked under compute, Reed-Solomon decoding and
//! votes under decode, chain appends under update.
//!
//! With `memoize` set, nodes whose storage is identical (all nodes under
//! full replication, the members of one shard under uncoded sharding)
//! share one stored copy and one computation, and since every node decodes
//! the same broadcasts, decoding runs once; the resulting counts are booked
//! to every node exactly as if each had done the work itself.

use std::collections::BTreeSet;
use std::time::Instant;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::{corrupt_all, AdversaryError, AdversarySpec, Strategy};
use crate::field::{Counted, Field, FieldError, FieldSpec, PrimeField};
use crate::ledger::{
    finalize, gen_workload_with_mint, Block, LedgerError, SubChain, VerificationFn, Workload,
    DEFAULT_MINT,
};
use crate::poly::PolyError;
use crate::schemes::{
    decode_weights, Message, Mu, NodeState, Scheme, SchemeError, SchemeKind, ShardVerdict,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("simulation needs a prime field for signed balances, got {0}")]
    UnsupportedField(FieldSpec),
    #[error("honest nodes disagree at epoch {epoch}")]
    Disagreement { epoch: usize },
    #[error("{violations} wrong shard results at epoch {epoch} with {corrupted} corrupted nodes, within the security level {beta}")]
    WithinBudget {
        epoch: usize,
        violations: usize,
        corrupted: usize,
        beta: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub nodes: usize,
    pub shards: usize,
    pub verification: VerificationFn,
    pub field: FieldSpec,
    pub accounts: usize,
    pub epochs: usize,
    pub seed: u64,
    pub invalid_rate: f64,
    pub initial_balance: u64,
    /// Corruption fraction, strategy and seed; its `mu` also drives the
    /// capacity check.
    pub adversary: AdversarySpec,
    pub memoize: bool,
    pub parallel: bool,
    /// Fail on wrong results while the corrupted count is within `beta`.
    pub strict: bool,
    /// Record wall-clock milliseconds (otherwise zero, keeping output
    /// byte-identical across runs).
    pub wall_clock: bool,
}

impl RunConfig {
    pub fn new(scheme: SchemeKind, nodes: usize, shards: usize) -> Self {
        RunConfig {
            scheme,
            nodes,
            shards,
            verification: VerificationFn::Balance,
            field: FieldSpec::default(),
            accounts: 200,
            epochs: 200,
            seed: 0,
            invalid_rate: 0.0,
            initial_balance: DEFAULT_MINT,
            adversary: AdversarySpec::honest(),
            memoize: true,
            parallel: true,
            strict: true,
            wall_clock: false,
        }
    }

    pub fn mu(&self) -> Mu {
        self.adversary.mu
    }
}

/// Per-epoch metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsRecord {
    /// One-based epoch.
    pub epoch: usize,
    pub c_rho: Vec<u64>,
    pub c_psi: Vec<u64>,
    pub c_chi: Vec<u64>,
    /// Cost of one uncoded verification of shard 0.
    pub c_f: u64,
    pub shards: usize,
    pub nodes: usize,
    pub gamma: Ratio<u64>,
    pub beta: usize,
    pub corrupted: usize,
    pub violations: usize,
    pub decode_failure: bool,
    pub wall_ms: u64,
}

impl MetricsRecord {
    pub fn c_rho_total(&self) -> u64 {
        self.c_rho.iter().sum()
    }

    pub fn c_psi_total(&self) -> u64 {
        self.c_psi.iter().sum()
    }

    pub fn c_chi_total(&self) -> u64 {
        self.c_chi.iter().sum()
    }

    pub fn total_cost(&self) -> u64 {
        self.c_rho_total() + self.c_psi_total() + self.c_chi_total()
    }

    /// `K N c(f) / sum_i (c(rho_i) + c(psi_i) + c(chi_i))`; `None` when
    /// either side is zero.
    pub fn lambda(&self) -> Option<Ratio<u128>> {
        let total = self.total_cost() as u128;
        if total == 0 || self.c_f == 0 {
            return None;
        }
        Some(Ratio::new(
            self.shards as u128 * self.nodes as u128 * self.c_f as u128,
            total,
        ))
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda()
            .map_or(f64::NAN, |r| *r.numer() as f64 / *r.denom() as f64)
    }

    pub fn row(&self, run_id: &str, scheme: SchemeKind, mu: Mu) -> CsvRow {
        CsvRow {
            run_id: run_id.to_string(),
            scheme: scheme.name().to_string(),
            n: self.nodes,
            k: self.shards,
            mu: mu.to_string(),
            t: self.epoch,
            c_rho_total: self.c_rho_total(),
            c_psi_total: self.c_psi_total(),
            c_chi_total: self.c_chi_total(),
            c_f: self.c_f,
            lambda: self.lambda_f64(),
            gamma: self.gamma.to_string(),
            beta: self.beta,
            violations: self.violations,
            wall_ms: self.wall_ms,
        }
    }
}

/// One per-epoch CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CsvRow {
    pub run_id: String,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub mu: String,
    pub t: usize,
    pub c_rho_total: u64,
    pub c_psi_total: u64,
    pub c_chi_total: u64,
    pub c_f: u64,
    pub lambda: f64,
    pub gamma: String,
    pub beta: usize,
    pub violations: usize,
    pub wall_ms: u64,
}

/// Mean of `lambda` over the last `ceil(10%)` of the records.
pub fn tail_lambda(records: &[MetricsRecord]) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let tail = records.len().div_ceil(10);
    let vals: Vec<f64> = records[records.len() - tail..]
        .iter()
        .map(MetricsRecord::lambda_f64)
        .collect();
    Some(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Exact per-epoch throughputs.
pub fn throughput(records: &[MetricsRecord]) -> Vec<Option<Ratio<u128>>> {
    records.iter().map(MetricsRecord::lambda).collect()
}

/// Uncoded, adversary-free reference result of one shard at one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthEntry<E> {
    pub output: Vec<E>,
    pub accepted: bool,
}

/// Sequential uncoded verification of every proposal.
pub fn ground_truth<F: Field>(
    field: &F,
    workload: &Workload,
    vf: &VerificationFn,
) -> Result<Vec<Vec<TruthEntry<F::Elem>>>, SimError> {
    let mut chains: Vec<Vec<Block<F::Elem>>> = (0..workload.shards)
        .map(|_| vec![workload.mint_block(field)])
        .collect();
    let mut out = Vec::with_capacity(workload.epoch_count());
    for t in 0..workload.epoch_count() {
        let proposals = workload.proposals(field, t)?;
        let mut epoch = Vec::with_capacity(workload.shards);
        for (chain, p) in chains.iter_mut().zip(&proposals) {
            let output = vf.evaluate(field, p, chain)?;
            let accepted = vf.accept(field, &output);
            chain.push(finalize(field, p, accepted));
            epoch.push(TruthEntry { output, accepted });
        }
        out.push(epoch);
    }
    Ok(out)
}

/// Full result of a simulation.
#[derive(Debug, Clone)]
pub struct RunOutput<E> {
    pub records: Vec<MetricsRecord>,
    /// Decoded verdicts per epoch and shard.
    pub verdicts: Vec<Vec<ShardVerdict<E>>>,
    pub truth: Vec<Vec<TruthEntry<E>>>,
    /// Corrupted node sets per epoch.
    pub corrupted: Vec<BTreeSet<usize>>,
    /// Stored elements per node at the end of the run.
    pub stored_elements: Vec<usize>,
    /// Elements in all K uncoded sub-chains at the end of the run.
    pub ledger_elements: usize,
    /// Final per-node storage, one entry per stored copy.
    pub states: Vec<NodeState<E>>,
    /// Final verified sub-chains as decoded by the network.
    pub chains: Vec<SubChain<E>>,
    pub scheme: Scheme<E>,
}

impl<E> RunOutput<E> {
    pub fn total_violations(&self) -> usize {
        self.records.iter().map(|r| r.violations).sum()
    }
}

/// Runs a configuration over its prime field.
pub fn run(config: &RunConfig) -> Result<RunOutput<crate::field::Fp>, SimError> {
    match config.field {
        FieldSpec::Prime { p } => simulate(&PrimeField::new(p)?, config),
        other => Err(SimError::UnsupportedField(other)),
    }
}

fn op_total<F: Field>(counted: &Counted<'_, F>) -> u64 {
    counted.take().total()
}

fn is_decode_failure(err: &SchemeError) -> bool {
    matches!(err, SchemeError::Poly(PolyError::DecodeFailure { .. }))
}

struct Engine<'a, F: Field> {
    field: &'a F,
    config: &'a RunConfig,
    scheme: Scheme<F::Elem>,
    /// Stored copies; `rep[i]` is node `i`'s copy.
    states: Vec<NodeState<F::Elem>>,
    rep: Vec<usize>,
    assignment: Vec<Option<usize>>,
}

impl<'a, F: Field + Sync> Engine<'a, F> {
    fn nodes(&self) -> usize {
        self.config.nodes
    }

    /// Runs `op` on every stored copy, in parallel when configured, and
    /// returns outputs and op counts per copy.
    fn per_copy<T: Send>(
        &mut self,
        op: impl Fn(&Counted<'_, F>, &Scheme<F::Elem>, &mut NodeState<F::Elem>) -> Result<T, SchemeError>
            + Sync,
    ) -> Result<Vec<(T, u64)>, SchemeError> {
        let field = self.field;
        let scheme = &self.scheme;
        let run = |state: &mut NodeState<F::Elem>| {
            let counted = Counted::new(field);
            let out = op(&counted, scheme, state)?;
            Ok((out, op_total(&counted)))
        };
        if self.config.parallel {
            self.states.par_iter_mut().map(run).collect()
        } else {
            self.states.iter_mut().map(run).collect()
        }
    }

    /// Per-node broadcasts and costs from per-copy results.
    fn expand<T: Clone>(&self, per_copy: Vec<(T, u64)>) -> (Vec<T>, Vec<u64>) {
        self.rep.iter().map(|&r| per_copy[r].clone()).unzip()
    }

    /// Runs `op` once per decoding node (once in total when memoized) and
    /// books the cost to every node.
    fn decode_everywhere<T: PartialEq>(
        &self,
        epoch: usize,
        op: impl Fn(&Counted<'_, F>) -> Result<T, SchemeError>,
    ) -> Result<(Result<T, SchemeError>, Vec<u64>), SimError> {
        let n = self.nodes();
        if self.config.memoize {
            let counted = Counted::new(self.field);
            let out = op(&counted);
            return Ok((out, vec![op_total(&counted); n]));
        }
        let mut first: Option<Result<T, SchemeError>> = None;
        let mut costs = Vec::with_capacity(n);
        for _ in 0..n {
            let counted = Counted::new(self.field);
            let out = op(&counted);
            costs.push(op_total(&counted));
            match &first {
                None => first = Some(out),
                Some(prev) if *prev != out => return Err(SimError::Disagreement { epoch }),
                Some(_) => {}
            }
        }
        Ok((first.expect("at least one node"), costs))
    }
}

/// Decoded output per shard, `None` where a vote found no plurality.
type ShardOutputs<E> = Vec<Option<Vec<E>>>;

fn corruption_rng(spec: &AdversarySpec, epoch: usize, layer: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_c0de_0000_0000);
    rng.set_stream(((epoch as u64) << 16) | layer as u64);
    rng
}

fn weight_seed(seed: u64, epoch: usize, layer: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((epoch as u64) << 20) ^ layer as u64
}

/// Runs a configuration over an explicit field.
pub fn simulate<F: Field + Sync>(
    field: &F,
    config: &RunConfig,
) -> Result<RunOutput<F::Elem>, SimError> {
    let workload = gen_workload_with_mint(
        config.seed,
        config.shards,
        config.accounts,
        config.epochs,
        config.invalid_rate,
        config.initial_balance,
    )?;
    let modulus = field.size();
    if let FieldSpec::Prime { .. } = field.spec() {
        workload.check_headroom(modulus)?;
    }
    let scheme = Scheme::new(
        field,
        config.scheme,
        config.nodes,
        config.shards,
        config.mu(),
        config.verification.clone(),
    )?;
    let genesis: Vec<Block<F::Elem>> = (0..config.shards)
        .map(|_| workload.mint_block(field))
        .collect();
    let all_states = scheme.init(field, &genesis)?;
    let (states, rep): (Vec<NodeState<F::Elem>>, Vec<usize>) = if config.memoize {
        match config.scheme {
            SchemeKind::FullReplication => (vec![all_states[0].clone()], vec![0; config.nodes]),
            SchemeKind::UncodedSharding => {
                let q = scheme.shard_size();
                let copies = (0..config.shards)
                    .map(|k| all_states[k * q].clone())
                    .collect();
                (copies, (0..config.nodes).map(|i| i / q).collect())
            }
            _ => (all_states, (0..config.nodes).collect()),
        }
    } else {
        (all_states, (0..config.nodes).collect())
    };
    let assignment = (0..config.nodes).map(|i| scheme.assignment(i)).collect();
    let mut engine = Engine {
        field,
        config,
        scheme,
        states,
        rep,
        assignment,
    };

    let truth = ground_truth(field, &workload, &config.verification)?;
    let mut truth_chains: Vec<Vec<Block<F::Elem>>> =
        genesis.iter().map(|b| vec![b.clone()]).collect();
    let mut chains: Vec<SubChain<F::Elem>> = genesis
        .iter()
        .enumerate()
        .map(|(k, b)| SubChain::with_blocks(k, vec![b.clone()]))
        .collect();
    let beta = engine.scheme.capacity().beta;

    let mut records = Vec::with_capacity(config.epochs);
    let mut verdicts_all = Vec::with_capacity(config.epochs);
    let mut corrupted_all = Vec::with_capacity(config.epochs);

    for t in 0..config.epochs {
        let epoch = t + 1;
        let started = Instant::now();
        let proposals = workload.proposals(field, t)?;

        let c_f = {
            let counted = Counted::new(field);
            config
                .verification
                .evaluate(&counted, &proposals[0], &truth_chains[0])?;
            op_total(&counted)
        };
        for (k, chain) in truth_chains.iter_mut().enumerate() {
            chain.push(finalize(field, &proposals[k], truth[t][k].accepted));
        }

        let computed = engine.per_copy(|f, s, st| s.compute(f, st, &proposals))?;
        let (mut messages, mut c_rho) = engine.expand(computed);
        let mut c_psi = vec![0u64; config.nodes];

        let corrupted = select_corrupted(&engine, epoch, &messages)?;
        let (verdicts, decode_failure) = if config.scheme == SchemeKind::IterativePolyShard {
            run_layers(
                &mut engine,
                epoch,
                &mut messages,
                &corrupted,
                &mut c_rho,
                &mut c_psi,
            )?
        } else {
            corrupt_all(
                field,
                &mut messages,
                &corrupted,
                &mut corruption_rng(&config.adversary, epoch, 1),
            );
            let width = messages.first().and_then(|m| m.first()).map_or(0, Vec::len);
            let weights = decode_weights(field, weight_seed(config.seed, epoch, 1), width);
            let (out, costs) = engine
                .decode_everywhere(epoch, |f| engine.scheme.decode(f, &messages, &weights))?;
            add_costs(&mut c_psi, &costs);
            settle(out, config.shards)?
        };

        let accepted: Vec<bool> = verdicts.iter().map(|v| v.accepted).collect();
        let violations = verdicts
            .iter()
            .zip(&truth[t])
            .filter(|(v, tr)| v.accepted != tr.accepted || v.output.as_ref() != Some(&tr.output))
            .count();
        if config.strict && violations > 0 && corrupted.len() <= beta {
            return Err(SimError::WithinBudget {
                epoch,
                violations,
                corrupted: corrupted.len(),
                beta,
            });
        }

        let updated = engine.per_copy(|f, s, st| s.update(f, st, &proposals, &accepted))?;
        let (_, c_chi) = engine.expand(updated);
        for (k, chain) in chains.iter_mut().enumerate() {
            chain.push(finalize(field, &proposals[k], accepted[k]));
        }

        let ledger: usize = chains.iter().map(SubChain::size).sum();
        let stored = engine
            .rep
            .iter()
            .map(|&r| engine.states[r].stored_elements())
            .max()
            .unwrap_or(1);
        records.push(MetricsRecord {
            epoch,
            c_rho,
            c_psi,
            c_chi,
            c_f,
            shards: config.shards,
            nodes: config.nodes,
            gamma: Ratio::new(ledger as u64, stored.max(1) as u64),
            beta,
            corrupted: corrupted.len(),
            violations,
            decode_failure,
            wall_ms: if config.wall_clock {
                started.elapsed().as_millis() as u64
            } else {
                0
            },
        });
        verdicts_all.push(verdicts);
        corrupted_all.push(corrupted);
    }

    let stored_elements = engine
        .rep
        .iter()
        .map(|&r| engine.states[r].stored_elements())
        .collect();
    Ok(RunOutput {
        records,
        verdicts: verdicts_all,
        truth,
        corrupted: corrupted_all,
        stored_elements,
        ledger_elements: chains.iter().map(SubChain::size).sum(),
        states: engine.states,
        chains,
        scheme: engine.scheme,
    })
}

fn add_costs(acc: &mut [u64], costs: &[u64]) {
    for (a, c) in acc.iter_mut().zip(costs) {
        *a += c;
    }
}

/// Turns a decode result into verdicts; a decoding failure rejects every
/// shard.
fn settle<E>(
    out: Result<Vec<ShardVerdict<E>>, SchemeError>,
    shards: usize,
) -> Result<(Vec<ShardVerdict<E>>, bool), SimError> {
    match out {
        Ok(v) => Ok((v, false)),
        Err(e) if is_decode_failure(&e) => Ok((
            (0..shards)
                .map(|_| ShardVerdict {
                    output: None,
                    accepted: false,
                })
                .collect(),
            true,
        )),
        Err(e) => Err(e.into()),
    }
}

fn select_corrupted<F: Field + Sync>(
    engine: &Engine<'_, F>,
    epoch: usize,
    messages: &[Message<F::Elem>],
) -> Result<BTreeSet<usize>, SimError> {
    let spec = &engine.config.adversary;
    if spec.strategy != Strategy::WorstCaseSearch || spec.corrupted_count(engine.nodes()) == 0 {
        return Ok(spec.select(epoch as u64, &engine.assignment, None)?);
    }
    // Damage: shards whose first-round decode moves away from the
    // uncorrupted decode, with a failure counting every shard.
    let field = engine.field;
    let scheme = &engine.scheme;
    let width = messages.first().and_then(|m| m.first()).map_or(0, Vec::len);
    let weights = decode_weights(field, weight_seed(engine.config.seed, epoch, 1), width);
    let decode = |msgs: &[Message<F::Elem>]| -> Result<Option<ShardOutputs<F::Elem>>, SchemeError> {
        let out = if scheme.kind() == SchemeKind::IterativePolyShard {
            scheme
                .decode_layer(field, 1, msgs, &weights)
                .map(|v| v.into_iter().map(Some).collect())
        } else {
            scheme
                .decode(field, msgs, &weights)
                .map(|v| v.into_iter().map(|s| s.output).collect())
        };
        match out {
            Ok(v) => Ok(Some(v)),
            Err(e) if is_decode_failure(&e) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let clean = decode(messages)?;
    let mut failure: Option<SchemeError> = None;
    let mut damage = |subset: &[usize]| -> u64 {
        let mut msgs = messages.to_vec();
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        corrupt_all(field, &mut msgs, &set, &mut corruption_rng(spec, epoch, 1));
        match decode(&msgs) {
            Ok(None) => scheme.shards() as u64,
            Ok(Some(v)) => match &clean {
                Some(c) => v.iter().zip(c).filter(|(a, b)| a != b).count() as u64,
                None => 0,
            },
            Err(e) => {
                failure.get_or_insert(e);
                0
            }
        }
    };
    let chosen = spec.select(epoch as u64, &engine.assignment, Some(&mut damage))?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(chosen)
}

type LayerOutcome<E> = (Vec<ShardVerdict<E>>, bool);

fn run_layers<F: Field + Sync>(
    engine: &mut Engine<'_, F>,
    epoch: usize,
    messages: &mut Vec<Message<F::Elem>>,
    corrupted: &BTreeSet<usize>,
    c_rho: &mut [u64],
    c_psi: &mut [u64],
) -> Result<LayerOutcome<F::Elem>, SimError> {
    let field = engine.field;
    let config = engine.config;
    let layers = engine.scheme.layers();
    for l in 1..=layers {
        corrupt_all(
            field,
            messages,
            corrupted,
            &mut corruption_rng(&config.adversary, epoch, l),
        );
        let width = messages.first().and_then(|m| m.first()).map_or(0, Vec::len);
        let weights = decode_weights(field, weight_seed(config.seed, epoch, l), width);
        let (out, costs) = {
            let msgs = &*messages;
            let scheme = &engine.scheme;
            engine.decode_everywhere(epoch, |f| scheme.decode_layer(f, l, msgs, &weights))?
        };
        add_costs(c_psi, &costs);
        let decoded = match out {
            Ok(v) => v,
            Err(e) if is_decode_failure(&e) => return settle(Err(e), config.shards),
            Err(e) => return Err(e.into()),
        };
        if l == layers {
            return Ok((engine.scheme.final_verdicts(field, decoded), false));
        }
        let advanced = engine.per_copy(|f, s, st| s.advance_layer(f, st, l, &decoded))?;
        let (next, costs) = engine.expand(advanced);
        add_costs(c_rho, &costs);
        *messages = next;
    }
    unreachable!("validated circuits have at least one layer")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn small(kind: SchemeKind, nodes: usize, shards: usize) -> RunConfig {
        let mut c = RunConfig::new(kind, nodes, shards);
        c.accounts = 12;
        c.epochs = 6;
        c.seed = 5;
        c.invalid_rate = 0.2;
        c
    }

    #[test]
    fn honest_runs_have_no_violations() {
        for kind in [
            SchemeKind::FullReplication,
            SchemeKind::UncodedSharding,
            SchemeKind::PolyShard,
        ] {
            let out = run(&small(kind, 9, 3)).unwrap();
            assert_eq!(out.total_violations(), 0, "{kind}");
            assert_eq!(out.records.len(), 6);
        }
    }

    #[test]
    fn lambda_baselines_are_exact() {
        let full = run(&small(SchemeKind::FullReplication, 9, 3)).unwrap();
        let shard = run(&small(SchemeKind::UncodedSharding, 9, 3)).unwrap();
        for r in &full.records {
            assert_eq!(r.lambda(), Some(Ratio::from_integer(1)));
        }
        for r in &shard.records {
            assert_eq!(r.lambda(), Some(Ratio::from_integer(3)));
        }
    }

    #[test]
    fn memoized_and_direct_runs_agree() {
        for kind in [
            SchemeKind::FullReplication,
            SchemeKind::UncodedSharding,
            SchemeKind::PolyShard,
        ] {
            let mut a = small(kind, 9, 3);
            a.adversary = AdversarySpec::new(Mu::new(1, 9), Strategy::RandomValues, 3).unwrap();
            a.strict = false;
            let mut b = a.clone();
            b.memoize = false;
            b.parallel = false;
            let x = run(&a).unwrap();
            let y = run(&b).unwrap();
            assert_eq!(x.records, y.records, "{kind}");
            assert_eq!(x.verdicts, y.verdicts);
            assert_eq!(x.stored_elements, y.stored_elements);
        }
    }

    #[test]
    fn ground_truth_of_empty_workload_is_empty() {
        let f = PrimeField::mersenne61();
        let w = gen_workload_with_mint(1, 3, 5, 0, 0.0, 10).unwrap();
        assert!(ground_truth(&f, &w, &VerificationFn::Balance)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn binary_field_is_rejected() {
        let mut c = small(SchemeKind::PolyShard, 9, 3);
        c.field = FieldSpec::BinaryExtension { m: 8 };
        assert!(matches!(run(&c), Err(SimError::UnsupportedField(_))));
    }
}
