//! The acceptance suite: ten numbered checks, each returning a report.
//!
//! Every check runs on fixed seeds, so a pass or fail is reproducible.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use polyshard::adversary::{corrupt_vectors, AdversarySpec, Strategy};
use polyshard::circuit::{bool_to_poly, bundled, eval_circuit, ArithmeticCircuit};
use polyshard::field::{BinaryField, Field, Fp, PrimeField};
use polyshard::ledger::{finalize, gen_workload, AcceptRule, Block, SubChain, VerificationFn};
use polyshard::poly::{
    encode_vectors, interpolate, lagrange_table, max_errors, rs_decode, DecodeOutcome,
    EvaluationGrid, PolyError, Polynomial,
};
use polyshard::schemes::{
    capacity, decode_weights, iterative_epoch, iterative_k_max, Message, Mu, Scheme, SchemeKind,
};
use polyshard::sim::{run, RunConfig};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::run_id;
use crate::sweep::{csv_rows, scaling_cell, scaling_table, RunSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Times `body`, which returns pass/fail and a one-line detail.
fn report(id: u8, name: &'static str, body: impl FnOnce() -> (bool, String)) -> CriterionReport {
    let start = Instant::now();
    let (passed, detail) = body();
    CriterionReport {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn f61() -> PrimeField {
    PrimeField::mersenne61()
}

fn random_vec<F: Field, R: Rng>(f: &F, len: usize, rng: &mut R) -> Vec<F::Elem> {
    (0..len).map(|_| f.random(rng)).collect()
}

/// Interpolating all `N` coded evaluations and evaluating at the shard
/// points returns the shard values.
pub fn lagrange_identity(trials: usize) -> CriterionReport {
    report(1, "Lagrange identity", || {
        let f = f61();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut failures = 0;
        for _ in 0..trials {
            let shards = rng.gen_range(1..=8);
            let nodes = rng.gen_range(shards..=shards + 12);
            let width = rng.gen_range(1..=4);
            let grid = EvaluationGrid::standard(&f, shards, nodes).expect("distinct points");
            let table = lagrange_table(&f, &grid).expect("invertible grid");
            let values: Vec<Vec<Fp>> = (0..shards)
                .map(|_| random_vec(&f, width, &mut rng))
                .collect();
            let coded: Vec<Vec<Fp>> = table
                .iter()
                .map(|c| encode_vectors(&f, c, &values).expect("shape"))
                .collect();
            for c in 0..width {
                let points: Vec<(Fp, Fp)> = grid
                    .alphas()
                    .iter()
                    .zip(&coded)
                    .map(|(&a, v)| (a, v[c]))
                    .collect();
                let u = interpolate(&f, &points).expect("distinct points");
                let ok = u.degree().is_none_or(|d| d < shards)
                    && grid
                        .omegas()
                        .iter()
                        .zip(&values)
                        .all(|(&w, v)| u.eval(&f, w) == v[c]);
                failures += usize::from(!ok);
            }
        }
        (
            failures == 0,
            format!("{trials} trials, {failures} mismatches"),
        )
    })
}

/// Decoder under test in [`rs_capacity`].
pub type Decoder = fn(&PrimeField, &[Fp], &[Fp], usize) -> Result<DecodeOutcome<Fp>, PolyError>;

/// The library decoder.
pub fn reference_decoder(
    f: &PrimeField,
    alphas: &[Fp],
    evals: &[Fp],
    dim: usize,
) -> Result<DecodeOutcome<Fp>, PolyError> {
    rs_decode(f, alphas, evals, dim)
}

/// Fault-injected decoder: trusts the first `dim` symbols.
pub fn mutated_decoder(
    f: &PrimeField,
    alphas: &[Fp],
    evals: &[Fp],
    dim: usize,
) -> Result<DecodeOutcome<Fp>, PolyError> {
    let points: Vec<(Fp, Fp)> = alphas
        .iter()
        .copied()
        .zip(evals.iter().copied())
        .take(dim)
        .collect();
    let polynomial = interpolate(f, &points)?;
    let error_positions = alphas
        .iter()
        .zip(evals)
        .enumerate()
        .filter(|(_, (&a, &y))| polynomial.eval(f, a) != y)
        .map(|(j, _)| j)
        .collect();
    Ok(DecodeOutcome {
        polynomial,
        error_positions,
    })
}

/// Small prime field for the exhaustive oracle at each length.
const SMALL_FIELDS: [(usize, u64); 3] = [(7, 7), (15, 17), (31, 31)];
/// Largest codebook enumerated by the oracle.
const MAX_CODEBOOK: u64 = 100_000;

fn eval_mod(coeffs: &[u64], x: u64, p: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % p)
}

/// All codewords (as coefficient vectors) within `radius` of `word`, from
/// plain integer arithmetic mod `p` over the evaluation points `0..N`.
fn codewords_within(word: &[u64], dim: usize, p: u64, radius: usize) -> Vec<Vec<u64>> {
    let mut coeffs = vec![0u64; dim];
    let mut found = Vec::new();
    loop {
        let dist = word
            .iter()
            .enumerate()
            .filter(|&(x, &y)| eval_mod(&coeffs, x as u64, p) != y)
            .count();
        if dist <= radius {
            found.push(coeffs.clone());
        }
        let Some(i) = coeffs.iter().position(|&c| c + 1 < p) else {
            return found;
        };
        coeffs[i] += 1;
        coeffs[..i].fill(0);
    }
}

fn coeffs_u64(poly: &Polynomial<Fp>, dim: usize) -> Vec<u64> {
    let mut c: Vec<u64> = poly.coeffs().iter().map(|v| v.value()).collect();
    c.resize(dim.max(c.len()), 0);
    c
}

/// Planted codeword `c`, a second codeword `c'` agreeing with it on `D - 1`
/// points, and a word taking `c'` on `e + 1` of the other points.
fn adversarial_instance(
    n: usize,
    dim: usize,
    p: u64,
    rng: &mut ChaCha8Rng,
) -> (Vec<u64>, Vec<u64>) {
    let planted: Vec<u64> = (0..dim).map(|_| rng.gen_range(0..p)).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let (roots, rest) = perm.split_at(dim - 1);
    let scale = rng.gen_range(1..p);
    let bump = |x: u64| {
        roots
            .iter()
            .fold(scale, |acc, &r| acc * ((x + p - r as u64) % p) % p)
    };
    let e = max_errors(n, dim);
    let flipped: BTreeSet<usize> = rest[..e + 1].iter().copied().collect();
    let word = (0..n)
        .map(|x| {
            let y = eval_mod(&planted, x as u64, p);
            if flipped.contains(&x) {
                (y + bump(x as u64)) % p
            } else {
                y
            }
        })
        .collect();
    (planted, word)
}

/// Exact recovery within the decoding radius, and no silent agreement with
/// the planted codeword one error beyond it.
pub fn rs_capacity(decoder: Decoder) -> CriterionReport {
    report(2, "RS decode capacity", || {
        let f = f61();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut trials, mut failures) = (0usize, 0usize);
        for &(n, _) in &SMALL_FIELDS {
            let alphas: Vec<Fp> = (1..=n as u64).map(|a| f.elem(a)).collect();
            for dim in 2..=n - 2 {
                for _ in 0..200 {
                    let coeffs = random_vec(&f, dim, &mut rng);
                    let planted = Polynomial::new(&f, coeffs);
                    let mut word: Vec<Fp> = alphas.iter().map(|&a| planted.eval(&f, a)).collect();
                    let weight = rng.gen_range(0..=max_errors(n, dim));
                    let errors: BTreeSet<usize> = sample(&mut rng, n, weight).into_iter().collect();
                    for &j in &errors {
                        let offset = f.elem(rng.gen_range(1..f.size()));
                        word[j] = f.add(word[j], offset);
                    }
                    trials += 1;
                    let ok = matches!(decoder(&f, &alphas, &word, dim), Ok(out) if out.polynomial == planted && out.error_positions == errors);
                    failures += usize::from(!ok);
                }
            }
        }
        let (mut instances, mut silent, mut oracle_mismatch) = (0usize, 0usize, 0usize);
        for &(n, p) in &SMALL_FIELDS {
            let small = PrimeField::new(p).expect("prime");
            let alphas: Vec<Fp> = (0..n as u64).map(|a| small.elem(a)).collect();
            for dim in (2..=n - 2)
                .take_while(|&d| p.checked_pow(d as u32).is_some_and(|s| s <= MAX_CODEBOOK))
            {
                let e = max_errors(n, dim);
                let (planted, word) = adversarial_instance(n, dim, p, &mut rng);
                let within = codewords_within(&word, dim, p, e);
                let beyond = codewords_within(&word, dim, p, e + 1);
                // The planted codeword sits exactly one error outside the radius.
                assert!(
                    !within.contains(&planted) && beyond.contains(&planted),
                    "instance construction"
                );
                instances += 1;
                let word_f: Vec<Fp> = word.iter().map(|&y| small.elem(y)).collect();
                match decoder(&small, &alphas, &word_f, dim) {
                    Ok(out) => {
                        let got = coeffs_u64(&out.polynomial, dim);
                        silent += usize::from(got == planted);
                        oracle_mismatch += usize::from(within != [got]);
                    }
                    Err(_) => oracle_mismatch += usize::from(!within.is_empty()),
                }
            }
        }
        (
            failures == 0 && silent == 0 && oracle_mismatch == 0,
            format!(
                "{trials} trials within radius, {failures} failures; {instances} exhaustive instances one past radius, {silent} silent agreements, {oracle_mismatch} oracle mismatches"
            ),
        )
    })
}

fn budget_config(nodes: usize, shards: usize, vf: VerificationFn, seed: u64) -> RunConfig {
    let mut c = RunConfig::new(SchemeKind::PolyShard, nodes, shards);
    let beta = capacity(c.scheme, nodes, shards, Mu::from_integer(0), vf.degree())
        .expect("valid cell")
        .beta;
    c.verification = vf;
    c.accounts = 24;
    c.epochs = 50;
    c.invalid_rate = 0.2;
    c.seed = seed;
    c.adversary = AdversarySpec::new(
        Mu::new(beta as i64, nodes as i64),
        Strategy::RandomValues,
        seed + 1000,
    )
    .expect("beta / N < 1/2");
    c
}

fn pair_product() -> VerificationFn {
    VerificationFn::circuit(
        ArithmeticCircuit::parse(bundled::PAIR_PRODUCT).expect("bundled"),
        AcceptRule::NonNegative,
    )
}

/// Decoded results under exactly `beta` corruptions equal the uncoded,
/// adversary-free oracle.
pub fn scheme_equivalence(seeds: u64) -> CriterionReport {
    report(3, "Scheme-equivalence oracle", || {
        let cells = [
            (15, 5, VerificationFn::Balance),
            (30, 10, VerificationFn::Balance),
            (21, 3, pair_product()),
        ];
        let (mut checked, mut wrong, mut errors) = (0usize, 0usize, Vec::new());
        for (nodes, shards, vf) in cells {
            for seed in 0..seeds {
                let c = budget_config(nodes, shards, vf.clone(), seed);
                let beta = capacity(c.scheme, nodes, shards, c.mu(), vf.degree())
                    .expect("valid")
                    .beta;
                match run(&c) {
                    Ok(out) => {
                        wrong += out.total_violations();
                        wrong += out.corrupted.iter().filter(|s| s.len() != beta).count();
                        for (vs, ts) in out.verdicts.iter().zip(&out.truth) {
                            for (v, t) in vs.iter().zip(ts) {
                                checked += 1;
                                wrong += usize::from(
                                    v.output.as_ref() != Some(&t.output)
                                        || v.accepted != t.accepted,
                                );
                            }
                        }
                    }
                    Err(e) => errors.push(format!("N={nodes} K={shards} seed {seed}: {e}")),
                }
            }
        }
        (
            wrong == 0 && errors.is_empty() && checked > 0,
            format!(
                "{checked} shard-epochs compared, {wrong} mismatches, {} failed runs{}",
                errors.len(),
                errors.first().map_or(String::new(), |e| format!(" ({e})"))
            ),
        )
    })
}

/// Network sizes of the storage and security tables, at `N / K = 3`.
pub const TABLE_NODES: [usize; 6] = [15, 30, 60, 90, 120, 150];

pub fn security_table() -> CriterionReport {
    report(4, "Security table", || {
        let expected = [
            (SchemeKind::FullReplication, [7, 15, 30, 45, 60, 75]),
            (SchemeKind::UncodedSharding, [1, 1, 1, 1, 1, 1]),
            (SchemeKind::PolyShard, [5, 10, 20, 30, 40, 50]),
        ];
        let mut rows = Vec::new();
        let mut ok = true;
        for (kind, want) in expected {
            let got: Vec<usize> = TABLE_NODES
                .iter()
                .map(|&n| {
                    capacity(kind, n, n / 3, Mu::from_integer(0), 1).map_or(usize::MAX, |r| r.beta)
                })
                .collect();
            ok &= got == want;
            rows.push(format!("{kind} {got:?}"));
        }
        (ok, rows.join("; "))
    })
}

pub fn storage_table() -> CriterionReport {
    report(5, "Storage table", || {
        let expected = [
            (SchemeKind::FullReplication, [1, 1, 1, 1, 1, 1]),
            (SchemeKind::UncodedSharding, [5, 10, 20, 30, 40, 50]),
            (SchemeKind::PolyShard, [5, 10, 20, 30, 40, 50]),
        ];
        let mut ok = true;
        let mut rows = Vec::new();
        for (kind, want) in expected {
            let mut got = Vec::new();
            for &n in &TABLE_NODES {
                let closed = capacity(kind, n, n / 3, Mu::from_integer(0), 1)
                    .map_or(usize::MAX, |r| r.gamma);
                let mut c = RunConfig::new(kind, n, n / 3);
                c.accounts = 4;
                c.epochs = 3;
                let measured = match run(&c) {
                    Ok(out) => {
                        let max = *out.stored_elements.iter().max().unwrap_or(&0);
                        let uniform = out.stored_elements.iter().all(|&s| s == max);
                        let per_epoch = out
                            .records
                            .iter()
                            .all(|r| r.gamma == num_rational::Ratio::from_integer(closed as u64));
                        (uniform && per_epoch && out.ledger_elements == closed * max)
                            .then_some(out.ledger_elements / max)
                    }
                    Err(_) => None,
                };
                ok &= measured == Some(closed);
                got.push(closed);
            }
            ok &= got == want;
            rows.push(format!("{kind} {got:?}"));
        }
        (ok, rows.join("; "))
    })
}

const DESK_SHARDS: [usize; 3] = [5, 10, 20];

/// Op-count throughput at desk scale.
pub fn throughput_laws() -> CriterionReport {
    report(6, "Throughput laws", || {
        let mut ok = true;
        let mut notes = Vec::new();
        let mut summaries = Vec::new();
        for kind in [
            SchemeKind::FullReplication,
            SchemeKind::UncodedSharding,
            SchemeKind::PolyShard,
        ] {
            for &k in &DESK_SHARDS {
                let c = RunConfig::new(kind, 3 * k, k);
                let out = match run(&c) {
                    Ok(out) => out,
                    Err(e) => {
                        ok = false;
                        notes.push(format!("{kind} K={k}: {e}"));
                        continue;
                    }
                };
                let lambdas: Vec<_> = out.records.iter().map(|r| r.lambda()).collect();
                let last = out.records.last().map_or(f64::NAN, |r| r.lambda_f64());
                match kind {
                    SchemeKind::FullReplication => {
                        ok &= lambdas.iter().all(|l| *l == Some(1u128.into()))
                    }
                    SchemeKind::UncodedSharding => {
                        ok &= lambdas.iter().all(|l| *l == Some((k as u128).into()))
                    }
                    _ => {
                        let tail = &lambdas[lambdas.len() / 2..];
                        let monotone = tail.windows(2).all(|w| w[1] >= w[0]);
                        let in_band = last >= 0.8 * k as f64 && last <= k as f64;
                        ok &= monotone && in_band;
                        notes.push(format!("polyshard K={k}: final {last:.3} ({:.3} K), tail non-decreasing {monotone}", last / k as f64));
                    }
                }
                let id = run_id(kind, c.nodes, k, c.mu(), c.seed);
                if let Some(row) = csv_rows(&id, &c, &out.records).last() {
                    summaries.push(RunSummary::from(row));
                }
            }
        }
        let table = scaling_table(&summaries);
        let lambda_at = |kind: SchemeKind, k: usize| {
            scaling_cell(&table, "lambda", kind.name(), 3 * k).and_then(|v| v.parse::<f64>().ok())
        };
        let flat = DESK_SHARDS
            .iter()
            .all(|&k| lambda_at(SchemeKind::FullReplication, k) == Some(1.0));
        let linear = |kind: SchemeKind| {
            let per_node: Option<Vec<f64>> = DESK_SHARDS
                .iter()
                .map(|&k| lambda_at(kind, k).map(|l| l / (3 * k) as f64))
                .collect();
            per_node.is_some_and(|v| {
                v.windows(2)
                    .all(|w| w[1] >= 0.8 * w[0] && w[1] <= 1.25 * w[0])
            })
        };
        let (sharding_linear, poly_linear) = (
            linear(SchemeKind::UncodedSharding),
            linear(SchemeKind::PolyShard),
        );
        ok &= flat && sharding_linear && poly_linear;
        notes.push(format!("shape: full flat {flat}, sharding linear {sharding_linear}, polyshard linear {poly_linear}"));
        (ok, notes.join("; "))
    })
}

fn random_block(f: &PrimeField, accounts: usize, rng: &mut ChaCha8Rng) -> Block<Fp> {
    Block {
        send: random_vec(f, accounts, rng),
        receive: random_vec(f, accounts, rng),
    }
}

/// Appending encoded blocks equals recoding every sub-chain from scratch.
pub fn incremental_update(epochs: usize) -> CriterionReport {
    report(7, "Incremental-update commutativity", || {
        let f = f61();
        let (nodes, shards, accounts) = (15, 5, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let scheme = Scheme::new(
            &f,
            SchemeKind::PolyShard,
            nodes,
            shards,
            Mu::from_integer(0),
            VerificationFn::Balance,
        )
        .expect("valid");
        let genesis: Vec<_> = (0..shards)
            .map(|_| random_block(&f, accounts, &mut rng))
            .collect();
        let mut states = scheme.init(&f, &genesis).expect("init");
        let mut chains: Vec<SubChain<Fp>> = genesis
            .iter()
            .enumerate()
            .map(|(k, b)| SubChain::with_blocks(k, vec![b.clone()]))
            .collect();
        let mut mismatches = 0;
        for _ in 0..epochs {
            let proposals: Vec<_> = (0..shards)
                .map(|_| random_block(&f, accounts, &mut rng))
                .collect();
            let accepted: Vec<bool> = (0..shards).map(|_| rng.gen_bool(0.7)).collect();
            for st in states.iter_mut() {
                scheme.compute(&f, st, &proposals).expect("compute");
                scheme
                    .update(&f, st, &proposals, &accepted)
                    .expect("update");
            }
            for (k, c) in chains.iter_mut().enumerate() {
                c.push(finalize(&f, &proposals[k], accepted[k]));
            }
            for st in &states {
                let scratch = scheme.encode_chains(&f, st.node, &chains).expect("recode");
                mismatches += usize::from(st.coded_chain() != Some(&scratch));
            }
        }
        (
            mismatches == 0,
            format!("{epochs} epochs x {nodes} nodes, {mismatches} mismatches"),
        )
    })
}

fn table_bytes(s: &Scheme<Fp>) -> Vec<u8> {
    s.coefficient_table()
        .iter()
        .flatten()
        .flat_map(|v| v.value().to_le_bytes())
        .collect()
}

/// One coded chain answers both the balance check and a degree-2 circuit.
pub fn obliviousness() -> CriterionReport {
    report(8, "Obliviousness", || {
        let f = f61();
        let (nodes, shards) = (15, 5);
        let mut c = RunConfig::new(SchemeKind::PolyShard, nodes, shards);
        c.accounts = 10;
        c.epochs = 8;
        c.invalid_rate = 0.2;
        c.seed = 8;
        let Ok(base) = run(&c) else {
            return (false, "base run failed".to_string());
        };
        let quad = pair_product();
        let Ok(quad_scheme) = Scheme::new(
            &f,
            SchemeKind::PolyShard,
            nodes,
            shards,
            Mu::from_integer(0),
            quad.clone(),
        ) else {
            return (false, "degree-2 scheme rejected".to_string());
        };
        let identical = table_bytes(&base.scheme) == table_bytes(&quad_scheme);
        let proposals = gen_workload(88, shards, c.accounts, 1, 0.3)
            .and_then(|w| w.proposals(&f, 0))
            .expect("workload");
        let mut correct = 0;
        for (scheme, vf) in [
            (&base.scheme, &VerificationFn::Balance),
            (&quad_scheme, &quad),
        ] {
            let mut states = base.states.clone();
            let messages: Vec<Message<Fp>> = states
                .iter_mut()
                .map(|st| scheme.compute(&f, st, &proposals).expect("compute"))
                .collect();
            let weights = decode_weights(&f, 8, messages[0][0].len());
            let Ok(verdicts) = scheme.decode(&f, &messages, &weights) else {
                continue;
            };
            let all = verdicts.iter().enumerate().all(|(k, v)| {
                let want = vf
                    .evaluate(&f, &proposals[k], base.chains[k].blocks())
                    .expect("uncoded");
                v.output.as_ref() == Some(&want) && v.accepted == vf.accept(&f, &want)
            });
            correct += usize::from(all);
        }
        (
            identical && correct == 2,
            format!("coefficient tables identical {identical}; {correct}/2 verification functions decoded correctly"),
        )
    })
}

/// `bool_to_poly` reproduces every truth table on three bits.
pub fn boolean_lifting() -> CriterionReport {
    report(9, "Boolean lifting", || {
        let gf2 = PrimeField::new(2).expect("prime");
        let gf16 = BinaryField::new(4).expect("table");
        let mut wrong = 0;
        for func in 0u32..256 {
            let table: Vec<bool> = (0..8).map(|row| func >> row & 1 == 1).collect();
            let Ok(p) = bool_to_poly(&table) else {
                wrong += 1;
                continue;
            };
            for (row, &want) in table.iter().enumerate() {
                let bits: Vec<u8> = (0..3).map(|i| (row >> i & 1) as u8).collect();
                let xs2: Vec<Fp> = bits.iter().map(|&b| gf2.elem(b as u64)).collect();
                let xs16: Vec<_> = bits
                    .iter()
                    .map(|&b| gf16.embed_bit(b).expect("bit"))
                    .collect();
                let ok2 = p
                    .eval(&gf2, &xs2)
                    .is_ok_and(|v| v == if want { gf2.one() } else { gf2.zero() });
                let ok16 = p
                    .eval(&gf16, &xs16)
                    .is_ok_and(|v| v == if want { gf16.one() } else { gf16.zero() });
                wrong += usize::from(!ok2) + usize::from(!ok16);
            }
        }
        (
            wrong == 0,
            format!("256 functions x 8 inputs x 2 fields, {wrong} mismatches"),
        )
    })
}

/// Iterative coded evaluation over the bundled two-layer circuit.
pub fn iterative_polyshard(seeds: u64) -> CriterionReport {
    report(10, "Iterative PolyShard", || {
        let mu = Mu::new(1, 5);
        // floor((3N/5 + 1) / 2) = floor((3N + 5) / 10).
        let spot: Vec<(usize, usize)> = [15usize, 30, 150]
            .iter()
            .map(|&n| (iterative_k_max(n, mu), (3 * n + 5) / 10))
            .collect();
        let formula_ok = spot.iter().all(|(a, b)| a == b)
            && spot.iter().map(|s| s.0).collect::<Vec<_>>() == [5, 9, 45];
        let f = f61();
        let circuit = ArithmeticCircuit::parse(bundled::ITER_EX).expect("bundled");
        let (nodes, shards) = (15, iterative_k_max(15, mu));
        let grid = EvaluationGrid::standard(&f, shards, nodes).expect("grid");
        let windows = 2;
        let mut wrong = 0;
        let mut corrupted_per_layer = BTreeSet::new();
        for seed in 0..seeds {
            let adversary = AdversarySpec::new(mu, Strategy::RandomValues, seed).expect("mu");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inputs: Vec<Vec<Fp>> = (0..shards)
                .map(|_| random_vec(&f, windows * circuit.inputs(), &mut rng))
                .collect();
            let mut corrupt_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
            let decoded = iterative_epoch(&f, &grid, &circuit, &inputs, seed, |layer, messages| {
                let chosen = adversary
                    .select(layer as u64, &[None; 15], None)
                    .expect("random selection");
                corrupted_per_layer.insert(chosen.len());
                corrupt_vectors(&f, messages, &chosen, &mut corrupt_rng);
            });
            let Ok(decoded) = decoded else {
                wrong += shards;
                continue;
            };
            for (k, x) in inputs.iter().enumerate() {
                let direct: Vec<Fp> = x
                    .chunks(circuit.inputs())
                    .flat_map(|w| eval_circuit(&f, &circuit, w).expect("arity"))
                    .collect();
                wrong += usize::from(decoded[k] != direct);
            }
        }
        let three = corrupted_per_layer == BTreeSet::from([3]);
        (
            formula_ok && three && wrong == 0,
            format!("K at N=15,30,150: {:?}; {seeds} seeds with {corrupted_per_layer:?} corrupted per layer, {wrong} wrong shard outputs", spot.iter().map(|s| s.0).collect::<Vec<_>>()),
        )
    })
}

/// All criteria on the reference seeds, in order.
pub fn run_all() -> Vec<CriterionReport> {
    vec![
        lagrange_identity(1000),
        rs_capacity(reference_decoder),
        scheme_equivalence(20),
        security_table(),
        storage_table(),
        throughput_laws(),
        incremental_update(100),
        obliviousness(),
        boolean_lifting(),
        iterative_polyshard(20),
    ]
}
