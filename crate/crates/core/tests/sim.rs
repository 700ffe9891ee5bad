use num_rational::Ratio;
use polyshard::adversary::{AdversarySpec, Strategy};
use polyshard::circuit::{bundled, ArithmeticCircuit};
use polyshard::ledger::{AcceptRule, VerificationFn};
use polyshard::schemes::{capacity, Mu, SchemeKind};
use polyshard::sim::{run, tail_lambda, throughput, RunConfig};

fn base(kind: SchemeKind, nodes: usize, shards: usize) -> RunConfig {
    let mut c = RunConfig::new(kind, nodes, shards);
    c.accounts = 8;
    c.epochs = 10;
    c.invalid_rate = 0.2;
    c
}

fn with_budget(mut c: RunConfig, seed: u64) -> RunConfig {
    let beta = capacity(
        c.scheme,
        c.nodes,
        c.shards,
        Mu::from_integer(0),
        c.verification.degree(),
    )
    .unwrap()
    .beta;
    c.seed = seed;
    c.adversary = AdversarySpec::new(
        Mu::new(beta as i64, c.nodes as i64),
        Strategy::RandomValues,
        seed ^ 0xabc,
    )
    .unwrap();
    c
}

#[test]
fn repeated_runs_are_identical() {
    for kind in [
        SchemeKind::FullReplication,
        SchemeKind::UncodedSharding,
        SchemeKind::PolyShard,
    ] {
        let c = with_budget(base(kind, 9, 3), 17);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.verdicts, b.verdicts);
        let mut serial = c.clone();
        serial.parallel = false;
        assert_eq!(run(&serial).unwrap().records, a.records);
    }
}

#[test]
fn safety_within_budget_over_many_seeds() {
    let iter = VerificationFn::circuit(
        ArithmeticCircuit::parse(bundled::PAIR_PRODUCT).unwrap(),
        AcceptRule::NonNegative,
    );
    let mut cells = vec![
        base(SchemeKind::FullReplication, 7, 2),
        base(SchemeKind::UncodedSharding, 9, 3),
        base(SchemeKind::PolyShard, 7, 3),
    ];
    let mut it = base(SchemeKind::IterativePolyShard, 7, 2);
    it.verification = iter;
    cells.push(it);
    for cell in cells {
        for seed in 0..100 {
            let mut c = with_budget(cell.clone(), seed);
            c.epochs = 3;
            let out = run(&c).unwrap_or_else(|e| panic!("{} seed {seed}: {e}", c.scheme));
            assert_eq!(out.total_violations(), 0);
        }
    }
}

#[test]
fn honest_runs_accept_every_valid_block() {
    for kind in [
        SchemeKind::FullReplication,
        SchemeKind::UncodedSharding,
        SchemeKind::PolyShard,
    ] {
        let mut c = base(kind, 12, 4);
        c.invalid_rate = 0.0;
        let out = run(&c).unwrap();
        assert!(out.verdicts.iter().flatten().all(|v| v.accepted));
        assert_eq!(out.total_violations(), 0);
    }
}

#[test]
fn measured_storage_efficiency_matches_closed_form() {
    for (nodes, shards) in [(60, 20), (9, 3), (4, 1)] {
        for kind in [
            SchemeKind::FullReplication,
            SchemeKind::UncodedSharding,
            SchemeKind::PolyShard,
        ] {
            let mut c = base(kind, nodes, shards);
            c.epochs = 3;
            let out = run(&c).unwrap();
            let closed = capacity(kind, nodes, shards, Mu::from_integer(0), 1)
                .unwrap()
                .gamma;
            for r in &out.records {
                assert_eq!(
                    r.gamma,
                    Ratio::from_integer(closed as u64),
                    "{kind} N={nodes}"
                );
            }
            let max_stored = *out.stored_elements.iter().max().unwrap();
            assert_eq!(out.ledger_elements, closed * max_stored);
        }
    }
}

#[test]
fn baseline_throughput_is_exact_every_epoch() {
    for shards in [2usize, 3, 5] {
        let n = 3 * shards;
        let full = run(&base(SchemeKind::FullReplication, n, shards)).unwrap();
        let sharded = run(&base(SchemeKind::UncodedSharding, n, shards)).unwrap();
        assert!(throughput(&full.records)
            .iter()
            .all(|l| *l == Some(Ratio::from_integer(1))));
        assert!(throughput(&sharded.records)
            .iter()
            .all(|l| *l == Some(Ratio::from_integer(shards as u128))));
    }
}

#[test]
fn single_shard_polyshard_approaches_one() {
    let mut c = base(SchemeKind::PolyShard, 3, 1);
    c.invalid_rate = 0.0;
    c.epochs = 200;
    let out = run(&c).unwrap();
    let lambdas: Vec<f64> = out.records.iter().map(|r| r.lambda_f64()).collect();
    assert!(lambdas.windows(2).all(|w| w[1] >= w[0]));
    assert!(*lambdas.last().unwrap() > 0.95 && *lambdas.last().unwrap() <= 1.0);
    assert!(tail_lambda(&out.records).unwrap() > 0.95);
}

#[test]
fn capacity_is_checked_and_excess_corruption_is_recorded() {
    let mut c = base(SchemeKind::PolyShard, 9, 2);
    c.adversary = AdversarySpec::new(Mu::new(4, 9), Strategy::RandomValues, 1).unwrap();
    c.strict = true;
    // K_max = 1 at this mu, so the run is refused up front.
    assert!(run(&c).is_err_and(|e| matches!(e, polyshard::sim::SimError::Scheme(_))));
    let mut c = base(SchemeKind::UncodedSharding, 9, 3);
    c.adversary =
        AdversarySpec::new(Mu::new(2, 9), Strategy::TargetedShard { shard: 0 }, 1).unwrap();
    let out = run(&c).unwrap();
    assert!(out.total_violations() > 0);
}
