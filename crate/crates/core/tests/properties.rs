use std::collections::BTreeMap;

use polyshard::circuit::{bundled, eval_circuit, ArithmeticCircuit, CircuitDescription, GateKind};
use polyshard::field::{Field, Fp, PrimeField};
use polyshard::ledger::{accept, finalize, gen_workload, verify_balance, Block, VerificationFn};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn f61() -> PrimeField {
    PrimeField::mersenne61()
}

fn random_block(f: &PrimeField, m: usize, rng: &mut ChaCha8Rng) -> Block<Fp> {
    Block {
        send: (0..m).map(|_| f.random(rng)).collect(),
        receive: (0..m).map(|_| f.random(rng)).collect(),
    }
}

fn combine(f: &PrimeField, a: Fp, x: &Block<Fp>, b: Fp, y: &Block<Fp>) -> Block<Fp> {
    let mix = |u: &[Fp], v: &[Fp]| {
        u.iter()
            .zip(v)
            .map(|(&p, &q)| f.add(f.mul(a, p), f.mul(b, q)))
            .collect()
    };
    Block {
        send: mix(&x.send, &y.send),
        receive: mix(&x.receive, &y.receive),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn balance_check_is_linear(seed in any::<u64>(), m in 1usize..8, len in 0usize..6) {
        let f = f61();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (f.random(&mut rng), f.random(&mut rng));
        let x = random_block(&f, m, &mut rng);
        let y = random_block(&f, m, &mut rng);
        let hx: Vec<_> = (0..len).map(|_| random_block(&f, m, &mut rng)).collect();
        let hy: Vec<_> = (0..len).map(|_| random_block(&f, m, &mut rng)).collect();
        let mixed_hist: Vec<_> = hx.iter().zip(&hy).map(|(p, q)| combine(&f, a, p, b, q)).collect();
        let lhs = verify_balance(&f, &combine(&f, a, &x, b, &y), &mixed_hist).unwrap();
        let rx = verify_balance(&f, &x, &hx).unwrap();
        let ry = verify_balance(&f, &y, &hy).unwrap();
        let rhs: Vec<_> = rx.iter().zip(&ry).map(|(&p, &q)| f.add(f.mul(a, p), f.mul(b, q))).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn verified_chains_conserve_and_stay_non_negative(seed in any::<u64>(), rate in 0.0f64..1.0) {
        let f = f61();
        let w = gen_workload(seed, 2, 6, 15, rate).unwrap();
        for k in 0..2 {
            let mut chain = vec![w.mint_block(&f)];
            for t in 0..w.epoch_count() {
                let p = &w.proposals(&f, t).unwrap()[k];
                let h = verify_balance(&f, p, &chain).unwrap();
                chain.push(finalize(&f, p, accept(&f, &h, &VerificationFn::Balance)));
                let balances = verify_balance(&f, &Block::zero(&f, 6), &chain).unwrap();
                let signed: Vec<i64> = balances.iter().map(|&v| f.signed_repr(v).unwrap()).collect();
                prop_assert!(signed.iter().all(|&s| s >= 0));
                prop_assert_eq!(signed.iter().sum::<i64>(), 6 * w.initial_balance as i64);
            }
        }
    }
}

fn direct(name: &str, f: &PrimeField, x: &[Fp]) -> Fp {
    match name {
        "iter_ex" => {
            let s = |idx: &[usize]| idx.iter().fold(f.zero(), |acc, &i| f.add(acc, x[i - 1]));
            [s(&[2, 3]), s(&[3, 4]), s(&[1, 2, 3, 4]), s(&[2, 3, 4, 5])]
                .iter()
                .fold(f.one(), |acc, &v| f.mul(acc, v))
        }
        "pair_product" => f.mul(x[0], x[1]),
        "square_sum" => {
            let s = f.add(f.add(x[0], x[1]), f.one());
            f.mul(s, s)
        }
        other => panic!("no oracle for {other}"),
    }
}

#[test]
fn bundled_circuits_match_composed_polynomials() {
    let f = f61();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, text) in bundled::ALL {
        let c = ArithmeticCircuit::parse(text).unwrap();
        for _ in 0..200 {
            let x: Vec<Fp> = (0..c.inputs()).map(|_| f.random(&mut rng)).collect();
            assert_eq!(
                eval_circuit(&f, &c, &x).unwrap(),
                vec![direct(name, &f, &x)],
                "{name}"
            );
        }
    }
}

/// Sparse integer polynomial: exponent vector -> coefficient.
type Sym = BTreeMap<Vec<u32>, i64>;

fn sym_add(a: &Sym, b: &Sym) -> Sym {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(k.clone()).or_insert(0) += v;
    }
    out.retain(|_, v| *v != 0);
    out
}

fn sym_mul(a: &Sym, b: &Sym) -> Sym {
    let mut out = Sym::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            *out.entry(k).or_insert(0) += va * vb;
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

/// Symbolic expansion of the description, input by input.
fn expand(desc: &CircuitDescription, inputs: usize) -> Vec<Sym> {
    let mut env: BTreeMap<String, Sym> = BTreeMap::new();
    for j in 1..=inputs {
        let mut e = vec![0; inputs];
        e[j - 1] = 1;
        env.insert(format!("x{j}"), Sym::from([(e, 1)]));
    }
    let layers = desc.gates.iter().map(|g| g.layer).max().unwrap();
    let mut last = Vec::new();
    for l in 1..=layers {
        let mut muls: Vec<(String, Sym)> = Vec::new();
        for g in desc.gates.iter().filter(|g| g.layer == l) {
            let operands: Vec<Sym> = g
                .operands
                .iter()
                .map(|o| match o.parse::<i64>() {
                    Ok(c) => Sym::from([(vec![0; inputs], c)]),
                    Err(_) => env[o].clone(),
                })
                .collect();
            let value = match g.kind {
                GateKind::Add => operands.iter().fold(Sym::new(), |acc, o| sym_add(&acc, o)),
                GateKind::Mul => sym_mul(&operands[0], &operands[1]),
            };
            if g.kind == GateKind::Mul {
                muls.push((g.id.clone(), value.clone()));
            }
            env.insert(g.id.clone(), value);
        }
        last = muls.into_iter().map(|(_, v)| v).collect();
    }
    last
}

#[test]
fn recorded_degree_matches_symbolic_expansion() {
    for (name, text) in bundled::ALL {
        let c = ArithmeticCircuit::parse(text).unwrap();
        let desc = CircuitDescription::parse(text).unwrap();
        let polys = expand(&desc, c.inputs());
        let degree = polys
            .iter()
            .flat_map(|p| p.keys().map(|e| e.iter().sum::<u32>()))
            .max()
            .unwrap();
        assert_eq!(c.degree(), degree, "{name}");
        assert!(c.degree() <= 1 << c.layers().len());
    }
}

#[test]
fn bundled_iter_ex_has_the_documented_wiring() {
    let c = ArithmeticCircuit::parse(bundled::ITER_EX).unwrap();
    assert_eq!(c.inputs(), 5);
    assert_eq!(c.layers()[0].outputs(), 3);
    assert_eq!(c.layers()[1].outputs(), 1);
    let f = PrimeField::new(17).unwrap();
    assert_eq!(
        eval_circuit(&f, &c, &[f.one(); 5]).unwrap(),
        vec![f.elem(13)]
    );
}
