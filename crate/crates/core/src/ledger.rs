//! Account-delta blocks, sub-chains, verification functions and a seeded
//! workload generator.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{ArithmeticCircuit, CircuitError};
use crate::field::Field;

/// Initial balance granted to every account by the genesis mint.
pub const DEFAULT_MINT: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("account {index} out of range for {accounts} accounts")]
    AccountOutOfRange { index: usize, accounts: usize },
    #[error("transaction sends to its own account {0}")]
    SelfTransfer(usize),
    #[error("transaction amount must be positive")]
    ZeroAmount,
    #[error("block has {actual} accounts, expected {expected}")]
    AccountMismatch { expected: usize, actual: usize },
    #[error("invalid rate {0} outside [0, 1]")]
    InvalidRate(f64),
    #[error("balances up to {max_balance} leave no headroom in a field of modulus {modulus}")]
    BalanceHeadroom { max_balance: u128, modulus: u64 },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    sender: usize,
    receiver: usize,
    amount: u64,
}

impl Transaction {
    pub fn new(sender: usize, receiver: usize, amount: u64) -> Result<Self, LedgerError> {
        if sender == receiver {
            return Err(LedgerError::SelfTransfer(sender));
        }
        if amount == 0 {
            return Err(LedgerError::ZeroAmount);
        }
        Ok(Transaction {
            sender,
            receiver,
            amount,
        })
    }

    pub fn sender(&self) -> usize {
        self.sender
    }

    pub fn receiver(&self) -> usize {
        self.receiver
    }

    pub fn amount(&self) -> u64 {
        self.amount
    }
}

/// Send and receive delta vectors of one shard at one epoch. Send entries
/// are non-positive, receive entries non-negative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block<E> {
    pub send: Vec<E>,
    pub receive: Vec<E>,
}

impl<E: Copy> Block<E> {
    pub fn zero<F: Field<Elem = E>>(field: &F, accounts: usize) -> Self {
        Block {
            send: vec![field.zero(); accounts],
            receive: vec![field.zero(); accounts],
        }
    }

    pub fn accounts(&self) -> usize {
        self.send.len()
    }

    pub fn is_zero<F: Field<Elem = E>>(&self, field: &F) -> bool {
        self.send
            .iter()
            .chain(&self.receive)
            .all(|&v| field.is_zero(v))
    }

    /// Genesis block crediting every account with `amount`.
    pub fn mint<F: Field<Elem = E>>(field: &F, accounts: usize, amount: u64) -> Self {
        Block {
            send: vec![field.zero(); accounts],
            receive: vec![field.from_u64(amount); accounts],
        }
    }

    /// Number of stored field elements.
    pub fn size(&self) -> usize {
        self.send.len() + self.receive.len()
    }
}

/// Net-sums the transfers of one block per account.
pub fn make_block<F: Field>(
    field: &F,
    txs: &[Transaction],
    accounts: usize,
) -> Result<Block<F::Elem>, LedgerError> {
    let mut block = Block::zero(field, accounts);
    for tx in txs {
        for index in [tx.sender, tx.receiver] {
            if index >= accounts {
                return Err(LedgerError::AccountOutOfRange { index, accounts });
            }
        }
        let amount = field.from_u64(tx.amount);
        block.send[tx.sender] = field.sub(block.send[tx.sender], amount);
        block.receive[tx.receiver] = field.add(block.receive[tx.receiver], amount);
    }
    Ok(block)
}

/// An uncoded shard history. Rejected epochs hold the all-zero block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubChain<E> {
    shard: usize,
    blocks: Vec<Block<E>>,
}

impl<E: Copy> SubChain<E> {
    pub fn new(shard: usize) -> Self {
        SubChain {
            shard,
            blocks: Vec::new(),
        }
    }

    pub fn with_blocks(shard: usize, blocks: Vec<Block<E>>) -> Self {
        SubChain { shard, blocks }
    }

    pub fn shard(&self) -> usize {
        self.shard
    }

    pub fn blocks(&self) -> &[Block<E>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn push(&mut self, block: Block<E>) {
        self.blocks.push(block);
    }

    /// Stored field elements.
    pub fn size(&self) -> usize {
        self.blocks.iter().map(Block::size).sum()
    }
}

fn check_accounts<E>(expected: usize, block: &Block<E>) -> Result<(), LedgerError> {
    if block.send.len() != expected || block.receive.len() != expected {
        return Err(LedgerError::AccountMismatch {
            expected,
            actual: block.send.len().max(block.receive.len()),
        });
    }
    Ok(())
}

/// `h = send + sum over history of (send + receive)`: the balance each
/// account would hold after paying out this block's sends. Costs `2M`
/// additions per history block.
pub fn verify_balance<F: Field>(
    field: &F,
    block: &Block<F::Elem>,
    history: &[Block<F::Elem>],
) -> Result<Vec<F::Elem>, LedgerError> {
    let accounts = block.send.len();
    check_accounts(accounts, block)?;
    let mut h = block.send.clone();
    for past in history {
        check_accounts(accounts, past)?;
        field.add_assign_slice(&mut h, &past.send);
        field.add_assign_slice(&mut h, &past.receive);
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcceptRule {
    /// Every entry has a non-negative signed representative.
    #[default]
    NonNegative,
    AllZero,
    Always,
}

impl AcceptRule {
    /// Fields without a signed representation reject under `NonNegative`.
    pub fn accepts<F: Field>(&self, field: &F, h: &[F::Elem]) -> bool {
        match self {
            AcceptRule::NonNegative => h
                .iter()
                .all(|&v| matches!(field.signed_repr(v), Ok(s) if s >= 0)),
            AcceptRule::AllZero => h.iter().all(|&v| field.is_zero(v)),
            AcceptRule::Always => true,
        }
    }
}

/// The per-shard check `f^t` and its accept set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerificationFn {
    /// Balance check, degree one.
    Balance,
    /// The circuit applied to consecutive windows of the balance vector,
    /// each window zero-padded to the circuit's input arity. Outputs are
    /// concatenated window by window.
    Circuit {
        circuit: Arc<ArithmeticCircuit>,
        accept: AcceptRule,
    },
}

impl VerificationFn {
    pub fn circuit(circuit: ArithmeticCircuit, accept: AcceptRule) -> Self {
        VerificationFn::Circuit {
            circuit: Arc::new(circuit),
            accept,
        }
    }

    /// Total degree in the block and history entries.
    pub fn degree(&self) -> u32 {
        match self {
            VerificationFn::Balance => 1,
            VerificationFn::Circuit { circuit, .. } => circuit.degree(),
        }
    }

    pub fn accept_rule(&self) -> AcceptRule {
        match self {
            VerificationFn::Balance => AcceptRule::NonNegative,
            VerificationFn::Circuit { accept, .. } => *accept,
        }
    }

    pub fn as_circuit(&self) -> Option<&ArithmeticCircuit> {
        match self {
            VerificationFn::Balance => None,
            VerificationFn::Circuit { circuit, .. } => Some(circuit),
        }
    }

    /// Output length for `accounts` accounts.
    pub fn output_len(&self, accounts: usize) -> usize {
        match self {
            VerificationFn::Balance => accounts,
            VerificationFn::Circuit { circuit, .. } => {
                windows(accounts, circuit.inputs()) * circuit.outputs()
            }
        }
    }

    pub fn evaluate<F: Field>(
        &self,
        field: &F,
        block: &Block<F::Elem>,
        history: &[Block<F::Elem>],
    ) -> Result<Vec<F::Elem>, LedgerError> {
        let h = verify_balance(field, block, history)?;
        self.finish(field, h)
    }

    /// Applies the non-linear stage to a balance vector.
    pub fn finish<F: Field>(
        &self,
        field: &F,
        h: Vec<F::Elem>,
    ) -> Result<Vec<F::Elem>, LedgerError> {
        match self {
            VerificationFn::Balance => Ok(h),
            VerificationFn::Circuit { circuit, .. } => {
                let mut out = Vec::with_capacity(self.output_len(h.len()));
                for window in window_inputs(field, &h, circuit.inputs()) {
                    out.extend(crate::circuit::eval_circuit(field, circuit, &window)?);
                }
                Ok(out)
            }
        }
    }

    pub fn accept<F: Field>(&self, field: &F, h: &[F::Elem]) -> bool {
        self.accept_rule().accepts(field, h)
    }
}

/// `ceil(len / arity)`, at least one window.
pub fn windows(len: usize, arity: usize) -> usize {
    if arity == 0 {
        return 1;
    }
    len.div_ceil(arity).max(1)
}

/// Splits `h` into zero-padded windows of `arity` entries.
pub fn window_inputs<F: Field>(field: &F, h: &[F::Elem], arity: usize) -> Vec<Vec<F::Elem>> {
    (0..windows(h.len(), arity))
        .map(|w| {
            (0..arity)
                .map(|j| {
                    h.get(w * arity + j)
                        .copied()
                        .unwrap_or_else(|| field.zero())
                })
                .collect()
        })
        .collect()
}

pub fn accept<F: Field>(field: &F, h: &[F::Elem], vf: &VerificationFn) -> bool {
    vf.accept(field, h)
}

/// `e = 1` keeps the block, `e = 0` replaces it with the zero block.
pub fn finalize<F: Field>(field: &F, block: &Block<F::Elem>, accepted: bool) -> Block<F::Elem> {
    if accepted {
        block.clone()
    } else {
        Block::zero(field, block.accounts())
    }
}

/// Proposed transactions for every epoch and shard, following a genesis
/// mint of `initial_balance` per account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workload {
    pub shards: usize,
    pub accounts: usize,
    pub initial_balance: u64,
    /// `epochs[t][k]` is shard `k`'s proposal at epoch `t + 1`.
    pub epochs: Vec<Vec<Vec<Transaction>>>,
    /// Whether the generator built each proposal to pass the balance check.
    pub intended_valid: Vec<Vec<bool>>,
}

impl Workload {
    pub fn epoch_count(&self) -> usize {
        self.epochs.len()
    }

    pub fn mint_block<F: Field>(&self, field: &F) -> Block<F::Elem> {
        Block::mint(field, self.accounts, self.initial_balance)
    }

    /// The K proposed blocks of zero-based epoch `epoch`.
    pub fn proposals<F: Field>(
        &self,
        field: &F,
        epoch: usize,
    ) -> Result<Vec<Block<F::Elem>>, LedgerError> {
        self.epochs[epoch]
            .iter()
            .map(|txs| make_block(field, txs, self.accounts))
            .collect()
    }

    /// Largest balance any account can reach; transfers conserve the total.
    pub fn max_balance(&self) -> u128 {
        self.accounts as u128 * self.initial_balance as u128
    }

    /// Requires all balances, and overspends below them, to stay within a
    /// quarter of the prime modulus.
    pub fn check_headroom(&self, modulus: u64) -> Result<(), LedgerError> {
        let max_balance = self.max_balance() + OVERSPEND_MAX as u128;
        if max_balance >= (modulus as u128 - 1) / 4 {
            return Err(LedgerError::BalanceHeadroom {
                max_balance,
                modulus,
            });
        }
        Ok(())
    }
}

const OVERSPEND_MAX: u64 = 100;
const AMOUNT_MAX: u64 = 100;

/// Seeded proposals. A valid block holds up to `max(1, M / 10)` transfers
/// that never spend more than the sender's balance. With probability
/// `invalid_rate` a block instead overspends one account.
pub fn gen_workload(
    seed: u64,
    shards: usize,
    accounts: usize,
    epochs: usize,
    invalid_rate: f64,
) -> Result<Workload, LedgerError> {
    gen_workload_with_mint(seed, shards, accounts, epochs, invalid_rate, DEFAULT_MINT)
}

pub fn gen_workload_with_mint(
    seed: u64,
    shards: usize,
    accounts: usize,
    epochs: usize,
    invalid_rate: f64,
    initial_balance: u64,
) -> Result<Workload, LedgerError> {
    if !(0.0..=1.0).contains(&invalid_rate) {
        return Err(LedgerError::InvalidRate(invalid_rate));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut balances = vec![vec![initial_balance; accounts]; shards];
    let max_txs = (accounts / 10).max(1);
    let mut all = Vec::with_capacity(epochs);
    let mut intended = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let mut epoch = Vec::with_capacity(shards);
        let mut flags = Vec::with_capacity(shards);
        for bal in balances.iter_mut() {
            if accounts < 2 {
                epoch.push(Vec::new());
                flags.push(true);
                continue;
            }
            let invalid = rng.gen_bool(invalid_rate);
            let mut txs = Vec::new();
            if invalid {
                let sender = rng.gen_range(0..accounts);
                let receiver = (sender + rng.gen_range(1..accounts)) % accounts;
                let amount = bal[sender] + rng.gen_range(1..=OVERSPEND_MAX);
                txs.push(Transaction {
                    sender,
                    receiver,
                    amount,
                });
            } else {
                let mut spendable = bal.clone();
                for _ in 0..rng.gen_range(1..=max_txs) {
                    let sender = rng.gen_range(0..accounts);
                    if spendable[sender] == 0 {
                        continue;
                    }
                    let receiver = (sender + rng.gen_range(1..accounts)) % accounts;
                    let amount = rng.gen_range(1..=spendable[sender].min(AMOUNT_MAX));
                    spendable[sender] -= amount;
                    txs.push(Transaction {
                        sender,
                        receiver,
                        amount,
                    });
                }
                for tx in &txs {
                    bal[tx.sender] -= tx.amount;
                    bal[tx.receiver] += tx.amount;
                }
            }
            epoch.push(txs);
            flags.push(!invalid);
        }
        all.push(epoch);
        intended.push(flags);
    }
    Ok(Workload {
        shards,
        accounts,
        initial_balance,
        epochs: all,
        intended_valid: intended,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Counted, PrimeField};

    fn gf17() -> PrimeField {
        PrimeField::new(17).unwrap()
    }

    fn signed(f: &PrimeField, v: &[crate::field::Fp]) -> Vec<i64> {
        v.iter().map(|&x| f.signed_repr(x).unwrap()).collect()
    }

    #[test]
    fn block_examples() {
        let f = PrimeField::mersenne61();
        let empty = make_block(&f, &[], 3).unwrap();
        assert!(empty.is_zero(&f));
        let one = make_block(&f, &[Transaction::new(0, 1, 5).unwrap()], 3).unwrap();
        assert_eq!(signed(&f, &one.send), vec![-5, 0, 0]);
        assert_eq!(signed(&f, &one.receive), vec![0, 5, 0]);
        let two = make_block(
            &f,
            &[
                Transaction::new(0, 1, 5).unwrap(),
                Transaction::new(2, 1, 2).unwrap(),
            ],
            3,
        )
        .unwrap();
        assert_eq!(signed(&f, &two.send), vec![-5, 0, -2]);
        assert_eq!(signed(&f, &two.receive), vec![0, 7, 0]);
        assert!(matches!(
            make_block(&f, &[Transaction::new(0, 3, 1).unwrap()], 3),
            Err(LedgerError::AccountOutOfRange { index: 3, .. })
        ));
        assert_eq!(Transaction::new(1, 1, 1), Err(LedgerError::SelfTransfer(1)));
        assert_eq!(Transaction::new(0, 1, 0), Err(LedgerError::ZeroAmount));
    }

    #[test]
    fn balance_examples() {
        let f = gf17();
        let block = make_block(&f, &[Transaction::new(0, 1, 5).unwrap()], 3).unwrap();
        let h = verify_balance(&f, &block, &[]).unwrap();
        assert_eq!(f.signed_repr(h[0]).unwrap(), -5);
        assert!(!accept(&f, &h, &VerificationFn::Balance));

        let funded = Block {
            send: vec![f.zero(); 3],
            receive: vec![f.elem(10), f.zero(), f.zero()],
        };
        let h = verify_balance(&f, &block, &[funded]).unwrap();
        assert_eq!(signed(&f, &h), vec![5, 0, 0]);
        assert!(accept(&f, &h, &VerificationFn::Balance));
        assert!(accept(&f, &[f.zero(); 3], &VerificationFn::Balance));
        assert!(!accept(&f, &[f.elem(16)], &VerificationFn::Balance));
    }

    #[test]
    fn balance_cost_is_two_m_per_history_block() {
        let f = PrimeField::mersenne61();
        let counted = Counted::new(&f);
        let blocks: Vec<_> = (0..4).map(|_| Block::mint(&counted, 7, 3)).collect();
        let _ = counted.take();
        verify_balance(&counted, &Block::zero(&counted, 7), &blocks).unwrap();
        assert_eq!(counted.counts().additions, 2 * 7 * 4);
        assert_eq!(counted.counts().multiplications, 0);
    }

    #[test]
    fn finalize_examples() {
        let f = gf17();
        let b = make_block(&f, &[Transaction::new(0, 1, 5).unwrap()], 2).unwrap();
        assert_eq!(finalize(&f, &b, true), b);
        assert!(finalize(&f, &b, false).is_zero(&f));
        let z = Block::zero(&f, 2);
        assert_eq!(finalize(&f, &z, true), z);
    }

    #[test]
    fn accept_rules() {
        let f = gf17();
        assert!(AcceptRule::AllZero.accepts(&f, &[f.zero()]));
        assert!(!AcceptRule::AllZero.accepts(&f, &[f.one()]));
        assert!(AcceptRule::Always.accepts(&f, &[f.elem(16)]));
        let gf16 = crate::field::BinaryField::new(4).unwrap();
        assert!(!AcceptRule::NonNegative.accepts(&gf16, &[gf16.one()]));
    }

    #[test]
    fn circuit_windows_pad_with_zero() {
        let f = gf17();
        let c = ArithmeticCircuit::parse("layer 1 add a x1\nlayer 1 add b x2\nlayer 1 mul m a b\n")
            .unwrap();
        let vf = VerificationFn::circuit(c, AcceptRule::Always);
        assert_eq!(vf.degree(), 2);
        assert_eq!(vf.output_len(5), 3);
        let h = vec![f.elem(2), f.elem(3), f.elem(4), f.elem(5), f.elem(6)];
        assert_eq!(
            vf.finish(&f, h).unwrap(),
            vec![f.elem(6), f.elem(3), f.zero()]
        );
    }

    #[test]
    fn workload_is_deterministic_and_flags_match_verification() {
        let f = PrimeField::mersenne61();
        let w = gen_workload(9, 3, 20, 30, 0.3).unwrap();
        assert_eq!(w, gen_workload(9, 3, 20, 30, 0.3).unwrap());
        assert_ne!(w, gen_workload(10, 3, 20, 30, 0.3).unwrap());
        let mut chains: Vec<Vec<_>> = (0..3).map(|_| vec![w.mint_block(&f)]).collect();
        let mut saw_invalid = false;
        for t in 0..w.epoch_count() {
            for (k, block) in w.proposals(&f, t).unwrap().into_iter().enumerate() {
                let h = verify_balance(&f, &block, &chains[k]).unwrap();
                let e = accept(&f, &h, &VerificationFn::Balance);
                assert_eq!(e, w.intended_valid[t][k], "epoch {t} shard {k}");
                saw_invalid |= !e;
                chains[k].push(finalize(&f, &block, e));
            }
        }
        assert!(saw_invalid);
        // Conservation: cumulative balances sum to the minted total.
        for chain in &chains {
            let total: i64 = chain
                .iter()
                .flat_map(|b| b.send.iter().chain(&b.receive))
                .map(|&v| f.signed_repr(v).unwrap())
                .sum();
            assert_eq!(total, 20 * DEFAULT_MINT as i64);
        }
    }

    #[test]
    fn workload_rates() {
        let w = gen_workload(1, 2, 10, 20, 0.0).unwrap();
        assert!(w.intended_valid.iter().flatten().all(|&v| v));
        let w = gen_workload(1, 2, 10, 20, 1.0).unwrap();
        assert!(w.intended_valid.iter().flatten().all(|&v| !v));
        assert!(gen_workload(1, 2, 10, 20, 1.5).is_err());
        assert!(w.check_headroom(crate::field::MERSENNE_61).is_ok());
        assert!(w.check_headroom(40_009).is_err());
    }
}
