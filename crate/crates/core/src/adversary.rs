//! Byzantine node selection and message corruption.
//!
//! The adversary picks its nodes after the shard assignment is known and
//! may pick again every epoch. Corrupted nodes keep honest storage; only
//! their broadcasts are replaced.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::Field;
use crate::schemes::{check_mu, Message, Mu, SchemeError};

/// Largest network searched exhaustively.
pub const MAX_SEARCH_NODES: usize = 20;

/// Scores a candidate corrupted set; higher is more damaging.
pub type DamageFn<'a> = &'a mut dyn FnMut(&[usize]) -> u64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Mu(#[from] SchemeError),
    #[error("worst-case search is limited to {MAX_SEARCH_NODES} nodes, got {0}")]
    SearchTooLarge(usize),
    #[error("worst-case search needs a damage function")]
    NoDamageFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    /// Uniform subset.
    #[default]
    RandomValues,
    /// Nodes of `shard` first, then the remaining nodes in index order.
    TargetedShard { shard: usize },
    /// Exhaustive search for the most damaging subset.
    WorstCaseSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub mu: Mu,
    pub strategy: Strategy,
    pub seed: u64,
}

impl AdversarySpec {
    pub fn new(mu: Mu, strategy: Strategy, seed: u64) -> Result<Self, AdversaryError> {
        check_mu(mu)?;
        Ok(AdversarySpec { mu, strategy, seed })
    }

    pub fn honest() -> Self {
        AdversarySpec {
            mu: Mu::from_integer(0),
            strategy: Strategy::RandomValues,
            seed: 0,
        }
    }

    /// `floor(mu N)`.
    pub fn corrupted_count(&self, nodes: usize) -> usize {
        (self.mu * nodes as i64).floor().to_integer().max(0) as usize
    }

    /// Deterministic stream for one epoch.
    pub fn epoch_rng(&self, epoch: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(epoch);
        rng
    }

    /// Picks the corrupted set for `epoch`. `assignment[i]` is node `i`'s
    /// shard under uncoded sharding. `damage` scores a candidate set for
    /// worst-case search; ties keep the lexicographically first subset.
    pub fn select(
        &self,
        epoch: u64,
        assignment: &[Option<usize>],
        damage: Option<DamageFn<'_>>,
    ) -> Result<BTreeSet<usize>, AdversaryError> {
        let nodes = assignment.len();
        let count = self.corrupted_count(nodes).min(nodes);
        if count == 0 {
            return Ok(BTreeSet::new());
        }
        match self.strategy {
            Strategy::RandomValues => {
                let mut rng = self.epoch_rng(epoch);
                Ok(sample(&mut rng, nodes, count).into_iter().collect())
            }
            Strategy::TargetedShard { shard } => {
                let first = (0..nodes).filter(|&i| assignment[i] == Some(shard));
                let rest = (0..nodes).filter(|&i| assignment[i] != Some(shard));
                Ok(first.chain(rest).take(count).collect())
            }
            Strategy::WorstCaseSearch => {
                let damage = damage.ok_or(AdversaryError::NoDamageFunction)?;
                Ok(worst_case_search(nodes, count, damage)?
                    .into_iter()
                    .collect())
            }
        }
    }
}

/// Exhaustive search over all `count`-subsets of `nodes` maximizing
/// `damage`; the first maximizer in lexicographic order wins.
pub fn worst_case_search(
    nodes: usize,
    count: usize,
    damage: &mut dyn FnMut(&[usize]) -> u64,
) -> Result<Vec<usize>, AdversaryError> {
    if nodes > MAX_SEARCH_NODES {
        return Err(AdversaryError::SearchTooLarge(nodes));
    }
    let count = count.min(nodes);
    let mut subset: Vec<usize> = (0..count).collect();
    let mut best = subset.clone();
    let mut best_score = damage(&subset);
    while next_combination(&mut subset, nodes) {
        let score = damage(&subset);
        if score > best_score {
            best_score = score;
            best.clone_from(&subset);
        }
    }
    Ok(best)
}

/// Advances `c` to the next `c.len()`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// Random message of the same shape that differs from `honest` in at
/// least one coordinate (when the message is non-empty).
pub fn corrupt_message<F: Field, R: rand::Rng + ?Sized>(
    field: &F,
    honest: &Message<F::Elem>,
    rng: &mut R,
) -> Message<F::Elem> {
    let mut out: Message<F::Elem> = honest
        .iter()
        .map(|part| part.iter().map(|_| field.random(rng)).collect())
        .collect();
    if out == *honest {
        if let Some(slot) = out.iter_mut().find_map(|p| p.first_mut()) {
            *slot = field.add(*slot, field.one());
        }
    }
    out
}

/// Single-vector variant of [`corrupt_message`].
pub fn corrupt_vector<F: Field, R: rand::Rng + ?Sized>(
    field: &F,
    honest: &[F::Elem],
    rng: &mut R,
) -> Vec<F::Elem> {
    let mut out: Vec<F::Elem> = honest.iter().map(|_| field.random(rng)).collect();
    if out == honest {
        if let Some(slot) = out.first_mut() {
            *slot = field.add(*slot, field.one());
        }
    }
    out
}

/// Replaces the vectors of every node in `corrupted`.
pub fn corrupt_vectors<F: Field, R: rand::Rng + ?Sized>(
    field: &F,
    vectors: &mut [Vec<F::Elem>],
    corrupted: &BTreeSet<usize>,
    rng: &mut R,
) {
    for &i in corrupted {
        vectors[i] = corrupt_vector(field, &vectors[i], rng);
    }
}

/// Replaces the broadcasts of every node in `corrupted`.
pub fn corrupt_all<F: Field, R: rand::Rng + ?Sized>(
    field: &F,
    messages: &mut [Message<F::Elem>],
    corrupted: &BTreeSet<usize>,
    rng: &mut R,
) {
    for &i in corrupted {
        messages[i] = corrupt_message(field, &messages[i], rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn spec(mu: (i64, i64), strategy: Strategy) -> AdversarySpec {
        AdversarySpec::new(Mu::new(mu.0, mu.1), strategy, 7).unwrap()
    }

    #[test]
    fn count_is_floor_mu_n() {
        assert_eq!(spec((1, 3), Strategy::RandomValues).corrupted_count(16), 5);
        assert_eq!(spec((0, 1), Strategy::RandomValues).corrupted_count(16), 0);
        assert!(AdversarySpec::new(Mu::new(1, 2), Strategy::RandomValues, 0).is_err());
    }

    #[test]
    fn zero_mu_selects_nobody() {
        let s = spec((0, 1), Strategy::WorstCaseSearch);
        assert!(s.select(0, &[None; 10], None).unwrap().is_empty());
    }

    #[test]
    fn random_selection_is_seeded() {
        let s = spec((1, 3), Strategy::RandomValues);
        let a = s.select(4, &[None; 30], None).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, s.select(4, &[None; 30], None).unwrap());
        assert_ne!(a, s.select(5, &[None; 30], None).unwrap());
    }

    #[test]
    fn targeted_fills_one_shard() {
        let assignment: Vec<Option<usize>> = (0..30).map(|i| Some(i / 10)).collect();
        let s = spec((2, 5), Strategy::TargetedShard { shard: 1 });
        let chosen = s.select(0, &assignment, None).unwrap();
        assert_eq!(chosen.len(), 12);
        assert!((10..20).all(|i| chosen.contains(&i)));
    }

    #[test]
    fn exhaustive_search_visits_every_subset() {
        let mut seen = Vec::new();
        let best = worst_case_search(6, 3, &mut |s: &[usize]| {
            seen.push(s.to_vec());
            s.iter().map(|&i| i as u64 * i as u64).sum()
        })
        .unwrap();
        assert_eq!(seen.len(), 20);
        assert_eq!(best, vec![3, 4, 5]);
        assert!(worst_case_search(21, 2, &mut |_: &[usize]| 0).is_err());
        assert!(spec((1, 3), Strategy::WorstCaseSearch)
            .select(0, &[None; 6], None)
            .is_err());
    }

    #[test]
    fn corruption_changes_message_and_keeps_shape() {
        let f = PrimeField::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let honest = vec![vec![f.zero(), f.one()], vec![f.one()]];
        for _ in 0..50 {
            let bad = corrupt_message(&f, &honest, &mut rng);
            assert_ne!(bad, honest);
            assert_eq!(bad.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 1]);
        }
    }
}
