//! Polynomials over a [`Field`]: Lagrange coding, interpolation and
//! Reed-Solomon decoding.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::field::{Field, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("evaluation points are not pairwise distinct")]
    DuplicatePoint,
    #[error("no points to interpolate")]
    Empty,
    #[error("invalid code dimension {dim} for length {len}")]
    InvalidDimension { dim: usize, len: usize },
    #[error("field has {size} elements, too few for {needed} distinct points")]
    FieldTooSmall { size: u64, needed: u64 },
    #[error("no codeword within {max_errors} errors")]
    DecodeFailure { max_errors: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Evaluation points: `omegas[k]` for shard `k` and `alphas[i]` for node `i`
/// (both zero-based here).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationGrid<E> {
    omegas: Vec<E>,
    alphas: Vec<E>,
}

impl<E: Copy + Eq + std::hash::Hash> EvaluationGrid<E> {
    pub fn new(omegas: Vec<E>, alphas: Vec<E>) -> Result<Self, PolyError> {
        let mut seen = HashSet::with_capacity(omegas.len() + alphas.len());
        if !omegas.iter().chain(&alphas).all(|p| seen.insert(*p)) {
            return Err(PolyError::DuplicatePoint);
        }
        Ok(EvaluationGrid { omegas, alphas })
    }

    /// `omega_k = k` for `k = 1..=K` and `alpha_i = K + i` for `i = 1..=N`.
    pub fn standard<F: Field<Elem = E>>(
        field: &F,
        shards: usize,
        nodes: usize,
    ) -> Result<Self, PolyError> {
        let needed = (shards + nodes) as u64;
        if needed >= field.size() {
            return Err(PolyError::FieldTooSmall {
                size: field.size(),
                needed: needed + 1,
            });
        }
        let omegas = (1..=shards as u64).map(|k| field.element(k)).collect();
        let alphas = (1..=nodes as u64)
            .map(|i| field.element(shards as u64 + i))
            .collect();
        Self::new(omegas, alphas)
    }

    pub fn omegas(&self) -> &[E] {
        &self.omegas
    }

    pub fn alphas(&self) -> &[E] {
        &self.alphas
    }

    pub fn shards(&self) -> usize {
        self.omegas.len()
    }

    pub fn nodes(&self) -> usize {
        self.alphas.len()
    }
}

/// Dense polynomial, lowest-degree coefficient first. The zero polynomial
/// has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial<E> {
    coeffs: Vec<E>,
}

impl<E: Copy + Eq> Polynomial<E> {
    pub fn new<F: Field<Elem = E>>(field: &F, mut coeffs: Vec<E>) -> Self {
        while coeffs.last().is_some_and(|&c| field.is_zero(c)) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval<F: Field<Elem = E>>(&self, field: &F, x: E) -> E {
        let mut acc = field.zero();
        let mut iter = self.coeffs.iter().rev();
        if let Some(&lead) = iter.next() {
            acc = lead;
            for &c in iter {
                acc = field.add(field.mul(acc, x), c);
            }
        }
        acc
    }

    pub fn mul<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        Self::new(field, out)
    }

    /// Long division; `divisor` must be nonzero.
    pub fn div_rem<F: Field<Elem = E>>(
        &self,
        field: &F,
        divisor: &Self,
    ) -> Result<(Self, Self), FieldError> {
        let lead = *divisor.coeffs.last().ok_or(FieldError::DivisionByZero)?;
        let lead_inv = field.inv(lead)?;
        let dlen = divisor.coeffs.len();
        if self.coeffs.len() < dlen {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![field.zero(); rem.len() - dlen + 1];
        for shift in (0..quot.len()).rev() {
            let top = rem[shift + dlen - 1];
            if field.is_zero(top) {
                continue;
            }
            let q = field.mul(top, lead_inv);
            quot[shift] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[shift + j] = field.sub(rem[shift + j], field.mul(q, d));
            }
        }
        rem.truncate(dlen - 1);
        Ok((Self::new(field, quot), Self::new(field, rem)))
    }
}

/// Matrix `W` with `W[t][j] = prod_{i != j} (targets[t] - xs[i]) / (xs[j] - xs[i])`,
/// so that `p(targets[t]) = sum_j W[t][j] * p(xs[j])` for every polynomial
/// of degree `< xs.len()`.
pub fn lagrange_matrix<F: Field>(
    field: &F,
    xs: &[F::Elem],
    targets: &[F::Elem],
) -> Result<Vec<Vec<F::Elem>>, PolyError> {
    if xs.is_empty() {
        return Err(PolyError::Empty);
    }
    let n = xs.len();
    // Barycentric weights 1 / prod_{i != j} (x_j - x_i).
    let mut weights = Vec::with_capacity(n);
    for (j, &xj) in xs.iter().enumerate() {
        let mut denom = field.one();
        for (i, &xi) in xs.iter().enumerate() {
            if i != j {
                denom = field.mul(denom, field.sub(xj, xi));
            }
        }
        let w = field.inv(denom).map_err(|_| PolyError::DuplicatePoint)?;
        weights.push(w);
    }
    let mut rows = Vec::with_capacity(targets.len());
    for &t in targets {
        if let Some(pos) = xs.iter().position(|&x| x == t) {
            let mut row = vec![field.zero(); n];
            row[pos] = field.one();
            rows.push(row);
            continue;
        }
        let diffs: Vec<F::Elem> = xs.iter().map(|&x| field.sub(t, x)).collect();
        // suffix[j] = prod_{i >= j} diffs[i]
        let mut suffix = vec![field.one(); n + 1];
        for j in (0..n).rev() {
            suffix[j] = field.mul(suffix[j + 1], diffs[j]);
        }
        let mut prefix = field.one();
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(field.mul(field.mul(prefix, suffix[j + 1]), weights[j]));
            prefix = field.mul(prefix, diffs[j]);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Lagrange coefficients of node `node` (zero-based):
/// `l_k = prod_{j != k} (alpha - omega_j) / (omega_k - omega_j)`.
pub fn lagrange_coeffs<F: Field>(
    field: &F,
    grid: &EvaluationGrid<F::Elem>,
    node: usize,
) -> Result<Vec<F::Elem>, PolyError> {
    let alpha = *grid.alphas.get(node).ok_or(PolyError::LengthMismatch {
        expected: grid.alphas.len(),
        actual: node + 1,
    })?;
    lagrange_coeffs_at(field, grid.omegas(), alpha)
}

/// Lagrange coefficients for an arbitrary evaluation point.
pub fn lagrange_coeffs_at<F: Field>(
    field: &F,
    omegas: &[F::Elem],
    x: F::Elem,
) -> Result<Vec<F::Elem>, PolyError> {
    Ok(lagrange_matrix(field, omegas, &[x])?.remove(0))
}

/// The full `N x K` coefficient table of a grid.
pub fn lagrange_table<F: Field>(
    field: &F,
    grid: &EvaluationGrid<F::Elem>,
) -> Result<Vec<Vec<F::Elem>>, PolyError> {
    lagrange_matrix(field, grid.omegas(), grid.alphas())
}

/// `sum_k coeffs[k] * values[k]`.
pub fn encode_at<F: Field>(
    field: &F,
    coeffs: &[F::Elem],
    values: &[F::Elem],
) -> Result<F::Elem, PolyError> {
    if coeffs.len() != values.len() {
        return Err(PolyError::LengthMismatch {
            expected: coeffs.len(),
            actual: values.len(),
        });
    }
    let mut terms = coeffs.iter().zip(values).map(|(&l, &v)| field.mul(l, v));
    let first = terms.next().ok_or(PolyError::Empty)?;
    Ok(terms.fold(first, |acc, t| field.add(acc, t)))
}

/// Elementwise `sum_k coeffs[k] * vectors[k]`.
pub fn encode_vectors<F: Field, V: AsRef<[F::Elem]>>(
    field: &F,
    coeffs: &[F::Elem],
    vectors: &[V],
) -> Result<Vec<F::Elem>, PolyError> {
    if coeffs.len() != vectors.len() {
        return Err(PolyError::LengthMismatch {
            expected: coeffs.len(),
            actual: vectors.len(),
        });
    }
    let (first, rest) = vectors.split_first().ok_or(PolyError::Empty)?;
    let len = first.as_ref().len();
    let mut out = field.scale_slice(coeffs[0], first.as_ref());
    for (&l, v) in coeffs[1..].iter().zip(rest) {
        let v = v.as_ref();
        if v.len() != len {
            return Err(PolyError::LengthMismatch {
                expected: len,
                actual: v.len(),
            });
        }
        field.scaled_add_assign(&mut out, l, v);
    }
    Ok(out)
}

/// Unique polynomial of degree `< points.len()` through `points`.
pub fn interpolate<F: Field>(
    field: &F,
    points: &[(F::Elem, F::Elem)],
) -> Result<Polynomial<F::Elem>, PolyError> {
    if points.is_empty() {
        return Err(PolyError::Empty);
    }
    let mut seen = HashSet::new();
    if !points.iter().all(|(x, _)| seen.insert(*x)) {
        return Err(PolyError::DuplicatePoint);
    }
    let n = points.len();
    // master(z) = prod_i (z - x_i), low-degree first.
    let mut master = vec![field.one()];
    for &(x, _) in points {
        let mut next = vec![field.zero(); master.len() + 1];
        for (d, &c) in master.iter().enumerate() {
            next[d + 1] = field.add(next[d + 1], c);
            next[d] = field.sub(next[d], field.mul(c, x));
        }
        master = next;
    }
    let mut out = vec![field.zero(); n];
    for (j, &(xj, yj)) in points.iter().enumerate() {
        // master / (z - x_j) by synthetic division.
        let mut basis = vec![field.zero(); n];
        let mut carry = master[n];
        for d in (0..n).rev() {
            basis[d] = carry;
            carry = field.add(master[d], field.mul(carry, xj));
        }
        let mut denom = field.one();
        for (i, &(xi, _)) in points.iter().enumerate() {
            if i != j {
                denom = field.mul(denom, field.sub(xj, xi));
            }
        }
        let scale = field.div(yj, denom)?;
        field.scaled_add_assign(&mut out, scale, &basis);
    }
    Ok(Polynomial::new(field, out))
}

/// Solves the augmented system `rows` (each row is `[a_0 .. a_{n-1} | b]`)
/// by Gauss-Jordan elimination. Free variables are set to zero; `None` when
/// the system is inconsistent.
pub fn solve_linear<F: Field>(
    field: &F,
    mut rows: Vec<Vec<F::Elem>>,
    unknowns: usize,
) -> Result<Option<Vec<F::Elem>>, FieldError> {
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !field.is_zero(rows[i][col])) else {
            continue;
        };
        rows.swap(r, p);
        let inv = field.inv(rows[r][col])?;
        let pivot_row: Vec<F::Elem> = rows[r][col..].iter().map(|&v| field.mul(v, inv)).collect();
        rows[r].splice(col.., pivot_row.iter().copied());
        for i in 0..rows.len() {
            if i == r {
                continue;
            }
            let factor = rows[i][col];
            if field.is_zero(factor) {
                continue;
            }
            for (c, &pv) in (col..=unknowns).zip(&pivot_row) {
                rows[i][c] = field.sub(rows[i][c], field.mul(factor, pv));
            }
        }
        pivot_cols.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| !field.is_zero(row[unknowns])) {
        return Ok(None);
    }
    let mut solution = vec![field.zero(); unknowns];
    for (row, &col) in rows.iter().zip(&pivot_cols) {
        solution[col] = row[unknowns];
    }
    Ok(Some(solution))
}

/// Result of decoding one Reed-Solomon word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome<E> {
    pub polynomial: Polynomial<E>,
    pub error_positions: BTreeSet<usize>,
}

/// Number of errors a length-`len`, dimension-`dim` code corrects.
pub fn max_errors(len: usize, dim: usize) -> usize {
    len.saturating_sub(dim) / 2
}

/// Berlekamp-Welch decoding of `evals[j] = p(alphas[j])` with `deg p < dim`.
///
/// Solves `Q(a_j) = y_j E(a_j)` for a monic error locator `E` of degree
/// `e = (N - dim) / 2` and `deg Q < e + dim`, then returns `Q / E`. Fails
/// when the system is inconsistent, the division leaves a remainder, or the
/// candidate disagrees with more than `e` positions.
pub fn rs_decode<F: Field>(
    field: &F,
    alphas: &[F::Elem],
    evals: &[F::Elem],
    dim: usize,
) -> Result<DecodeOutcome<F::Elem>, PolyError> {
    let n = alphas.len();
    if evals.len() != n {
        return Err(PolyError::LengthMismatch {
            expected: n,
            actual: evals.len(),
        });
    }
    if dim == 0 || dim > n {
        return Err(PolyError::InvalidDimension { dim, len: n });
    }
    let e = max_errors(n, dim);
    let failure = PolyError::DecodeFailure { max_errors: e };
    let candidate = if e == 0 {
        let points: Vec<_> = alphas[..dim]
            .iter()
            .copied()
            .zip(evals[..dim].iter().copied())
            .collect();
        interpolate(field, &points)?
    } else {
        let q_len = e + dim;
        let unknowns = q_len + e;
        let mut rows = Vec::with_capacity(n);
        for (&a, &y) in alphas.iter().zip(evals) {
            let mut row = Vec::with_capacity(unknowns + 1);
            let mut power = field.one();
            let mut powers = Vec::with_capacity(q_len);
            for _ in 0..q_len {
                powers.push(power);
                power = field.mul(power, a);
            }
            row.extend_from_slice(&powers);
            for &pw in &powers[..e] {
                row.push(field.neg(field.mul(y, pw)));
            }
            row.push(field.mul(y, powers[e]));
            rows.push(row);
        }
        let Some(solution) = solve_linear(field, rows, unknowns)? else {
            return Err(failure);
        };
        let q = Polynomial::new(field, solution[..q_len].to_vec());
        let mut locator = solution[q_len..].to_vec();
        locator.push(field.one());
        let locator = Polynomial::new(field, locator);
        let (quot, rem) = q.div_rem(field, &locator)?;
        if !rem.is_zero() {
            return Err(failure);
        }
        quot
    };
    if candidate.coeffs().len() > dim {
        return Err(failure);
    }
    let error_positions: BTreeSet<usize> = alphas
        .iter()
        .zip(evals)
        .enumerate()
        .filter(|(_, (&a, &y))| candidate.eval(field, a) != y)
        .map(|(j, _)| j)
        .collect();
    if error_positions.len() > e {
        return Err(failure);
    }
    Ok(DecodeOutcome {
        polynomial: candidate,
        error_positions,
    })
}

/// Result of decoding a word whose symbols are vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorDecodeOutcome<E> {
    /// `values[t][c]`: component `c` of the decoded polynomial at target `t`.
    pub values: Vec<Vec<E>>,
    pub error_positions: BTreeSet<usize>,
}

/// Decodes `N` vector evaluations of a degree-`< dim` vector polynomial and
/// evaluates the result at `targets`.
///
/// Errors are located once, on the combination `sum_c weights[c] *
/// evals[.][c]`: every corrupted symbol of a node shows up there unless
/// the weighted corruption cancels, which happens with probability `1/|F|`
/// per node for weights unknown to the adversary. The components are then
/// recovered from the first `dim` error-free positions. When the combined
/// word is a codeword the locator is skipped.
pub fn decode_vectors<F: Field, V: AsRef<[F::Elem]>>(
    field: &F,
    alphas: &[F::Elem],
    evals: &[V],
    dim: usize,
    targets: &[F::Elem],
    weights: &[F::Elem],
) -> Result<VectorDecodeOutcome<F::Elem>, PolyError> {
    let n = alphas.len();
    if evals.len() != n {
        return Err(PolyError::LengthMismatch {
            expected: n,
            actual: evals.len(),
        });
    }
    if dim == 0 || dim > n {
        return Err(PolyError::InvalidDimension { dim, len: n });
    }
    let width = weights.len();
    for v in evals {
        if v.as_ref().len() != width {
            return Err(PolyError::LengthMismatch {
                expected: width,
                actual: v.as_ref().len(),
            });
        }
    }
    let combined: Vec<F::Elem> = if width == 1 {
        evals.iter().map(|v| v.as_ref()[0]).collect()
    } else {
        evals
            .iter()
            .map(|v| {
                let v = v.as_ref();
                let mut acc = field.mul(weights[0], v[0]);
                for (&w, &y) in weights[1..].iter().zip(&v[1..]) {
                    acc = field.add(acc, field.mul(w, y));
                }
                acc
            })
            .collect()
    };

    let reference = &alphas[..dim];
    let check = lagrange_matrix(field, reference, &alphas[dim..])?;
    let consistent = check.iter().zip(&combined[dim..]).all(|(row, &y)| {
        let predicted = row
            .iter()
            .zip(&combined[..dim])
            .fold(field.zero(), |acc, (&w, &c)| {
                field.add(acc, field.mul(w, c))
            });
        predicted == y
    });
    let error_positions = if consistent {
        BTreeSet::new()
    } else {
        rs_decode(field, alphas, &combined, dim)?.error_positions
    };

    let clean: Vec<usize> = (0..n)
        .filter(|j| !error_positions.contains(j))
        .take(dim)
        .collect();
    if clean.len() < dim {
        return Err(PolyError::DecodeFailure {
            max_errors: max_errors(n, dim),
        });
    }
    let xs: Vec<F::Elem> = clean.iter().map(|&j| alphas[j]).collect();
    let map = lagrange_matrix(field, &xs, targets)?;
    let values = map
        .iter()
        .map(|row| {
            let mut out = field.scale_slice(row[0], evals[clean[0]].as_ref());
            for (&w, &j) in row[1..].iter().zip(&clean[1..]) {
                field.scaled_add_assign(&mut out, w, evals[j].as_ref());
            }
            out
        })
        .collect();
    Ok(VectorDecodeOutcome {
        values,
        error_positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BinaryField, Counted, PrimeField};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf17() -> PrimeField {
        PrimeField::new(17).unwrap()
    }

    #[test]
    fn lagrange_single_shard_is_one() {
        let f = gf17();
        let grid = EvaluationGrid::standard(&f, 1, 5).unwrap();
        for i in 0..5 {
            assert_eq!(lagrange_coeffs(&f, &grid, i).unwrap(), vec![f.one()]);
        }
    }

    #[test]
    fn lagrange_at_omega_is_unit_vector() {
        let f = gf17();
        let grid = EvaluationGrid::standard(&f, 4, 3).unwrap();
        for (k, &w) in grid.omegas().iter().enumerate() {
            let l = lagrange_coeffs_at(&f, grid.omegas(), w).unwrap();
            for (j, &c) in l.iter().enumerate() {
                assert_eq!(c, if j == k { f.one() } else { f.zero() });
            }
        }
    }

    #[test]
    fn lagrange_hand_example() {
        let f = gf17();
        let grid = EvaluationGrid::new(vec![f.elem(1), f.elem(2)], vec![f.elem(5)]).unwrap();
        let l = lagrange_coeffs(&f, &grid, 0).unwrap();
        assert_eq!(l, vec![f.elem(14), f.elem(4)]);
        let coded = encode_at(&f, &l, &[f.elem(2), f.elem(3)]).unwrap();
        assert_eq!(coded, f.elem(6));
    }

    #[test]
    fn encode_edge_cases() {
        let f = gf17();
        let v = f.elem(9);
        assert_eq!(encode_at(&f, &[f.one()], &[v]).unwrap(), v);
        let zeros = vec![vec![f.zero(); 3]; 2];
        let out = encode_vectors(&f, &[f.elem(4), f.elem(7)], &zeros).unwrap();
        assert_eq!(out, vec![f.zero(); 3]);
        assert!(matches!(
            encode_at(&f, &[f.one()], &[v, v]),
            Err(PolyError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn grid_rejects_duplicates_and_small_fields() {
        let f = gf17();
        assert_eq!(
            EvaluationGrid::new(vec![f.elem(1)], vec![f.elem(1)]),
            Err(PolyError::DuplicatePoint)
        );
        assert!(EvaluationGrid::standard(&f, 5, 12).is_err());
        assert!(EvaluationGrid::standard(&f, 5, 11).is_ok());
        let g = BinaryField::new(4).unwrap();
        assert!(EvaluationGrid::standard(&g, 3, 12).is_ok());
        assert!(EvaluationGrid::standard(&g, 3, 13).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let f = gf17();
        let c = interpolate(&f, &[(f.elem(4), f.elem(9))]).unwrap();
        assert_eq!(c.coeffs(), &[f.elem(9)]);
        let id = interpolate(
            &f,
            &[
                (f.elem(0), f.elem(0)),
                (f.elem(1), f.elem(1)),
                (f.elem(2), f.elem(2)),
            ],
        )
        .unwrap();
        assert_eq!(id.coeffs(), &[f.zero(), f.one()]);
        let p = interpolate(&f, &[(f.elem(1), f.elem(2)), (f.elem(2), f.elem(3))]).unwrap();
        assert_eq!(p.coeffs(), &[f.one(), f.one()]);
        assert_eq!(
            interpolate(&f, &[(f.elem(1), f.elem(2)), (f.elem(1), f.elem(3))]),
            Err(PolyError::DuplicatePoint)
        );
    }

    #[test]
    fn horner_examples() {
        let f = gf17();
        assert_eq!(Polynomial::zero().eval(&f, f.elem(5)), f.zero());
        let c = Polynomial::new(&f, vec![f.elem(7)]);
        assert_eq!(c.eval(&f, f.elem(11)), f.elem(7));
        let p = Polynomial::new(&f, vec![f.one(), f.one()]);
        assert_eq!(p.eval(&f, f.elem(3)), f.elem(4));
        assert_eq!(
            Polynomial::new(&f, vec![f.one(), f.zero()]).degree(),
            Some(0)
        );
    }

    #[test]
    fn division_round_trip() {
        let f = gf17();
        let a = Polynomial::new(&f, vec![f.elem(3), f.elem(0), f.elem(5), f.elem(1)]);
        let b = Polynomial::new(&f, vec![f.elem(2), f.elem(1)]);
        let (q, r) = a.div_rem(&f, &b).unwrap();
        let back = q.mul(&f, &b);
        let sum: Vec<_> = (0..4)
            .map(|i| {
                let x = back.coeffs().get(i).copied().unwrap_or_default();
                let y = r.coeffs().get(i).copied().unwrap_or_default();
                f.add(x, y)
            })
            .collect();
        assert_eq!(Polynomial::new(&f, sum), a);
    }

    fn alphas17(n: usize) -> Vec<crate::field::Fp> {
        (1..=n as u64).map(|i| gf17().element(i)).collect()
    }

    /// Every degree-< dim polynomial over GF(17) within distance `radius`.
    fn codewords_within(
        alphas: &[crate::field::Fp],
        word: &[crate::field::Fp],
        dim: u32,
        radius: usize,
    ) -> Vec<Vec<u64>> {
        let f = gf17();
        let mut out = Vec::new();
        for idx in 0..17u64.pow(dim) {
            let coeffs: Vec<_> = (0..dim).map(|d| f.elem(idx / 17u64.pow(d) % 17)).collect();
            let p = Polynomial::new(&f, coeffs.clone());
            let dist = alphas
                .iter()
                .zip(word)
                .filter(|(&a, &y)| p.eval(&f, a) != y)
                .count();
            if dist <= radius {
                out.push(coeffs.iter().map(|c| c.value()).collect());
            }
        }
        out
    }

    #[test]
    fn berlekamp_welch_two_errors_matches_brute_force() {
        let f = gf17();
        let alphas = alphas17(7);
        let planted = Polynomial::new(&f, vec![f.one(), f.zero(), f.one()]);
        let mut word: Vec<_> = alphas.iter().map(|&a| planted.eval(&f, a)).collect();
        word[1] = f.add(word[1], f.elem(5));
        word[5] = f.add(word[5], f.elem(11));
        let nearest = codewords_within(&alphas, &word, 3, 2);
        assert_eq!(nearest, vec![vec![1, 0, 1]]);
        let out = rs_decode(&f, &alphas, &word, 3).unwrap();
        assert_eq!(out.polynomial, planted);
        assert_eq!(out.error_positions, BTreeSet::from([1, 5]));
    }

    #[test]
    fn berlekamp_welch_never_silently_returns_planted_past_the_bound() {
        let f = gf17();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alphas = alphas17(7);
        for _ in 0..200 {
            let planted: Vec<_> = (0..3).map(|_| f.random(&mut rng)).collect();
            let planted = Polynomial::new(&f, planted);
            let mut word: Vec<_> = alphas.iter().map(|&a| planted.eval(&f, a)).collect();
            let mut positions: Vec<usize> = (0..7).collect();
            for j in 0..3 {
                let k = rng.gen_range(j..7);
                positions.swap(j, k);
                let delta = f.elem(rng.gen_range(1..17));
                word[positions[j]] = f.add(word[positions[j]], delta);
            }
            match rs_decode(&f, &alphas, &word, 3) {
                Err(PolyError::DecodeFailure { .. }) => {}
                Ok(out) => {
                    assert_ne!(out.polynomial, planted);
                    let within = codewords_within(&alphas, &word, 3, 2);
                    let got: Vec<u64> = (0..3)
                        .map(|d| out.polynomial.coeffs().get(d).map_or(0, |c| c.value()))
                        .collect();
                    assert!(within.contains(&got));
                }
                Err(other) => panic!("unexpected {other}"),
            }
        }
    }

    #[test]
    fn zero_errors_full_dimension_is_interpolation() {
        let f = gf17();
        let alphas = alphas17(5);
        let word: Vec<_> = [3, 1, 4, 1, 5].iter().map(|&v| f.elem(v)).collect();
        let out = rs_decode(&f, &alphas, &word, 5).unwrap();
        let points: Vec<_> = alphas.iter().copied().zip(word.iter().copied()).collect();
        assert_eq!(out.polynomial, interpolate(&f, &points).unwrap());
        assert!(out.error_positions.is_empty());
    }

    #[test]
    fn decode_rejects_bad_dimension() {
        let f = gf17();
        let alphas = alphas17(4);
        let word = vec![f.zero(); 4];
        assert!(matches!(
            rs_decode(&f, &alphas, &word, 0),
            Err(PolyError::InvalidDimension { .. })
        ));
        assert!(matches!(
            rs_decode(&f, &alphas, &word, 5),
            Err(PolyError::InvalidDimension { .. })
        ));
    }

    #[test]
    fn vector_decode_recovers_components_and_targets() {
        let f = PrimeField::mersenne61();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = EvaluationGrid::standard(&f, 4, 13).unwrap();
        let dim = 4;
        let width = 6;
        let polys: Vec<Polynomial<_>> = (0..width)
            .map(|_| Polynomial::new(&f, (0..dim).map(|_| f.random(&mut rng)).collect()))
            .collect();
        let mut evals: Vec<Vec<_>> = grid
            .alphas()
            .iter()
            .map(|&a| polys.iter().map(|p| p.eval(&f, a)).collect())
            .collect();
        for &bad in &[0usize, 7, 12, 3] {
            evals[bad][bad % width] = f.random(&mut rng);
        }
        let weights: Vec<_> = (0..width).map(|_| f.random(&mut rng)).collect();
        let out = decode_vectors(&f, grid.alphas(), &evals, dim, grid.omegas(), &weights).unwrap();
        assert_eq!(out.error_positions, BTreeSet::from([0, 3, 7, 12]));
        for (t, &w) in grid.omegas().iter().enumerate() {
            let expected: Vec<_> = polys.iter().map(|p| p.eval(&f, w)).collect();
            assert_eq!(out.values[t], expected);
        }
    }

    #[test]
    fn vector_decode_cost_is_deterministic() {
        let f = PrimeField::mersenne61();
        let grid = EvaluationGrid::standard(&f, 3, 9).unwrap();
        let evals = vec![vec![f.one(); 5]; 9];
        let weights = vec![f.elem(2); 5];
        let run = || {
            let c = Counted::new(&f);
            decode_vectors(&c, grid.alphas(), &evals, 3, grid.omegas(), &weights).unwrap();
            c.counts()
        };
        assert_eq!(run(), run());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lagrange_identity(seed in any::<u64>(), k in 1usize..8, extra in 0usize..8) {
            let f = PrimeField::mersenne61();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = k + extra;
            let grid = EvaluationGrid::standard(&f, k, n).unwrap();
            let values: Vec<_> = (0..k).map(|_| f.random(&mut rng)).collect();
            let table = lagrange_table(&f, &grid).unwrap();
            let points: Vec<_> = grid.alphas().iter().zip(&table)
                .map(|(&a, l)| (a, encode_at(&f, l, &values).unwrap()))
                .collect();
            let u = interpolate(&f, &points).unwrap();
            for (j, &w) in grid.omegas().iter().enumerate() {
                prop_assert_eq!(u.eval(&f, w), values[j]);
            }
        }

        #[test]
        fn rs_round_trip(seed in any::<u64>(), n in 3usize..20, dim_frac in 0.0f64..1.0) {
            let f = PrimeField::mersenne61();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = 1 + ((n - 1) as f64 * dim_frac) as usize;
            let alphas: Vec<_> = (1..=n as u64).map(|i| f.element(i)).collect();
            let p = Polynomial::new(&f, (0..dim).map(|_| f.random(&mut rng)).collect());
            let mut word: Vec<_> = alphas.iter().map(|&a| p.eval(&f, a)).collect();
            let weight = rng.gen_range(0..=max_errors(n, dim));
            let mut positions: Vec<usize> = (0..n).collect();
            let mut planted = BTreeSet::new();
            for j in 0..weight {
                let k = rng.gen_range(j..n);
                positions.swap(j, k);
                let delta = f.elem(rng.gen_range(1..f.modulus()));
                word[positions[j]] = f.add(word[positions[j]], delta);
                planted.insert(positions[j]);
            }
            let out = rs_decode(&f, &alphas, &word, dim).unwrap();
            prop_assert_eq!(out.polynomial, p);
            prop_assert_eq!(out.error_positions, planted);
        }

        #[test]
        fn encoding_is_linear(seed in any::<u64>(), k in 1usize..6) {
            let f = PrimeField::mersenne61();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let grid = EvaluationGrid::standard(&f, k, 2 * k + 1).unwrap();
            let l = lagrange_coeffs(&f, &grid, rng.gen_range(0..grid.nodes())).unwrap();
            let u: Vec<_> = (0..k).map(|_| f.random(&mut rng)).collect();
            let v: Vec<_> = (0..k).map(|_| f.random(&mut rng)).collect();
            let (a, b) = (f.random(&mut rng), f.random(&mut rng));
            let mix: Vec<_> = u.iter().zip(&v).map(|(&x, &y)| f.add(f.mul(a, x), f.mul(b, y))).collect();
            let lhs = encode_at(&f, &l, &mix).unwrap();
            let rhs = f.add(
                f.mul(a, encode_at(&f, &l, &u).unwrap()),
                f.mul(b, encode_at(&f, &l, &v).unwrap()),
            );
            prop_assert_eq!(lhs, rhs);
        }
    }
}
