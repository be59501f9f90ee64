//! Upper-bound constructors: the trivial duplicate-grouping partition and
//! the row-packing heuristic with multi-trial shuffling.
//!
//! Row packing processes the matrix row by row, maintaining a *basis* of
//! disjointly usable row patterns, one rectangle per basis vector. Each row
//! is greedily decomposed into basis vectors (growing their rectangles
//! vertically); a leftover residue becomes a new basis vector, shrinking any
//! basis vector that contains it so that smaller patterns stay available.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::matrix::{BinaryMatrix, Partition, Rectangle};
use crate::seeding;
use rand::seq::SliceRandom;

/// Groups identical nonzero rows into one rectangle each, does the same for
/// columns, and returns the smaller of the two partitions (ties go to the
/// row grouping).
pub fn trivial_partition(matrix: &BinaryMatrix) -> Result<Partition> {
    if matrix.ones() == 0 {
        return Err(Error::EmptyPattern);
    }
    let by_rows = dedup_rows(matrix);
    let by_cols = dedup_rows(&matrix.transpose()).transposed();
    Ok(if by_rows.len() <= by_cols.len() {
        by_rows
    } else {
        by_cols
    })
}

fn dedup_rows(matrix: &BinaryMatrix) -> Partition {
    // insertion order by first occurrence keeps the output deterministic
    let mut groups: Vec<(&Bits, Vec<usize>)> = Vec::new();
    for i in 0..matrix.rows() {
        let row = matrix.row_bits(i);
        if !row.any() {
            continue;
        }
        match groups.iter_mut().find(|(pattern, _)| *pattern == row) {
            Some((_, members)) => members.push(i),
            None => groups.push((row, vec![i])),
        }
    }
    let rects = groups
        .into_iter()
        .map(|(pattern, members)| Rectangle {
            rows: members,
            cols: pattern.ones_vec(),
        })
        .collect();
    Partition {
        rows: matrix.rows(),
        cols: matrix.cols(),
        rects,
    }
}

/// One pass of row packing over the rows of `matrix` taken in `order`
/// (a permutation of `0..rows`). Row indices in the result refer to the
/// original matrix.
pub fn row_packing_once(matrix: &BinaryMatrix, order: &[usize]) -> Result<Partition> {
    if matrix.ones() == 0 {
        return Err(Error::EmptyPattern);
    }
    assert_eq!(order.len(), matrix.rows(), "order must be a permutation");
    {
        let mut seen = vec![false; matrix.rows()];
        for &i in order {
            assert!(i < matrix.rows() && !seen[i], "order must be a permutation");
            seen[i] = true;
        }
    }
    Ok(pack(matrix, order))
}

fn pack(matrix: &BinaryMatrix, order: &[usize]) -> Partition {
    let (m, n) = matrix.dims();
    let mut basis: Vec<Bits> = Vec::new();
    // rectangle row sets, as positions in the processed order
    let mut row_sets: Vec<Vec<usize>> = Vec::new();
    for t in 0..m {
        let mut residue = matrix.row_bits(order[t]).clone();
        // decompose the row into existing basis vectors, growing their
        // rectangles vertically
        for (j, v) in basis.iter().enumerate() {
            if v.is_subset_of(&residue) {
                row_sets[j].push(t);
                residue.subtract_assign(v);
            }
        }
        if residue.any() {
            // the residue becomes a new basis vector; basis vectors that
            // contain it shrink, handing the residue columns of their rows
            // over to the new rectangle
            let mut new_rows = vec![t];
            for (k, v) in basis.iter_mut().enumerate() {
                if residue.is_subset_of(v) {
                    v.subtract_assign(&residue);
                    assert!(v.any(), "shrunk basis vector must stay nonzero");
                    new_rows.extend(row_sets[k].iter().copied());
                }
            }
            basis.push(residue);
            row_sets.push(new_rows);
        }
        #[cfg(debug_assertions)]
        if m * n <= 1024 {
            check_prefix(matrix, order, t, &basis, &row_sets);
        }
    }
    let rects = basis
        .iter()
        .zip(&row_sets)
        .map(|(v, positions)| {
            let mut rows: Vec<usize> = positions.iter().map(|&t| order[t]).collect();
            rows.sort_unstable();
            debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
            Rectangle {
                rows,
                cols: v.ones_vec(),
            }
        })
        .collect();
    Partition {
        rows: m,
        cols: n,
        rects,
    }
}

/// Debug invariant: after each processed row, the rectangles restricted to
/// the processed rows partition that prefix of the shuffled matrix.
#[cfg(debug_assertions)]
fn check_prefix(
    matrix: &BinaryMatrix,
    order: &[usize],
    upto: usize,
    basis: &[Bits],
    row_sets: &[Vec<usize>],
) {
    let n = matrix.cols();
    let prefix = BinaryMatrix::from_fn(upto + 1, n, |t, j| matrix.get(order[t], j));
    let rects: Vec<Rectangle> = basis
        .iter()
        .zip(row_sets)
        .map(|(v, positions)| {
            let mut rows = positions.clone();
            rows.sort_unstable();
            Rectangle {
                rows,
                cols: v.ones_vec(),
            }
        })
        .collect();
    let partition = Partition {
        rows: upto + 1,
        cols: n,
        rects,
    };
    let report = crate::matrix::verify_partition(&prefix, &partition).expect("dims match");
    assert!(
        report.is_valid(),
        "packing prefix invariant broken after row {upto}: {report}"
    );
}

/// Best partition over `trials` seeded row shuffles of the matrix and
/// `trials` shuffles of its transpose, never worse than
/// [`trivial_partition`]. Deterministic for fixed inputs: each trial draws
/// its own generator from `(seed, trial, orientation)`, and ties keep the
/// earlier candidate (lower trial index, original orientation first).
pub fn row_packing(matrix: &BinaryMatrix, trials: usize, seed: u64) -> Result<Partition> {
    assert!(trials >= 1, "trials must be at least 1");
    packing_best(matrix, trials, seed, |_, _| {})
}

/// Sizes of the best partition after each trial budget in `budgets`
/// (ascending); index `i` equals `row_packing(matrix, budgets[i], seed).len()`.
pub fn row_packing_sizes_at(
    matrix: &BinaryMatrix,
    budgets: &[usize],
    seed: u64,
) -> Result<Vec<usize>> {
    assert!(!budgets.is_empty() && budgets.windows(2).all(|w| w[0] < w[1]));
    assert!(budgets[0] >= 1);
    let mut sizes = Vec::with_capacity(budgets.len());
    let max = *budgets.last().unwrap();
    packing_best(matrix, max, seed, |done, best| {
        if budgets.contains(&done) {
            sizes.push(best.len());
        }
    })?;
    Ok(sizes)
}

fn packing_best(
    matrix: &BinaryMatrix,
    trials: usize,
    seed: u64,
    mut after_trial: impl FnMut(usize, &Partition),
) -> Result<Partition> {
    let trivial = trivial_partition(matrix)?;
    let transposed = matrix.transpose();
    let mut best: Option<Partition> = None;
    for trial in 0..trials {
        for orientation in 0..2u64 {
            let source = if orientation == 0 { matrix } else { &transposed };
            let mut rng = seeding::rng_for(seed, (trial as u64) << 1 | orientation);
            let mut order: Vec<usize> = (0..source.rows()).collect();
            order.shuffle(&mut rng);
            let mut candidate = pack(source, &order);
            if orientation == 1 {
                candidate = candidate.transposed();
            }
            if best.as_ref().map_or(true, |b| candidate.len() < b.len()) {
                best = Some(candidate);
            }
        }
        let best_ref = best.as_ref().unwrap();
        after_trial(
            trial + 1,
            if trivial.len() < best_ref.len() {
                &trivial
            } else {
                best_ref
            },
        );
    }
    let best = best.unwrap();
    Ok(if trivial.len() < best.len() {
        trivial
    } else {
        best
    })
}
