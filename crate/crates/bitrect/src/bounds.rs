//! Lower bounds on the minimum rectangle partition size: rank over the
//! rationals and fooling sets.

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Rank of the matrix over the rationals, by fraction-free (Bareiss)
/// elimination in exact integer arithmetic.
pub fn real_rank(matrix: &BinaryMatrix) -> usize {
    let (m, n) = matrix.dims();
    let mut a: Vec<Vec<BigInt>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| BigInt::from(matrix.get(i, j) as u8))
                .collect()
        })
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(pivot_row) = (rank..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot_row);
        let pivot = a[rank][col].clone();
        for i in rank + 1..m {
            for j in col + 1..n {
                let v = (&pivot * &a[i][j] - &a[i][col] * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// A set of 1-cells where every distinct pair `(i,j)`, `(i',j')` satisfies
/// `M[i'][j] = 0` or `M[i][j'] = 0`. Its size lower-bounds the partition
/// number.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FoolingSet {
    pub cells: Vec<(usize, usize)>,
}

impl FoolingSet {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

fn fooling_pair_ok(matrix: &BinaryMatrix, a: (usize, usize), b: (usize, usize)) -> bool {
    !matrix.get(b.0, a.1) || !matrix.get(a.0, b.1)
}

/// True iff all cells are 1-entries and every distinct pair satisfies the
/// fooling condition.
pub fn is_fooling_set(matrix: &BinaryMatrix, set: &FoolingSet) -> bool {
    let (m, n) = matrix.dims();
    for &(i, j) in &set.cells {
        if i >= m || j >= n || !matrix.get(i, j) {
            return false;
        }
    }
    for (idx, &a) in set.cells.iter().enumerate() {
        for &b in &set.cells[idx + 1..] {
            if a == b || !fooling_pair_ok(matrix, a, b) {
                return false;
            }
        }
    }
    true
}

/// Greedily builds a maximal fooling set by scanning the 1-cells in a seeded
/// random order. The result size is a certified lower bound on the partition
/// number; it is maximal but not necessarily maximum.
pub fn greedy_fooling_set(matrix: &BinaryMatrix, seed: u64) -> FoolingSet {
    let mut cells = matrix.one_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for cell in cells {
        if chosen.iter().all(|&c| fooling_pair_ok(matrix, c, cell)) {
            chosen.push(cell);
        }
    }
    chosen.sort_unstable();
    FoolingSet { cells: chosen }
}

/// Exact maximum fooling set size, via maximum independent set on the
/// conflict graph whose vertices are 1-cells and whose edges join pairs
/// violating the fooling condition.
pub fn max_fooling_set_exact(matrix: &BinaryMatrix, cell_limit: usize) -> Result<usize> {
    let cells = matrix.one_cells();
    if cells.len() > cell_limit {
        return Err(Error::TooLarge {
            cells: cells.len(),
            limit: cell_limit,
        });
    }
    let k = cells.len();
    if k == 0 {
        return Ok(0);
    }
    // conflicts[v] has bit u set when cells u and v cannot coexist
    let mut conflicts = vec![0u64; k];
    for v in 0..k {
        for u in 0..k {
            if u != v && !fooling_pair_ok(matrix, cells[v], cells[u]) {
                conflicts[v] |= 1 << u;
            }
        }
    }
    let mut best = 0;
    mis(&conflicts, (1u64 << k) - 1, 0, &mut best);
    Ok(best)
}

fn mis(conflicts: &[u64], candidates: u64, size: usize, best: &mut usize) {
    if size + candidates.count_ones() as usize <= *best {
        return;
    }
    if candidates == 0 {
        *best = (*best).max(size);
        return;
    }
    let v = candidates.trailing_zeros() as usize;
    // branch: take v, or skip it
    mis(conflicts, candidates & !(1 << v) & !conflicts[v], size + 1, best);
    mis(conflicts, candidates & !(1 << v), size, best);
}

/// Default 1-cell cap for the exact fooling-set search.
pub const FOOLING_CELL_LIMIT: usize = 30;
