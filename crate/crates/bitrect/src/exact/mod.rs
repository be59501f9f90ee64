//! Complete decision procedure for "the matrix partitions into at most `b`
//! rectangles": an internal backtracking backend, an SMT-LIB v2 emitter with
//! external-solver integration, model decoding, and a brute-force oracle.

mod smt;

pub use smt::{run_external, ExternalOutcome, SmtEncoding};

use crate::bits::Bits;
use crate::bounds::real_rank;
use crate::error::{Error, Result};
use crate::matrix::{BinaryMatrix, Partition, Rectangle};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Emits an SMT-LIB v2 script deciding whether the matrix partitions into at
/// most `b` rectangles. See [`SmtEncoding`] for the incremental form.
pub fn encode_smt2(matrix: &BinaryMatrix, b: usize) -> String {
    SmtEncoding::new(matrix, b).script()
}

/// Total mapping from the 1-cells of a matrix (row-major order) to rectangle
/// color indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringAssignment {
    pub colors: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExhaustReason {
    TimeLimit,
    NodeLimit,
}

/// Outcome of a bounded decision: a closure-valid coloring, a proof that
/// none exists, or a tripped budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisionOutcome {
    Sat(ColoringAssignment),
    Unsat,
    Exhausted(ExhaustReason),
}

/// Cooperative search budget. `Default` is unlimited.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
    pub node_limit: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn with_time(limit: Duration) -> Self {
        Budget {
            deadline: Some(Instant::now() + limit),
            node_limit: None,
        }
    }

    pub fn with_nodes(limit: u64) -> Self {
        Budget {
            deadline: None,
            node_limit: Some(limit),
        }
    }

    pub fn deadline(deadline: Option<Instant>) -> Self {
        Budget {
            deadline,
            node_limit: None,
        }
    }
}

const UNASSIGNED: i32 = -1;

struct Search<'a> {
    matrix: &'a BinaryMatrix,
    cells: Vec<(usize, usize)>,
    /// flat row-major (i * cols + j) -> cell id, or -1 for 0-entries
    cell_at: Vec<i32>,
    color: Vec<i32>,
    class_rows: Vec<Bits>,
    class_cols: Vec<Bits>,
    bound: usize,
    nodes: u64,
    budget: Budget,
    exhausted: Option<ExhaustReason>,
    probe_nodes: u64,
    probe_limit: Option<u64>,
    probe_order: Option<ChaCha8Rng>,
    probe_tripped: bool,
}

struct JoinUndo {
    class: usize,
    colored: Vec<u32>,
    grew_row: Option<usize>,
    grew_col: Option<usize>,
}

impl<'a> Search<'a> {
    fn new(matrix: &'a BinaryMatrix, bound: usize, budget: Budget) -> Self {
        let (m, n) = matrix.dims();
        let cells = matrix.one_cells();
        let mut cell_at = vec![-1i32; m * n];
        for (id, &(i, j)) in cells.iter().enumerate() {
            cell_at[i * n + j] = id as i32;
        }
        let color = vec![UNASSIGNED; cells.len()];
        Search {
            matrix,
            cells,
            cell_at,
            color,
            class_rows: Vec::new(),
            class_cols: Vec::new(),
            bound,
            nodes: 0,
            budget,
            exhausted: None,
            probe_nodes: 0,
            probe_limit: None,
            probe_order: None,
            probe_tripped: false,
        }
    }

    #[inline]
    fn cell_id(&self, i: usize, j: usize) -> i32 {
        self.cell_at[i * self.matrix.cols() + j]
    }

    fn budget_tripped(&mut self) -> bool {
        if let Some(limit) = self.budget.node_limit {
            if self.nodes > limit {
                self.exhausted = Some(ExhaustReason::NodeLimit);
                return true;
            }
        }
        if let Some(deadline) = self.budget.deadline {
            if self.nodes % 1024 == 0 && Instant::now() >= deadline {
                self.exhausted = Some(ExhaustReason::TimeLimit);
                return true;
            }
        }
        if let Some(limit) = self.probe_limit {
            if self.probe_nodes > limit {
                self.probe_tripped = true;
                return true;
            }
        }
        false
    }

    /// Can the unassigned cell `k` join class `c` right now? True iff every
    /// cell the product closure would force in is an unassigned 1-entry.
    fn joinable(&self, k: usize, c: usize) -> bool {
        let (i, j) = self.cells[k];
        if !self.class_rows[c].get(i) {
            for jc in self.class_cols[c].iter_ones() {
                let id = self.cell_id(i, jc);
                if id < 0 || self.color[id as usize] != UNASSIGNED {
                    return false;
                }
            }
        }
        if !self.class_cols[c].get(j) {
            for ir in self.class_rows[c].iter_ones() {
                let id = self.cell_id(ir, j);
                if id < 0 || self.color[id as usize] != UNASSIGNED {
                    return false;
                }
            }
        }
        true
    }

    /// Joins cell `k` to class `c`, coloring every newly forced product
    /// cell. Caller must have checked [`Search::joinable`].
    fn join(&mut self, k: usize, c: usize) -> JoinUndo {
        let (i, j) = self.cells[k];
        let grew_row = !self.class_rows[c].get(i);
        let grew_col = !self.class_cols[c].get(j);
        debug_assert!(grew_row || grew_col);
        let mut colored = Vec::new();
        if grew_row {
            for jc in self.class_cols[c].iter_ones() {
                if jc != j {
                    colored.push(self.cell_id(i, jc) as u32);
                }
            }
        }
        if grew_col {
            for ir in self.class_rows[c].iter_ones() {
                if ir != i {
                    colored.push(self.cell_id(ir, j) as u32);
                }
            }
        }
        colored.push(k as u32);
        for &id in &colored {
            debug_assert_eq!(self.color[id as usize], UNASSIGNED);
            self.color[id as usize] = c as i32;
        }
        if grew_row {
            self.class_rows[c].set(i, true);
        }
        if grew_col {
            self.class_cols[c].set(j, true);
        }
        JoinUndo {
            class: c,
            colored,
            grew_row: grew_row.then_some(i),
            grew_col: grew_col.then_some(j),
        }
    }

    fn unjoin(&mut self, undo: JoinUndo) {
        for &id in &undo.colored {
            self.color[id as usize] = UNASSIGNED;
        }
        if let Some(i) = undo.grew_row {
            self.class_rows[undo.class].set(i, false);
        }
        if let Some(j) = undo.grew_col {
            self.class_cols[undo.class].set(j, false);
        }
    }

    fn open_class(&mut self, k: usize) {
        let (i, j) = self.cells[k];
        let mut rows = Bits::zeros(self.matrix.rows());
        rows.set(i, true);
        let mut cols = Bits::zeros(self.matrix.cols());
        cols.set(j, true);
        self.color[k] = self.class_rows.len() as i32;
        self.class_rows.push(rows);
        self.class_cols.push(cols);
    }

    fn close_class(&mut self, k: usize) {
        self.class_rows.pop();
        self.class_cols.pop();
        self.color[k] = UNASSIGNED;
    }

    /// True iff two unassigned cells could still end up in one (future, new)
    /// class: same row, same column, or both cross cells are unassigned
    /// 1-entries. A `false` here is definitive for the current branch.
    fn pair_shareable(&self, a: usize, b: usize) -> bool {
        let (i, j) = self.cells[a];
        let (i2, j2) = self.cells[b];
        if i == i2 || j == j2 {
            return true;
        }
        for (r, c) in [(i, j2), (i2, j)] {
            let id = self.cell_id(r, c);
            if id < 0 || self.color[id as usize] != UNASSIGNED {
                return false;
            }
        }
        true
    }

    /// Look-ahead: a branch is dead when some unassigned cell can join no
    /// class and no color slot is left, or when the cells that all require
    /// fresh classes contain more pairwise-unshareable members than there
    /// are slots.
    fn dead_end(&self, from: usize) -> bool {
        let used = self.class_rows.len();
        let slots = self.bound - used;
        let mut need_new: Vec<usize> = Vec::new();
        for k in from..self.cells.len() {
            if self.color[k] != UNASSIGNED {
                continue;
            }
            if (0..used).any(|c| self.joinable(k, c)) {
                continue;
            }
            if slots == 0 {
                return true;
            }
            need_new.push(k);
        }
        if need_new.len() > slots {
            let mut chosen: Vec<usize> = Vec::new();
            for &k in &need_new {
                if chosen.iter().all(|&p| !self.pair_shareable(p, k)) {
                    chosen.push(k);
                    if chosen.len() > slots {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn dfs(&mut self, from: usize) -> bool {
        let mut cur = from;
        while cur < self.cells.len() && self.color[cur] != UNASSIGNED {
            cur += 1;
        }
        if cur == self.cells.len() {
            return true;
        }
        self.nodes += 1;
        self.probe_nodes += 1;
        if self.budget_tripped() {
            return false;
        }
        // value ordering. The first probe tries joins that grow at most
        // one side of a product before both-sided joins, opening a fresh
        // class last; restart probes shuffle all options (including where
        // "open a fresh class" sits), which is what escapes bad prefixes
        // on dense matrices with slack in the bound
        const OPEN_NEW: usize = usize::MAX;
        let (i, j) = self.cells[cur];
        let mut candidates: Vec<usize> = Vec::with_capacity(self.class_rows.len() + 1);
        for c in 0..self.class_rows.len() {
            if (self.class_rows[c].get(i) || self.class_cols[c].get(j)) && self.joinable(cur, c) {
                candidates.push(c);
            }
        }
        for c in 0..self.class_rows.len() {
            if !self.class_rows[c].get(i) && !self.class_cols[c].get(j) && self.joinable(cur, c) {
                candidates.push(c);
            }
        }
        if self.class_rows.len() < self.bound {
            candidates.push(OPEN_NEW);
        }
        if let Some(rng) = self.probe_order.as_mut() {
            candidates.shuffle(rng);
        }
        for c in candidates {
            if c == OPEN_NEW {
                self.open_class(cur);
                if !self.dead_end(cur + 1) && self.dfs(cur + 1) {
                    return true;
                }
                self.close_class(cur);
            } else {
                let undo = self.join(cur, c);
                if !self.dead_end(cur + 1) && self.dfs(cur + 1) {
                    return true;
                }
                self.unjoin(undo);
            }
            if self.stopped() {
                return false;
            }
        }
        false
    }

    fn stopped(&self) -> bool {
        self.exhausted.is_some() || self.probe_tripped
    }
}

/// Decides whether `matrix` admits a partition into at most `b` rectangles,
/// by depth-first assignment of 1-cells in row-major order. Color symmetry
/// is broken by first use; assigning a cell to a class forces the whole
/// row-by-column product of the grown class.
pub fn decide(matrix: &BinaryMatrix, b: usize, budget: Budget) -> DecisionOutcome {
    assert!(b >= 1, "bound must be at least 1");
    assert!(matrix.ones() >= 1, "matrix must contain a 1");
    // presolve: a few packing trials give a constructive witness for any
    // bound at or above their size, leaving the search the tight bounds
    // it is good at
    if let Ok(upper) = crate::heuristics::row_packing(matrix, 4, 0) {
        if upper.len() <= b {
            return DecisionOutcome::Sat(partition_to_assignment(matrix, &upper));
        }
    }
    let mut search = Search::new(matrix, b, budget);
    // chronological backtracking has a heavy-tailed runtime on loose
    // bounds, so run node-capped probes with reshuffled class orders and
    // only let the last probe run the search to completion
    for probe in 0u64.. {
        search.probe_nodes = 0;
        search.probe_tripped = false;
        search.probe_limit = (probe < RESTART_PROBES).then(|| 8192u64 << (2 * probe));
        search.probe_order = (probe > 0).then(|| ChaCha8Rng::seed_from_u64(probe));
        if search.dfs(0) {
            let colors = search.color.iter().map(|&c| c as usize).collect();
            return DecisionOutcome::Sat(ColoringAssignment { colors });
        }
        if let Some(reason) = search.exhausted {
            return DecisionOutcome::Exhausted(reason);
        }
        if !search.probe_tripped {
            return DecisionOutcome::Unsat;
        }
    }
    unreachable!("the final probe is uncapped")
}

const RESTART_PROBES: u64 = 6;

/// Colors each 1-cell with the index of the rectangle covering it.
fn partition_to_assignment(matrix: &BinaryMatrix, partition: &Partition) -> ColoringAssignment {
    let cells = matrix.one_cells();
    let index_of = |cell: (usize, usize)| {
        cells
            .binary_search(&cell)
            .expect("partition covers only 1-cells")
    };
    let mut colors = vec![usize::MAX; cells.len()];
    for (t, rect) in partition.rects.iter().enumerate() {
        for cell in rect.cells() {
            colors[index_of(cell)] = t;
        }
    }
    debug_assert!(colors.iter().all(|&c| c != usize::MAX));
    ColoringAssignment { colors }
}

/// Builds one rectangle per used color. Fails with `ClosureViolation` if a
/// color class is not a full 1-monochromatic row-by-column product (a
/// malformed external model, or a backend bug).
pub fn assignment_to_partition(
    matrix: &BinaryMatrix,
    assignment: &ColoringAssignment,
) -> Result<Partition> {
    let cells = matrix.one_cells();
    if cells.len() != assignment.colors.len() {
        return Err(Error::InvalidPartition(format!(
            "assignment covers {} cells, matrix has {}",
            assignment.colors.len(),
            cells.len()
        )));
    }
    let mut used: Vec<usize> = assignment.colors.to_vec();
    used.sort_unstable();
    used.dedup();
    let mut rects = Vec::with_capacity(used.len());
    for color in used {
        let mut rows: Vec<usize> = Vec::new();
        let mut cols: Vec<usize> = Vec::new();
        for (&(i, j), &c) in cells.iter().zip(&assignment.colors) {
            if c == color {
                if !rows.contains(&i) {
                    rows.push(i);
                }
                if !cols.contains(&j) {
                    cols.push(j);
                }
            }
        }
        rows.sort_unstable();
        cols.sort_unstable();
        // the class must equal its row-by-column product, all same color
        for &i in &rows {
            for &j in &cols {
                let member = cells
                    .iter()
                    .position(|&cell| cell == (i, j))
                    .filter(|&id| assignment.colors[id] == color);
                if member.is_none() {
                    return Err(Error::ClosureViolation(i, j));
                }
            }
        }
        rects.push(Rectangle { rows, cols });
    }
    Ok(Partition {
        rows: matrix.rows(),
        cols: matrix.cols(),
        rects,
    })
}

/// Exact minimum partition size by unpruned enumeration of closure-valid
/// colorings, trying bounds upward from the real rank. Deliberately a
/// separate code path from [`decide`]: no product propagation, no
/// look-ahead. Intended as an oracle for small matrices.
pub fn brute_force_binary_rank(matrix: &BinaryMatrix, cell_limit: usize) -> Result<usize> {
    let cells = matrix.one_cells();
    if cells.len() > cell_limit {
        return Err(Error::TooLarge {
            cells: cells.len(),
            limit: cell_limit,
        });
    }
    if cells.is_empty() {
        return Ok(0);
    }
    let start = real_rank(matrix).max(1);
    for b in start.. {
        let mut state = BruteState {
            matrix,
            cells: &cells,
            color: vec![UNASSIGNED; cells.len()],
            members: Vec::new(),
            rows: Vec::new(),
            cols: Vec::new(),
        };
        if state.enumerate(0, b) {
            return Ok(b);
        }
    }
    unreachable!("one color per cell always succeeds");
}

struct BruteState<'a> {
    matrix: &'a BinaryMatrix,
    cells: &'a [(usize, usize)],
    color: Vec<i32>,
    members: Vec<Vec<usize>>,
    rows: Vec<Bits>,
    cols: Vec<Bits>,
}

impl BruteState<'_> {
    /// Checks the pairwise closure conditions for giving cell `k` color `c`,
    /// against everything assigned so far.
    fn valid(&self, k: usize, c: usize) -> bool {
        let (i, j) = self.cells[k];
        // no other class may already span both this row and this column
        for e in 0..self.members.len() {
            if e != c && self.rows[e].get(i) && self.cols[e].get(j) {
                return false;
            }
        }
        if c < self.members.len() {
            for &p in &self.members[c] {
                let (ip, jp) = self.cells[p];
                for (r, s) in [(i, jp), (ip, j)] {
                    match self.cells.iter().position(|&cell| cell == (r, s)) {
                        None => return false,
                        Some(id) => {
                            let col = self.color[id];
                            if col != UNASSIGNED && col != c as i32 {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    fn enumerate(&mut self, k: usize, bound: usize) -> bool {
        if k == self.cells.len() {
            return true;
        }
        let (i, j) = self.cells[k];
        let used = self.members.len();
        for c in 0..used.min(bound) {
            if !self.valid(k, c) {
                continue;
            }
            self.color[k] = c as i32;
            self.members[c].push(k);
            let had_row = self.rows[c].get(i);
            let had_col = self.cols[c].get(j);
            self.rows[c].set(i, true);
            self.cols[c].set(j, true);
            if self.enumerate(k + 1, bound) {
                return true;
            }
            self.rows[c].set(i, had_row);
            self.cols[c].set(j, had_col);
            self.members[c].pop();
            self.color[k] = UNASSIGNED;
        }
        if used < bound && self.valid(k, used) {
            self.color[k] = used as i32;
            self.members.push(vec![k]);
            let mut rows = Bits::zeros(self.matrix.rows());
            rows.set(i, true);
            let mut cols = Bits::zeros(self.matrix.cols());
            cols.set(j, true);
            self.rows.push(rows);
            self.cols.push(cols);
            if self.enumerate(k + 1, bound) {
                return true;
            }
            self.rows.pop();
            self.cols.pop();
            self.members.pop();
            self.color[k] = UNASSIGNED;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{fixtures, verify_partition};

    fn assert_sat_size(matrix: &BinaryMatrix, b: usize) -> Partition {
        match decide(matrix, b, Budget::unlimited()) {
            DecisionOutcome::Sat(a) => {
                let p = assignment_to_partition(matrix, &a).unwrap();
                assert!(verify_partition(matrix, &p).unwrap().is_valid());
                assert!(p.len() <= b);
                p
            }
            other => panic!("expected Sat at {b}, got {other:?}"),
        }
    }

    #[test]
    fn fooling_gap_sat_at_three_unsat_at_two() {
        let m = fixtures::fooling_gap();
        assert_sat_size(&m, 3);
        assert_eq!(decide(&m, 2, Budget::unlimited()), DecisionOutcome::Unsat);
    }

    #[test]
    fn all_ones_sat_at_one() {
        let m = BinaryMatrix::from_fn(4, 4, |_, _| true);
        let p = assert_sat_size(&m, 1);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn complement_identity_unsat_at_two() {
        let m = fixtures::complement_identity();
        assert_eq!(decide(&m, 2, Budget::unlimited()), DecisionOutcome::Unsat);
        assert_sat_size(&m, 3);
    }

    #[test]
    fn monotone_in_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let m = BinaryMatrix::from_fn(4, 4, |_, _| rng.gen_bool(0.5));
            if m.ones() == 0 {
                continue;
            }
            let mut seen_sat = false;
            for b in 1..=6 {
                let sat = matches!(
                    decide(&m, b, Budget::unlimited()),
                    DecisionOutcome::Sat(_)
                );
                assert!(!seen_sat || sat, "Sat at {} but Unsat at {b}", b - 1);
                seen_sat = sat;
            }
            assert!(seen_sat);
        }
    }

    #[test]
    fn node_budget_reports_exhausted() {
        let m = BinaryMatrix::from_fn(6, 6, |i, j| (i + j) % 3 != 0);
        match decide(&m, 2, Budget::with_nodes(0)) {
            DecisionOutcome::Exhausted(ExhaustReason::NodeLimit) => {}
            other => panic!("expected node exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn brute_force_pinned_values() {
        assert_eq!(brute_force_binary_rank(&fixtures::fooling_gap(), 16).unwrap(), 3);
        assert_eq!(
            brute_force_binary_rank(&fixtures::complement_identity(), 16).unwrap(),
            3
        );
        let id3 = BinaryMatrix::from_fn(3, 3, |i, j| i == j);
        assert_eq!(brute_force_binary_rank(&id3, 16).unwrap(), 3);
        let ones = BinaryMatrix::from_fn(3, 4, |_, _| true);
        assert_eq!(brute_force_binary_rank(&ones, 16).unwrap(), 1);
    }

    #[test]
    fn brute_force_respects_cell_limit() {
        let m = BinaryMatrix::from_fn(5, 5, |_, _| true);
        assert!(matches!(
            brute_force_binary_rank(&m, 16),
            Err(Error::TooLarge { cells: 25, limit: 16 })
        ));
    }

    #[test]
    fn decide_agrees_with_brute_force_on_random_4x4() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..40 {
            let m = BinaryMatrix::from_fn(4, 4, |_, _| rng.gen_bool(0.45));
            if m.ones() == 0 {
                continue;
            }
            let oracle = brute_force_binary_rank(&m, 16).unwrap();
            for b in 1..=oracle + 1 {
                let sat = matches!(decide(&m, b, Budget::unlimited()), DecisionOutcome::Sat(_));
                assert_eq!(sat, b >= oracle, "b={b} oracle={oracle}\n{}", m.to_text());
            }
        }
    }

    #[test]
    fn assignment_decode_splits_are_legal() {
        // a 1x2 all-ones row split into two singleton colors is suboptimal
        // but valid
        let m = BinaryMatrix::from_rows(&[&[1, 1]]);
        let p = assignment_to_partition(
            &m,
            &ColoringAssignment { colors: vec![0, 1] },
        )
        .unwrap();
        assert_eq!(p.len(), 2);
        assert!(verify_partition(&m, &p).unwrap().is_valid());
    }

    #[test]
    fn assignment_decode_rejects_closure_violation() {
        // one color on an L-shape: product cell (1,1) is a 0-entry
        let m = BinaryMatrix::from_rows(&[&[1, 1], &[1, 0]]);
        let bad = ColoringAssignment { colors: vec![0, 0, 0] };
        assert!(matches!(
            assignment_to_partition(&m, &bad),
            Err(Error::ClosureViolation(1, 1))
        ));
    }

    #[test]
    fn time_budget_zero_exhausts() {
        let m = BinaryMatrix::from_fn(8, 8, |i, j| (i * 7 + j * 3) % 4 != 0);
        let budget = Budget::with_time(Duration::from_secs(0));
        match decide(&m, 3, budget) {
            DecisionOutcome::Exhausted(ExhaustReason::TimeLimit) => {}
            DecisionOutcome::Exhausted(ExhaustReason::NodeLimit) => {
                panic!("no node limit was set")
            }
            // an instant solve before the first check is acceptable
            DecisionOutcome::Sat(_) | DecisionOutcome::Unsat => {}
        }
    }
}
