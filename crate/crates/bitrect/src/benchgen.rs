//! Seeded benchmark generators: random occupancy matrices, planted
//! instances with a known optimal partition count, and gap instances whose
//! binary rank exceeds their real rank.

use crate::bounds::real_rank;
use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use crate::seeding;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Random,
    Planted,
    Gap,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Random => "random",
            Family::Planted => "planted",
            Family::Gap => "gap",
        })
    }
}

/// Family plus its parameters; the full description of one generator call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyParams {
    /// Independent cells, each 1 with probability `p`.
    Random { rows: usize, cols: usize, p: f64 },
    /// Sum of `k` outer products of disjoint row supports with independent
    /// binary columns; optimal partition count is `k` by construction.
    Planted { rows: usize, cols: usize, k: usize },
    /// `k` disjoint decompositions of one base row, plus random filler
    /// rows; drives the binary rank above the real rank.
    Gap { rows: usize, cols: usize, k: usize },
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Random { .. } => Family::Random,
            FamilyParams::Planted { .. } => Family::Planted,
            FamilyParams::Gap { .. } => Family::Gap,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            FamilyParams::Random { rows, cols, .. }
            | FamilyParams::Planted { rows, cols, .. }
            | FamilyParams::Gap { rows, cols, .. } => (rows, cols),
        }
    }

    /// Short tag used in instance ids and file names.
    pub fn tag(&self) -> String {
        let (m, n) = self.dims();
        match *self {
            FamilyParams::Random { p, .. } => {
                let pct = p * 100.0;
                if pct.fract() == 0.0 {
                    format!("random-{m}x{n}-p{pct:.0}")
                } else {
                    format!("random-{m}x{n}-p{pct}")
                }
            }
            FamilyParams::Planted { k, .. } => format!("planted-{m}x{n}-k{k}"),
            FamilyParams::Gap { k, .. } => format!("gap-{m}x{n}-k{k}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkInstance {
    pub matrix: BinaryMatrix,
    pub params: FamilyParams,
    pub seed: u64,
    /// Set for planted instances, where the construction certifies the
    /// minimum partition count.
    pub known_optimal: Option<usize>,
}

impl BenchmarkInstance {
    pub fn family(&self) -> Family {
        self.params.family()
    }
}

const MAX_RETRIES: usize = 64;
const COLUMN_RESAMPLE_CAP: usize = 1000;

/// Each cell is independently 1 with probability `p`; all-zero draws are
/// retried a bounded number of times.
pub fn gen_random(rows: usize, cols: usize, p: f64, seed: u64) -> Result<BenchmarkInstance> {
    if !(0.0..1.0).contains(&p) || p <= 0.0 {
        return Err(Error::InfeasibleParams(format!(
            "occupancy must be in (0, 1), got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let matrix = BinaryMatrix::from_fn(rows, cols, |_, _| rng.gen_bool(p));
        if matrix.ones() > 0 {
            return Ok(BenchmarkInstance {
                matrix,
                params: FamilyParams::Random { rows, cols, p },
                seed,
                known_optimal: None,
            });
        }
    }
    Err(Error::DegenerateAfterRetries {
        retries: MAX_RETRIES,
    })
}

/// Builds `M = sum_i c_i * r_i` from a uniformly random partition of the
/// column indices into `k` nonempty supports `r_i` and independent random
/// binary columns `c_i`. Row disjointness keeps every entry in {0,1} and
/// forces `real_rank(M) = k = known_optimal`.
pub fn gen_planted(rows: usize, cols: usize, k: usize, seed: u64) -> Result<BenchmarkInstance> {
    if k < 1 || k > rows || k > cols {
        return Err(Error::InfeasibleParams(format!(
            "planted rank {k} out of range for {rows}x{cols}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group_of = uniform_surjection(cols, k, &mut rng);
    // columns c_i: nonzero, linearly independent over the rationals
    let mut columns: Vec<Vec<u8>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut accepted = false;
        for _ in 0..COLUMN_RESAMPLE_CAP {
            let candidate: Vec<u8> = (0..rows).map(|_| rng.gen_bool(0.5) as u8).collect();
            if candidate.iter().all(|&b| b == 0) {
                continue;
            }
            columns.push(candidate);
            let stacked = BinaryMatrix::from_fn(columns.len(), rows, |i, j| columns[i][j] == 1);
            if real_rank(&stacked) == columns.len() {
                accepted = true;
                break;
            }
            columns.pop();
        }
        if !accepted {
            return Err(Error::DegenerateAfterRetries {
                retries: COLUMN_RESAMPLE_CAP,
            });
        }
    }
    let matrix = BinaryMatrix::from_fn(rows, cols, |i, j| columns[group_of[j]][i] == 1);
    debug_assert_eq!(real_rank(&matrix), k);
    Ok(BenchmarkInstance {
        matrix,
        params: FamilyParams::Planted { rows, cols, k },
        seed,
        known_optimal: Some(k),
    })
}

/// Samples a base row, decomposes it into `k` distinct disjoint pairs
/// `r = r' + r''`, fills the remaining rows at 50% occupancy, and shuffles
/// the rows. The 2k pair rows are regenerated until their real rank is
/// exactly `k + 1`.
pub fn gen_gap(rows: usize, cols: usize, k: usize, seed: u64) -> Result<BenchmarkInstance> {
    if k < 1 || 2 * k > rows {
        return Err(Error::InfeasibleParams(format!(
            "pair count {k} needs 2k <= {rows} rows"
        )));
    }
    if cols < k + 1 {
        return Err(Error::InfeasibleParams(format!(
            "pair count {k} needs a base row of weight >= {}, but only {cols} columns",
            k + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'outer: for _ in 0..MAX_RETRIES {
        // base row with enough 1s to admit k distinct splits
        let mut base: Vec<usize> = Vec::new();
        for _ in 0..COLUMN_RESAMPLE_CAP {
            let row: Vec<usize> = (0..cols).filter(|_| rng.gen_bool(0.5)).collect();
            if row.len() >= k + 1 {
                base = row;
                break;
            }
        }
        if base.is_empty() {
            continue 'outer;
        }
        let anchor = base[0];
        let mut seen_splits: Vec<Vec<usize>> = Vec::new();
        let mut pair_rows: Vec<Vec<usize>> = Vec::new();
        for _ in 0..k {
            let mut found = false;
            for _ in 0..COLUMN_RESAMPLE_CAP {
                let (mut left, mut right): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
                for &c in &base {
                    if rng.gen_bool(0.5) {
                        left.push(c);
                    } else {
                        right.push(c);
                    }
                }
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                // canonical key: the half containing the anchor column
                let key = if left.contains(&anchor) { &left } else { &right };
                if seen_splits.contains(key) {
                    continue;
                }
                seen_splits.push(key.clone());
                pair_rows.push(left);
                pair_rows.push(right);
                found = true;
                break;
            }
            if !found {
                continue 'outer;
            }
        }
        let pair_block = BinaryMatrix::from_fn(2 * k, cols, |i, j| pair_rows[i].contains(&j));
        if real_rank(&pair_block) != k + 1 {
            continue 'outer;
        }
        let mut all_rows: Vec<Vec<bool>> = pair_rows
            .iter()
            .map(|support| (0..cols).map(|j| support.contains(&j)).collect())
            .collect();
        for _ in 0..rows - 2 * k {
            all_rows.push((0..cols).map(|_| rng.gen_bool(0.5)).collect());
        }
        all_rows.shuffle(&mut rng);
        let matrix = BinaryMatrix::from_fn(rows, cols, |i, j| all_rows[i][j]);
        if matrix.ones() == 0 {
            continue 'outer;
        }
        return Ok(BenchmarkInstance {
            matrix,
            params: FamilyParams::Gap { rows, cols, k },
            seed,
            known_optimal: None,
        });
    }
    Err(Error::DegenerateAfterRetries {
        retries: MAX_RETRIES,
    })
}

pub fn generate(params: FamilyParams, seed: u64) -> Result<BenchmarkInstance> {
    match params {
        FamilyParams::Random { rows, cols, p } => gen_random(rows, cols, p, seed),
        FamilyParams::Planted { rows, cols, k } => gen_planted(rows, cols, k, seed),
        FamilyParams::Gap { rows, cols, k } => gen_gap(rows, cols, k, seed),
    }
}

/// Uniformly random surjection from `0..n` onto `0..k` groups: a uniform
/// set partition into exactly `k` blocks (sampled by the Stirling-number
/// recurrence, so no rejection blowup near `k = n`), with block labels
/// shuffled.
fn uniform_surjection(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    // stirling[i][j] = number of partitions of i elements into j blocks
    let mut stirling = vec![vec![BigUint::zero(); k + 1]; n + 1];
    stirling[0][0] = BigUint::one();
    for i in 1..=n {
        for j in 1..=k.min(i) {
            stirling[i][j] =
                &stirling[i - 1][j] * BigUint::from(j) + &stirling[i - 1][j - 1];
        }
    }
    #[derive(Clone, Copy)]
    enum Decision {
        NewBlock,
        Join(usize),
    }
    let mut decisions = vec![Decision::NewBlock; n + 1];
    let mut j = k;
    for i in (1..=n).rev() {
        let total = stirling[i][j].clone();
        debug_assert!(!total.is_zero());
        let draw = random_below(rng, &total);
        let new_block_weight = stirling[i - 1][j - 1].clone();
        if draw < new_block_weight {
            decisions[i] = Decision::NewBlock;
            j -= 1;
        } else {
            let block = (draw - new_block_weight) / &stirling[i - 1][j];
            let block: usize = block.try_into().expect("block index fits usize");
            decisions[i] = Decision::Join(block);
        }
    }
    debug_assert_eq!(j, 0);
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(k);
    for (element, decision) in decisions.iter().enumerate().skip(1) {
        match decision {
            Decision::NewBlock => blocks.push(vec![element - 1]),
            Decision::Join(r) => blocks[*r].push(element - 1),
        }
    }
    let mut labels: Vec<usize> = (0..k).collect();
    labels.shuffle(rng);
    let mut group_of = vec![0usize; n];
    for (block, label) in blocks.iter().zip(labels) {
        for &element in block {
            group_of[element] = label;
        }
    }
    group_of
}

fn random_below(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    debug_assert!(!bound.is_zero());
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let top_mask: u8 = if bits % 8 == 0 {
        0xff
    } else {
        (1u8 << (bits % 8)) - 1
    };
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill_bytes(&mut buf);
        if let Some(last) = buf.last_mut() {
            *last &= top_mask;
        }
        let candidate = BigUint::from_bytes_le(&buf);
        if candidate < *bound {
            return candidate;
        }
    }
}

/// One generator call repeated `count` times with derived per-instance
/// seeds.
#[derive(Clone, Debug)]
pub struct SuiteEntry {
    pub params: FamilyParams,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct SuiteSpec {
    pub name: String,
    pub master_seed: u64,
    pub entries: Vec<SuiteEntry>,
}

/// Manifest line describing one generated instance; the matrix itself lives
/// in the `.bm` file at `path`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifestRecord {
    pub id: String,
    pub family: Family,
    pub rows: usize,
    pub cols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_optimal: Option<usize>,
    pub path: String,
}

impl ManifestRecord {
    pub fn params(&self) -> Result<FamilyParams> {
        match self.family {
            Family::Random => {
                let p = self.p.ok_or_else(|| {
                    Error::InfeasibleParams("random record missing p".into())
                })?;
                Ok(FamilyParams::Random { rows: self.rows, cols: self.cols, p })
            }
            Family::Planted => {
                let k = self.k.ok_or_else(|| {
                    Error::InfeasibleParams("planted record missing k".into())
                })?;
                Ok(FamilyParams::Planted { rows: self.rows, cols: self.cols, k })
            }
            Family::Gap => {
                let k = self.k.ok_or_else(|| {
                    Error::InfeasibleParams("gap record missing k".into())
                })?;
                Ok(FamilyParams::Gap { rows: self.rows, cols: self.cols, k })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Suite {
    pub name: String,
    pub items: Vec<(ManifestRecord, BenchmarkInstance)>,
}

impl Suite {
    /// JSON-lines manifest, one record per instance, in generation order.
    pub fn manifest_jsonl(&self) -> String {
        let mut out = String::new();
        for (record, _) in &self.items {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

/// Generates every instance of the spec deterministically: instance seeds
/// are derived from the master seed and the instance's position.
pub fn gen_suite(spec: &SuiteSpec) -> Result<Suite> {
    let mut items = Vec::new();
    let mut index: u64 = 0;
    for entry in &spec.entries {
        for repeat in 0..entry.count {
            let seed = seeding::derive(spec.master_seed, index);
            index += 1;
            let instance = generate(entry.params, seed)?;
            let id = format!("{}-{repeat:03}", entry.params.tag());
            let (rows, cols) = entry.params.dims();
            let (p, k) = match entry.params {
                FamilyParams::Random { p, .. } => (Some(p), None),
                FamilyParams::Planted { k, .. } | FamilyParams::Gap { k, .. } => {
                    (None, Some(k))
                }
            };
            let record = ManifestRecord {
                id: id.clone(),
                family: entry.params.family(),
                rows,
                cols,
                p,
                k,
                seed,
                known_optimal: instance.known_optimal,
                path: format!("{id}.bm"),
            };
            items.push((record, instance));
        }
    }
    Ok(Suite {
        name: spec.name.clone(),
        items,
    })
}

/// Benchmark suite presets mirroring the evaluation setup: three small
/// random sizes at nine occupancies, large sparse randoms, planted ranks
/// 1..=10, and gap pair counts 2..=5.
pub mod presets {
    use super::*;

    pub fn random_small(master_seed: u64) -> SuiteSpec {
        let mut entries = Vec::new();
        for (rows, cols) in [(10, 10), (10, 20), (10, 30)] {
            for pct in (10..=90).step_by(10) {
                entries.push(SuiteEntry {
                    params: FamilyParams::Random {
                        rows,
                        cols,
                        p: pct as f64 / 100.0,
                    },
                    count: 10,
                });
            }
        }
        SuiteSpec {
            name: "random-small".into(),
            master_seed,
            entries,
        }
    }

    pub fn random_large(master_seed: u64) -> SuiteSpec {
        let entries = [1, 2, 5, 10, 20]
            .into_iter()
            .map(|pct| SuiteEntry {
                params: FamilyParams::Random {
                    rows: 100,
                    cols: 100,
                    p: pct as f64 / 100.0,
                },
                count: 10,
            })
            .collect();
        SuiteSpec {
            name: "random-large".into(),
            master_seed,
            entries,
        }
    }

    pub fn planted(master_seed: u64) -> SuiteSpec {
        let entries = (1..=10)
            .map(|k| SuiteEntry {
                params: FamilyParams::Planted {
                    rows: 10,
                    cols: 10,
                    k,
                },
                count: 10,
            })
            .collect();
        SuiteSpec {
            name: "planted".into(),
            master_seed,
            entries,
        }
    }

    pub fn gap(master_seed: u64) -> SuiteSpec {
        let entries = (2..=5)
            .map(|k| SuiteEntry {
                params: FamilyParams::Gap {
                    rows: 10,
                    cols: 10,
                    k,
                },
                count: 100,
            })
            .collect();
        SuiteSpec {
            name: "gap".into(),
            master_seed,
            entries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_deterministic() {
        let a = gen_random(10, 10, 0.5, 7).unwrap();
        let b = gen_random(10, 10, 0.5, 7).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn random_small_dense_is_nonzero() {
        let inst = gen_random(2, 2, 0.9, 3).unwrap();
        assert!(inst.matrix.ones() > 0);
        assert_eq!(inst.matrix.dims(), (2, 2));
    }

    #[test]
    fn random_rejects_bad_occupancy() {
        assert!(gen_random(5, 5, 0.0, 0).is_err());
        assert!(gen_random(5, 5, 1.0, 0).is_err());
    }

    #[test]
    fn random_sparse_ones_within_binomial_tails() {
        // Binomial(10000, 0.01): mean 100, sd ~9.9; [40, 180] is beyond
        // six sigma on both sides (Chernoff bounds put each tail below
        // 1e-7), so any hit indicates a generator bug rather than luck.
        for seed in 0..5 {
            let inst = gen_random(100, 100, 0.01, seed).unwrap();
            let ones = inst.matrix.ones();
            assert!((40..=180).contains(&ones), "seed {seed}: {ones} ones");
        }
    }

    #[test]
    fn planted_rank_one_is_outer_product() {
        let inst = gen_planted(3, 3, 1, 5).unwrap();
        assert_eq!(inst.known_optimal, Some(1));
        assert_eq!(real_rank(&inst.matrix), 1);
        // nonzero rows must all be identical
        let rows: Vec<Vec<bool>> = (0..3)
            .map(|i| (0..3).map(|j| inst.matrix.get(i, j)).collect())
            .filter(|r: &Vec<bool>| r.iter().any(|&b| b))
            .collect();
        assert!(!rows.is_empty());
        assert!(rows.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn planted_real_rank_matches_k() {
        for k in 1..=10 {
            let inst = gen_planted(10, 10, k, 100 + k as u64).unwrap();
            assert_eq!(real_rank(&inst.matrix), k, "k={k}");
            assert_eq!(inst.known_optimal, Some(k));
        }
    }

    #[test]
    fn planted_rejects_oversized_k() {
        assert!(matches!(
            gen_planted(2, 3, 3, 0),
            Err(Error::InfeasibleParams(_))
        ));
    }

    #[test]
    fn gap_pair_block_rank_is_k_plus_one() {
        // regenerate and check the invariant through the public matrix:
        // with all rows being pair rows (m = 2k), the full rank is k+1
        for seed in 0..10 {
            let inst = gen_gap(10, 10, 5, seed).unwrap();
            assert_eq!(real_rank(&inst.matrix), 6, "seed {seed}");
        }
    }

    #[test]
    fn gap_full_rank_bounded() {
        for seed in 0..10 {
            let inst = gen_gap(10, 10, 2, seed).unwrap();
            let r = real_rank(&inst.matrix);
            assert!(r <= 10 - 2 + 1, "seed {seed}: rank {r}");
        }
    }

    #[test]
    fn gap_rejects_too_many_pairs() {
        assert!(matches!(
            gen_gap(10, 10, 6, 0),
            Err(Error::InfeasibleParams(_))
        ));
    }

    #[test]
    fn surjection_is_uniformish_and_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n, k) in [(10, 10), (10, 1), (10, 4), (6, 3)] {
            let groups = uniform_surjection(n, k, &mut rng);
            assert_eq!(groups.len(), n);
            let mut seen = vec![false; k];
            for &g in &groups {
                assert!(g < k);
                seen[g] = true;
            }
            assert!(seen.iter().all(|&s| s), "({n},{k}) not surjective");
        }
    }

    #[test]
    fn suite_preset_counts() {
        assert_eq!(gen_suite(&presets::planted(1)).unwrap().items.len(), 100);
        assert_eq!(gen_suite(&presets::gap(1)).unwrap().items.len(), 400);
        let small = gen_suite(&presets::random_small(1)).unwrap();
        assert_eq!(small.items.len(), 270);
    }

    #[test]
    fn suite_is_byte_deterministic() {
        let spec = SuiteSpec {
            name: "t".into(),
            master_seed: 9,
            entries: vec![SuiteEntry {
                params: FamilyParams::Random {
                    rows: 6,
                    cols: 6,
                    p: 0.5,
                },
                count: 3,
            }],
        };
        let a = gen_suite(&spec).unwrap();
        let b = gen_suite(&spec).unwrap();
        assert_eq!(a.manifest_jsonl(), b.manifest_jsonl());
        for ((_, ia), (_, ib)) in a.items.iter().zip(&b.items) {
            assert_eq!(ia.matrix.to_text(), ib.matrix.to_text());
        }
    }

    #[test]
    fn empty_suite_has_empty_manifest() {
        let spec = SuiteSpec {
            name: "empty".into(),
            master_seed: 0,
            entries: vec![SuiteEntry {
                params: FamilyParams::Random {
                    rows: 4,
                    cols: 4,
                    p: 0.5,
                },
                count: 0,
            }],
        };
        let suite = gen_suite(&spec).unwrap();
        assert!(suite.items.is_empty());
        assert_eq!(suite.manifest_jsonl(), "");
    }

    #[test]
    fn manifest_roundtrips_params() {
        let suite = gen_suite(&SuiteSpec {
            name: "rt".into(),
            master_seed: 3,
            entries: vec![SuiteEntry {
                params: FamilyParams::Gap {
                    rows: 10,
                    cols: 10,
                    k: 3,
                },
                count: 2,
            }],
        })
        .unwrap();
        for (record, instance) in &suite.items {
            let line = serde_json::to_string(record).unwrap();
            let parsed: ManifestRecord = serde_json::from_str(&line).unwrap();
            assert_eq!(&parsed, record);
            assert_eq!(parsed.params().unwrap(), instance.params);
        }
    }
}
