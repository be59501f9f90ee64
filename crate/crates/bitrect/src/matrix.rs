//! Binary matrices, rectangles, partitions, their text/JSON formats, and
//! partition validity checking.
//!
//! A *rectangle* is a product of a row index set and a column index set; a
//! *partition* is a list of pairwise disjoint rectangles whose cells are
//! exactly the 1-entries of a matrix.

use crate::bits::Bits;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense binary matrix with row-bitset storage. Immutable after construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Bits>,
    ones: usize,
}

impl BinaryMatrix {
    /// Builds a matrix from a cell predicate.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix must be at least 1x1");
        let mut data = Vec::with_capacity(rows);
        let mut ones = 0;
        for i in 0..rows {
            let mut row = Bits::zeros(cols);
            for j in 0..cols {
                if f(i, j) {
                    row.set(j, true);
                    ones += 1;
                }
            }
            data.push(row);
        }
        BinaryMatrix {
            rows,
            cols,
            data,
            ones,
        }
    }

    /// Builds a matrix from 0/1 row slices. Panics on ragged input; intended
    /// for literals in tests and generators.
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let n = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
        Self::from_fn(rows.len(), n, |i, j| rows[i][j] != 0)
    }

    /// Parses the line-per-row text format: `#` starts a comment, blank and
    /// comment-only lines are skipped, data lines hold only `0`/`1` and must
    /// all have the same length.
    pub fn parse(text: &str) -> Result<Self> {
        let mut data: Vec<Bits> = Vec::new();
        let mut ones = 0;
        let mut cols = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if data.is_empty() {
                cols = line.chars().count();
            } else if line.chars().count() != cols {
                return Err(Error::RaggedLine { line: lineno + 1 });
            }
            let mut row = Bits::zeros(cols);
            for (col, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => {
                        row.set(col, true);
                        ones += 1;
                    }
                    _ => {
                        return Err(Error::IllegalChar {
                            line: lineno + 1,
                            col: col + 1,
                            ch,
                        })
                    }
                }
            }
            data.push(row);
        }
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(BinaryMatrix {
            rows: data.len(),
            cols,
            data,
            ones,
        })
    }

    /// Serializes to the text format; round-trips bit-exactly through
    /// [`BinaryMatrix::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for row in &self.data {
            for j in 0..self.cols {
                out.push(if row.get(j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of 1-entries.
    pub fn ones(&self) -> usize {
        self.ones
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    pub(crate) fn row_bits(&self, i: usize) -> &Bits {
        &self.data[i]
    }

    pub fn transpose(&self) -> BinaryMatrix {
        BinaryMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Matrix whose row `t` is row `perm[t]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> BinaryMatrix {
        assert_eq!(perm.len(), self.rows);
        let data: Vec<Bits> = perm.iter().map(|&i| self.data[i].clone()).collect();
        BinaryMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
            ones: self.ones,
        }
    }

    /// The 1-cells in row-major order.
    pub fn one_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::with_capacity(self.ones);
        for (i, row) in self.data.iter().enumerate() {
            cells.extend(row.iter_ones().map(|j| (i, j)));
        }
        cells
    }
}

impl std::fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BinaryMatrix({}x{})\n{}", self.rows, self.cols, self.to_text())
    }
}

/// A combinatorial rectangle: the product of a row set and a column set,
/// both stored as strictly increasing index lists.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Rectangle {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Rectangle {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        let rect = Rectangle { rows, cols };
        rect.validate()?;
        Ok(rect)
    }

    fn validate(&self) -> Result<()> {
        if self.rows.is_empty() || self.cols.is_empty() {
            return Err(Error::InvalidRectangle("empty index set".into()));
        }
        for set in [&self.rows, &self.cols] {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidRectangle(
                    "indices must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// Cells of the rectangle in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .flat_map(move |&i| self.cols.iter().map(move |&j| (i, j)))
    }

    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }
}

/// An ordered list of rectangles partitioning the 1-entries of an
/// `rows` x `cols` matrix. Serialized as
/// `{"rows":m,"cols":n,"rects":[{"rows":[..],"cols":[..]},..]}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Partition {
    pub rows: usize,
    pub cols: usize,
    pub rects: Vec<Rectangle>,
}

impl Partition {
    pub fn new(rows: usize, cols: usize, rects: Vec<Rectangle>) -> Result<Self> {
        let p = Partition { rows, cols, rects };
        p.validate_shape()?;
        Ok(p)
    }

    fn validate_shape(&self) -> Result<()> {
        for rect in &self.rects {
            rect.validate()?;
            if rect.rows.last().copied().unwrap_or(0) >= self.rows
                || rect.cols.last().copied().unwrap_or(0) >= self.cols
            {
                return Err(Error::InvalidPartition(format!(
                    "rectangle index out of bounds for {}x{}",
                    self.rows, self.cols
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Compact single-line JSON plus a trailing newline; byte-stable.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("partition serializes");
        s.push('\n');
        s
    }

    /// Parses and validates the JSON interchange format.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Partition = serde_json::from_str(text)?;
        p.validate_shape()?;
        Ok(p)
    }

    /// The same partition for the transposed matrix.
    pub fn transposed(&self) -> Partition {
        Partition {
            rows: self.cols,
            cols: self.rows,
            rects: self
                .rects
                .iter()
                .map(|r| Rectangle {
                    rows: r.cols.clone(),
                    cols: r.rows.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    /// A rectangle covers a 0-entry.
    NotOne,
    /// Two rectangles cover the same cell.
    Overlap,
    /// A 1-entry is covered by no rectangle.
    Uncovered,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Violation {
    pub kind: ViolationKind,
    pub cell: (usize, usize),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ValidityReport {
    Valid,
    Invalid(Vec<Violation>),
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidityReport::Valid)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            ValidityReport::Valid => &[],
            ValidityReport::Invalid(v) => v,
        }
    }
}

impl std::fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidityReport::Valid => write!(f, "valid"),
            ValidityReport::Invalid(violations) => {
                for v in violations {
                    writeln!(f, "{:?} at ({}, {})", v.kind, v.cell.0, v.cell.1)?;
                }
                Ok(())
            }
        }
    }
}

/// Checks that `partition` is 1-monochromatic, cell-disjoint, and covers
/// every 1-entry of `matrix`. Dimension mismatch is an error, not a report.
pub fn verify_partition(matrix: &BinaryMatrix, partition: &Partition) -> Result<ValidityReport> {
    if partition.dims() != matrix.dims() {
        return Err(Error::DimMismatch {
            expected: matrix.dims(),
            got: partition.dims(),
        });
    }
    let mut violations = Vec::new();
    let mut covered = vec![Bits::zeros(matrix.cols()); matrix.rows()];
    for rect in &partition.rects {
        for (i, j) in rect.cells() {
            if !matrix.get(i, j) {
                violations.push(Violation {
                    kind: ViolationKind::NotOne,
                    cell: (i, j),
                });
            }
            if covered[i].get(j) {
                violations.push(Violation {
                    kind: ViolationKind::Overlap,
                    cell: (i, j),
                });
            }
            covered[i].set(j, true);
        }
    }
    for i in 0..matrix.rows() {
        for j in matrix.row_bits(i).iter_ones() {
            if !covered[i].get(j) {
                violations.push(Violation {
                    kind: ViolationKind::Uncovered,
                    cell: (i, j),
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(ValidityReport::Valid)
    } else {
        Ok(ValidityReport::Invalid(violations))
    }
}
