//! Masked sample containers, row classification and CSV ingestion.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::float::Scalar;

/// An `n x d` real matrix with a per-entry observed/missing mask.
///
/// `values[i][j]` is meaningful only where `mask[i][j]` is true; masked-out
/// entries are retained for storage but carry no information. The matrix is
/// immutable after construction, so shared references can be read from any
/// number of threads.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedMatrix<F> {
    values: Vec<F>,
    mask: Vec<bool>,
    n: usize,
    d: usize,
}

/// Borrowed view of one row of a [`MaskedMatrix`].
#[derive(Clone, Copy, Debug)]
pub struct MaskedRow<'a, F> {
    pub values: &'a [F],
    pub mask: &'a [bool],
}

impl<'a, F: Scalar> MaskedRow<'a, F> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }
}

impl<F: Scalar> MaskedMatrix<F> {
    /// Builds a matrix from flat row-major storage.
    ///
    /// `d >= 1` is required. `n == 0` is allowed so that row filters such as
    /// case deletion can represent an emptied sample; loaders reject empty
    /// input separately.
    pub fn new(values: Vec<F>, mask: Vec<bool>, n: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyInput);
        }
        if values.len() != n * d || mask.len() != n * d {
            return Err(Error::Dim {
                left: values.len(),
                right: n * d,
            });
        }
        Ok(Self { values, mask, n, d })
    }

    /// Builds a fully observed matrix from dense rows.
    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::EmptyInput);
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Format {
                    row: i + 1,
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        let n = rows.len();
        let mask = vec![true; n * d];
        Ok(Self { values, mask, n, d })
    }

    /// Builds a matrix from rows of `Option<F>`, `None` meaning missing.
    pub fn from_optional_rows(rows: Vec<Vec<Option<F>>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::EmptyInput);
        }
        let n = rows.len();
        let mut values = Vec::with_capacity(n * d);
        let mut mask = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Format {
                    row: i + 1,
                    expected: d,
                    found: row.len(),
                });
            }
            for cell in row {
                match cell {
                    Some(v) => {
                        values.push(*v);
                        mask.push(true);
                    }
                    None => {
                        values.push(F::zero());
                        mask.push(false);
                    }
                }
            }
        }
        Ok(Self { values, mask, n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> F {
        self.values[i * self.d + j]
    }

    #[inline]
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.d + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn row_mask(&self, i: usize) -> &[bool] {
        &self.mask[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn masked_row(&self, i: usize) -> MaskedRow<'_, F> {
        MaskedRow {
            values: self.row(i),
            mask: self.row_mask(i),
        }
    }

    pub fn is_row_complete(&self, i: usize) -> bool {
        self.row_mask(i).iter().all(|&m| m)
    }

    /// Indices of the missing components of row `i`.
    pub fn missing_dims(&self, i: usize) -> Vec<usize> {
        self.row_mask(i)
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn n_missing_cells(&self) -> usize {
        self.mask.iter().filter(|&&m| !m).count()
    }

    pub fn is_fully_observed(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    /// Returns a copy with `row`'s cells at `dims` marked missing.
    /// Values are left untouched; only the mask changes.
    pub fn with_masked_cells(&self, cells: &[(usize, usize)]) -> Self {
        let mut mask = self.mask.clone();
        for &(i, j) in cells {
            mask[i * self.d + j] = false;
        }
        Self {
            values: self.values.clone(),
            mask,
            n: self.n,
            d: self.d,
        }
    }

    /// Dense rows of a fully observed matrix.
    pub fn to_rows(&self) -> Result<Vec<Vec<F>>> {
        let missing = self.n_missing_cells();
        if missing > 0 {
            return Err(Error::IncompleteData { missing });
        }
        Ok((0..self.n).map(|i| self.row(i).to_vec()).collect())
    }

    /// Keeps only the rows whose index satisfies `keep`, preserving order.
    pub fn filter_rows(&self, keep: &[usize]) -> Self {
        let mut values = Vec::with_capacity(keep.len() * self.d);
        let mut mask = Vec::with_capacity(keep.len() * self.d);
        for &i in keep {
            values.extend_from_slice(self.row(i));
            mask.extend_from_slice(self.row_mask(i));
        }
        Self {
            values,
            mask,
            n: keep.len(),
            d: self.d,
        }
    }

    /// Writes the matrix as CSV, emitting `na_token` for masked cells.
    ///
    /// Observed cells round-trip bit-exactly through [`load_csv`] because the
    /// shortest-roundtrip float formatting is used.
    pub fn write_csv(&self, path: &Path, na_token: &str) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.d {
                if j > 0 {
                    out.push(',');
                }
                if self.is_observed(i, j) {
                    out.push_str(&format!("{}", self.value(i, j)));
                } else {
                    out.push_str(na_token);
                }
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Stacks two matrices with equal column counts, `a`'s rows first.
pub fn vstack<F: Scalar>(a: &MaskedMatrix<F>, b: &MaskedMatrix<F>) -> Result<MaskedMatrix<F>> {
    if a.d() != b.d() {
        return Err(Error::Dim {
            left: a.d(),
            right: b.d(),
        });
    }
    let mut values = Vec::with_capacity((a.n() + b.n()) * a.d());
    let mut mask = Vec::with_capacity((a.n() + b.n()) * a.d());
    values.extend_from_slice(&a.values);
    values.extend_from_slice(&b.values);
    mask.extend_from_slice(&a.mask);
    mask.extend_from_slice(&b.mask);
    MaskedMatrix::new(values, mask, a.n() + b.n(), a.d())
}

/// A pair of samples with equal column counts.
#[derive(Clone, Debug)]
pub struct TwoSampleData<F> {
    pub x: MaskedMatrix<F>,
    pub y: MaskedMatrix<F>,
}

impl<F: Scalar> TwoSampleData<F> {
    pub fn new(x: MaskedMatrix<F>, y: MaskedMatrix<F>) -> Result<Self> {
        if x.d() != y.d() {
            return Err(Error::Dim {
                left: x.d(),
                right: y.d(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn d(&self) -> usize {
        self.x.d()
    }

    pub fn n_missing_cells(&self) -> usize {
        self.x.n_missing_cells() + self.y.n_missing_cells()
    }

    pub fn is_fully_observed(&self) -> bool {
        self.x.is_fully_observed() && self.y.is_fully_observed()
    }
}

/// Classification of rows into incomplete (at least one missing entry,
/// listed first) and complete, both in original order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowPartition {
    pub incomplete_rows: Vec<usize>,
    pub complete_rows: Vec<usize>,
    pub m: usize,
}

/// Splits rows into incomplete and complete index lists, stable within each
/// class.
pub fn partition_rows<F: Scalar>(m: &MaskedMatrix<F>) -> RowPartition {
    let mut incomplete_rows = Vec::new();
    let mut complete_rows = Vec::new();
    for i in 0..m.n() {
        if m.is_row_complete(i) {
            complete_rows.push(i);
        } else {
            incomplete_rows.push(i);
        }
    }
    let count = incomplete_rows.len();
    RowPartition {
        incomplete_rows,
        complete_rows,
        m: count,
    }
}

/// Loads a CSV file into a [`MaskedMatrix`].
///
/// Cells equal to `na_token` or empty denote missing values. Rows must be
/// rectangular; LF and CRLF line endings are accepted and trailing blank
/// lines are ignored.
pub fn load_csv<F: Scalar>(path: &Path, na_token: &str) -> Result<MaskedMatrix<F>> {
    load_csv_opts(path, na_token, false)
}

/// [`load_csv`] with an option to skip one header line.
pub fn load_csv_opts<F: Scalar>(
    path: &Path,
    na_token: &str,
    skip_header: bool,
) -> Result<MaskedMatrix<F>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text, na_token, skip_header)
}

fn parse_csv<F: Scalar>(text: &str, na_token: &str, skip_header: bool) -> Result<MaskedMatrix<F>> {
    let mut lines: Vec<&str> = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    while matches!(lines.last(), Some(l) if l.trim().is_empty()) {
        lines.pop();
    }
    let start = if skip_header && !lines.is_empty() { 1 } else { 0 };
    let lines = &lines[start..];
    if lines.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut values = Vec::new();
    let mut mask = Vec::new();
    let mut d = 0usize;
    for (row_idx, line) in lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if row_idx == 0 {
            d = cells.len();
        } else if cells.len() != d {
            return Err(Error::Format {
                row: start + row_idx + 1,
                expected: d,
                found: cells.len(),
            });
        }
        for (col_idx, raw) in cells.iter().enumerate() {
            let cell = raw.trim();
            if cell.is_empty() || cell == na_token {
                values.push(F::zero());
                mask.push(false);
            } else {
                let parsed: F = cell.parse().map_err(|_| Error::Parse {
                    row: start + row_idx + 1,
                    col: col_idx + 1,
                    token: cell.to_string(),
                })?;
                values.push(parsed);
                mask.push(true);
            }
        }
    }
    let n = lines.len();
    MaskedMatrix::new(values, mask, n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<MaskedMatrix<f64>> {
        parse_csv(text, "NA", false)
    }

    #[test]
    fn load_maps_na_cells_to_mask() {
        let m = parse("1.0,2.0\n3.0,NA\n").unwrap();
        assert_eq!((m.n(), m.d()), (2, 2));
        assert!(m.is_observed(0, 0) && m.is_observed(0, 1) && m.is_observed(1, 0));
        assert!(!m.is_observed(1, 1));
        assert_eq!(m.value(1, 0), 3.0);
    }

    #[test]
    fn trailing_blank_line_is_ignored() {
        let m = parse("1.0\n\n").unwrap();
        assert_eq!((m.n(), m.d()), (1, 1));
        assert!(m.is_fully_observed());
    }

    #[test]
    fn ragged_row_is_a_format_error() {
        match parse("1,2\n3\n") {
            Err(Error::Format { row, expected, found }) => {
                assert_eq!((row, expected, found), (2, 2, 1));
            }
            other => panic!("expected Format error, got {other:?}"),
        }
    }

    #[test]
    fn unparseable_cell_reports_position() {
        match parse("1,2\n3,abc\n") {
            Err(Error::Parse { row, col, token }) => {
                assert_eq!((row, col), (2, 2));
                assert_eq!(token, "abc");
            }
            other => panic!("expected Parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_input() {
        assert!(matches!(parse(""), Err(Error::EmptyInput)));
    }

    #[test]
    fn empty_cell_is_missing() {
        let m = parse("1.0,,3.0\n").unwrap();
        assert!(!m.is_observed(0, 1));
        assert_eq!(m.missing_dims(0), vec![1]);
    }

    #[test]
    fn crlf_endings_are_accepted() {
        let m = parse("1.0,2.0\r\n3.0,4.0\r\n").unwrap();
        assert_eq!((m.n(), m.d()), (2, 2));
        assert_eq!(m.value(1, 1), 4.0);
    }

    #[test]
    fn header_can_be_skipped() {
        let m: MaskedMatrix<f64> = parse_csv("a,b\n1,2\n", "NA", true).unwrap();
        assert_eq!((m.n(), m.d()), (1, 2));
    }

    #[test]
    fn partition_fully_observed() {
        let m = MaskedMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]])
            .unwrap();
        let p = partition_rows(&m);
        assert!(p.incomplete_rows.is_empty());
        assert_eq!(p.complete_rows, vec![0, 1, 2]);
        assert_eq!(p.m, 0);
    }

    #[test]
    fn partition_single_masked_cell() {
        let m = MaskedMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]])
            .unwrap()
            .with_masked_cells(&[(0, 1)]);
        let p = partition_rows(&m);
        assert_eq!(p.incomplete_rows, vec![0]);
        assert_eq!(p.complete_rows, vec![1, 2]);
        assert_eq!(p.m, 1);
    }

    #[test]
    fn partition_all_rows_incomplete() {
        let m = MaskedMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]])
            .unwrap()
            .with_masked_cells(&[(0, 0), (1, 1)]);
        let p = partition_rows(&m);
        assert!(p.complete_rows.is_empty());
        assert_eq!(p.m, 2);
    }

    #[test]
    fn two_sample_dim_mismatch_rejected() {
        let x = MaskedMatrix::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let y = MaskedMatrix::from_rows(vec![vec![1.0]]).unwrap();
        assert!(matches!(TwoSampleData::new(x, y), Err(Error::Dim { .. })));
    }
}
