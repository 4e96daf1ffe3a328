//! Matrix Market parsing/emission and the canonical triplet (COO) matrix.
//!
//! Every storage format conversion starts from [`TripletMatrix`], and every
//! correctness check bottoms out in [`DenseMatrix`], the small-scale oracle.
//!
//! The reader accepts `coordinate` files with field `real`, `integer` or
//! `pattern` and symmetry `general` or `symmetric`. Symmetric inputs are
//! expanded to both triangles at parse time, so downstream code only ever
//! sees general matrices.

use std::fmt::Write as _;

use thiserror::Error;

/// Cell-count guard for dense materialization (`to_dense`).
pub const DEFAULT_DENSE_GUARD: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("malformed Matrix Market banner: {0}")]
    MalformedBanner(String),
    #[error("unsupported Matrix Market field {0:?} (supported: real, integer, pattern)")]
    UnsupportedField(String),
    #[error("unsupported Matrix Market symmetry {0:?} (supported: general, symmetric)")]
    UnsupportedSymmetry(String),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("entry ({row}, {col}) is outside the declared {n_rows} x {n_cols} shape")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("header declares {declared} entries but file contains {found}")]
    EntryCountMismatch { declared: usize, found: usize },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("dense materialization of {cells} cells exceeds the guard of {guard}")]
    DenseGuardExceeded { cells: usize, guard: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Canonical COO (triplet) sparse matrix.
///
/// Entries are sorted by `(row, col)`, contain no duplicates and no explicit
/// zeros; every constructor path enforces this, so the rest of the crate can
/// rely on it without re-checking.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletMatrix {
    /// Builds a triplet matrix from arbitrary-order entries.
    ///
    /// Sorts by `(row, col)`, drops entries whose value is exactly `0.0`,
    /// rejects out-of-bounds indices and duplicate coordinates.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self, MatrixError> {
        for &(r, c, _) in &entries {
            if r >= n_rows || c >= n_cols {
                return Err(MatrixError::IndexOutOfBounds {
                    row: r,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
        }
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(MatrixError::DuplicateEntry {
                    row: w[0].0,
                    col: w[0].1,
                });
            }
        }
        entries.retain(|&(_, _, v)| v != 0.0);
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Entries sorted by `(row, col)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Number of stored nonzeros in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_rows];
        for &(r, _, _) in &self.entries {
            counts[r] += 1;
        }
        counts
    }

    /// Widest row (0 for an empty matrix).
    pub fn max_row_nnz(&self) -> usize {
        self.row_counts().into_iter().max().unwrap_or(0)
    }

    /// Dense materialization with the default cell guard.
    pub fn to_dense(&self) -> Result<DenseMatrix, MatrixError> {
        self.to_dense_guarded(DEFAULT_DENSE_GUARD)
    }

    /// Dense materialization; errors when `n_rows * n_cols` exceeds `guard`.
    pub fn to_dense_guarded(&self, guard: usize) -> Result<DenseMatrix, MatrixError> {
        let cells = self
            .n_rows
            .checked_mul(self.n_cols)
            .ok_or(MatrixError::DenseGuardExceeded {
                cells: usize::MAX,
                guard,
            })?;
        if cells > guard {
            return Err(MatrixError::DenseGuardExceeded { cells, guard });
        }
        let mut values = vec![0.0; cells];
        for &(r, c, v) in &self.entries {
            values[r * self.n_cols + c] = v;
        }
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            values,
        })
    }

    /// Internal-consistency check used by tests: sorted, deduplicated,
    /// in-bounds, no stored zeros.
    pub fn validate(&self) -> Result<(), MatrixError> {
        for w in self.entries.windows(2) {
            if (w[0].0, w[0].1) >= (w[1].0, w[1].1) {
                return Err(MatrixError::DuplicateEntry {
                    row: w[1].0,
                    col: w[1].1,
                });
            }
        }
        for &(r, c, v) in &self.entries {
            if r >= self.n_rows || c >= self.n_cols {
                return Err(MatrixError::IndexOutOfBounds {
                    row: r,
                    col: c,
                    n_rows: self.n_rows,
                    n_cols: self.n_cols,
                });
            }
            if v == 0.0 {
                return Err(MatrixError::Malformed {
                    line: 0,
                    msg: format!("stored zero at ({r}, {c})"),
                });
            }
        }
        Ok(())
    }
}

/// Row-major dense matrix, used only as a correctness oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub values: Vec<f64>,
}

impl DenseMatrix {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n_cols + c]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

/// Parses a Matrix Market `coordinate` file.
///
/// Symmetric inputs are expanded to both triangles (the diagonal is not
/// duplicated); `pattern` entries get value `1.0`; indices are converted
/// from the format's 1-based convention to 0-based.
pub fn parse_matrix_market(text: &str) -> Result<TripletMatrix, MatrixError> {
    let mut lines = text.lines().enumerate();

    let (_, banner) = lines
        .next()
        .ok_or_else(|| MatrixError::MalformedBanner("empty input".into()))?;
    let (field, symmetry) = parse_banner(banner)?;

    // Size line: first non-comment, non-blank line after the banner.
    let (size_line_no, size_line) = lines
        .by_ref()
        .find(|(_, l)| !is_skippable(l))
        .ok_or_else(|| MatrixError::MalformedBanner("missing size line".into()))?;
    let (n_rows, n_cols, declared_nnz) = parse_size_line(size_line, size_line_no + 1)?;

    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(declared_nnz);
    let mut parsed = 0usize;
    for (idx, line) in lines {
        if is_skippable(line) {
            continue;
        }
        let line_no = idx + 1;
        let (r, c, v) = parse_entry_line(line, line_no, field)?;
        if r == 0 || c == 0 || r > n_rows || c > n_cols {
            return Err(MatrixError::IndexOutOfBounds {
                row: r,
                col: c,
                n_rows,
                n_cols,
            });
        }
        parsed += 1;
        let (r0, c0) = (r - 1, c - 1);
        entries.push((r0, c0, v));
        if symmetry == Symmetry::Symmetric && r0 != c0 {
            entries.push((c0, r0, v));
        }
    }
    if parsed != declared_nnz {
        return Err(MatrixError::EntryCountMismatch {
            declared: declared_nnz,
            found: parsed,
        });
    }
    TripletMatrix::new(n_rows, n_cols, entries)
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('%')
}

fn parse_banner(line: &str) -> Result<(Field, Symmetry), MatrixError> {
    let mut words = line.split_whitespace();
    if words.next() != Some("%%MatrixMarket") {
        return Err(MatrixError::MalformedBanner(format!(
            "first line must start with %%MatrixMarket, got {line:?}"
        )));
    }
    if words.next() != Some("matrix") {
        return Err(MatrixError::MalformedBanner(
            "expected object \"matrix\"".into(),
        ));
    }
    if words.next() != Some("coordinate") {
        return Err(MatrixError::MalformedBanner(
            "expected format \"coordinate\" (array files are not supported)".into(),
        ));
    }
    let field = match words.next() {
        Some("real") => Field::Real,
        Some("integer") => Field::Integer,
        Some("pattern") => Field::Pattern,
        Some(other) => return Err(MatrixError::UnsupportedField(other.into())),
        None => return Err(MatrixError::MalformedBanner("missing field word".into())),
    };
    let symmetry = match words.next() {
        Some("general") => Symmetry::General,
        Some("symmetric") => Symmetry::Symmetric,
        Some(other) => return Err(MatrixError::UnsupportedSymmetry(other.into())),
        None => {
            return Err(MatrixError::MalformedBanner(
                "missing symmetry word".into(),
            ))
        }
    };
    Ok((field, symmetry))
}

fn parse_size_line(line: &str, line_no: usize) -> Result<(usize, usize, usize), MatrixError> {
    let mut words = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize, MatrixError> {
        words
            .next()
            .ok_or_else(|| MatrixError::Malformed {
                line: line_no,
                msg: format!("size line is missing {what}"),
            })?
            .parse()
            .map_err(|_| MatrixError::Malformed {
                line: line_no,
                msg: format!("cannot parse {what}"),
            })
    };
    let rows = next("row count")?;
    let cols = next("column count")?;
    let nnz = next("entry count")?;
    if words.next().is_some() {
        return Err(MatrixError::Malformed {
            line: line_no,
            msg: "size line has trailing tokens".into(),
        });
    }
    Ok((rows, cols, nnz))
}

fn parse_entry_line(
    line: &str,
    line_no: usize,
    field: Field,
) -> Result<(usize, usize, f64), MatrixError> {
    let mut words = line.split_whitespace();
    let mut index = |what: &str| -> Result<usize, MatrixError> {
        words
            .next()
            .ok_or_else(|| MatrixError::Malformed {
                line: line_no,
                msg: format!("entry is missing {what}"),
            })?
            .parse()
            .map_err(|_| MatrixError::Malformed {
                line: line_no,
                msg: format!("cannot parse {what}"),
            })
    };
    let r = index("row index")?;
    let c = index("column index")?;
    let v = match field {
        Field::Pattern => 1.0,
        Field::Real | Field::Integer => {
            let word = words.next().ok_or_else(|| MatrixError::Malformed {
                line: line_no,
                msg: "entry is missing a value".into(),
            })?;
            word.parse::<f64>().map_err(|_| MatrixError::Malformed {
                line: line_no,
                msg: format!("cannot parse value {word:?}"),
            })?
        }
    };
    if words.next().is_some() {
        return Err(MatrixError::Malformed {
            line: line_no,
            msg: "entry has trailing tokens".into(),
        });
    }
    Ok((r, c, v))
}

/// Emits a matrix as `coordinate real general`, 1-based.
///
/// Values are printed with the shortest representation that round-trips
/// through `f64`, so `parse(emit(m)) == m`.
pub fn emit_matrix_market(m: &TripletMatrix) -> String {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz());
    for &(r, c, v) in m.entries() {
        let _ = writeln!(out, "{} {} {}", r + 1, c + 1, v);
    }
    out
}

/// Convenience wrapper: parse a Matrix Market file from disk.
pub fn read_matrix_market(path: &std::path::Path) -> Result<TripletMatrix, MatrixError> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_market(&text)
}
