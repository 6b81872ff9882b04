//! Matrix Market coordinate files (`real general` only).
//!
//! Indices are 1-based on disk and 0-based in memory.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let fail = |line: usize, msg: String| Error::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = BufReader::new(file).lines().enumerate().map(|(k, l)| (k + 1, l));

    let (lineno, header) = match lines.next() {
        Some((k, l)) => (k, l.map_err(|e| Error::io(path, e))?),
        None => return Err(fail(1, "empty file".into())),
    };
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(fail(lineno, "missing %%MatrixMarket banner".into()));
    }
    if words[1..] != ["matrix", "coordinate", "real", "general"] {
        return Err(fail(
            lineno,
            format!("unsupported header {header:?}; expected {HEADER:?}"),
        ));
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut last_line = lineno;
    for (k, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        last_line = k;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match dims {
            None => {
                if fields.len() != 3 {
                    return Err(fail(k, format!("expected 'rows cols nnz', got {t:?}")));
                }
                let parse = |s: &str, what: &str| {
                    s.parse::<usize>()
                        .map_err(|_| fail(k, format!("cannot parse {what} from {s:?}")))
                };
                let m = parse(fields[0], "row count")?;
                let n = parse(fields[1], "column count")?;
                let nnz = parse(fields[2], "entry count")?;
                triplets.reserve(nnz);
                dims = Some((m, n, nnz));
            }
            Some((m, n, nnz)) => {
                if fields.len() != 3 {
                    return Err(fail(k, format!("expected 'row col value', got {t:?}")));
                }
                if triplets.len() == nnz {
                    return Err(fail(k, format!("more than the declared {nnz} entries")));
                }
                let index = |s: &str, bound: usize, what: &str| -> Result<usize> {
                    let v = s
                        .parse::<usize>()
                        .map_err(|_| fail(k, format!("cannot parse {what} index from {s:?}")))?;
                    if v == 0 || v > bound {
                        return Err(fail(k, format!("{what} index {v} outside 1..={bound}")));
                    }
                    Ok(v - 1)
                };
                let r = index(fields[0], m, "row")?;
                let c = index(fields[1], n, "column")?;
                let v = fields[2]
                    .parse::<f64>()
                    .map_err(|_| fail(k, format!("cannot parse value from {:?}", fields[2])))?;
                triplets.push((r, c, v));
            }
        }
    }

    let (m, n, nnz) = dims.ok_or_else(|| fail(last_line, "missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(fail(
            last_line,
            format!("declared {nnz} entries but found {}", triplets.len()),
        ));
    }
    SparseMatrix::from_triplets(&triplets, m, n).map_err(|e| match e {
        Error::Input(msg) => fail(last_line, msg),
        other => other,
    })
}

/// Writes `a` in coordinate format. Values use the shortest representation
/// that parses back to the identical `f64`.
pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{HEADER}").map_err(io)?;
    writeln!(w, "{} {} {}", a.rows(), a.cols(), a.nnz()).map_err(io)?;
    for (r, c, v) in a.row_triplets() {
        writeln!(w, "{} {} {}", r + 1, c + 1, v).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn single_entry() {
        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n");
        let a = read_matrix_market(f.path()).unwrap();
        assert_eq!((a.rows(), a.cols(), a.nnz()), (2, 2, 1));
        assert_eq!(a.row(0), (&[0usize][..], &[1.0][..]));
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let f = write_tmp(
            "%%MatrixMarket matrix coordinate real general\n% a comment\n\n3 2 2\n% mid\n3 2 -1.5e0\n1 1 4\n",
        );
        let a = read_matrix_market(f.path()).unwrap();
        assert_eq!(a.to_dense(), vec![vec![4.0, 0.0], vec![0.0, 0.0], vec![0.0, -1.5]]);
    }

    #[test]
    fn short_entry_list_is_a_format_error() {
        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n2 2 1.0\n");
        match read_matrix_market(f.path()) {
            Err(Error::Format { line, msg, .. }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("declared 3"), "{msg}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn unsupported_header() {
        let f = write_tmp("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
        assert!(matches!(read_matrix_market(f.path()), Err(Error::Format { line: 1, .. })));
        let f = write_tmp("%%MatrixMarket matrix array real general\n1 1\n1\n");
        assert!(matches!(read_matrix_market(f.path()), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn bad_index_reports_line() {
        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n0 2 1\n");
        assert!(matches!(read_matrix_market(f.path()), Err(Error::Format { line: 4, .. })));
        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n");
        assert!(matches!(read_matrix_market(f.path()), Err(Error::Format { line: 3, .. })));
    }

    #[test]
    fn duplicate_entry_is_a_format_error() {
        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n");
        assert!(matches!(read_matrix_market(f.path()), Err(Error::Format { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_matrix_market("/nonexistent/definitely/missing.mtx"),
            Err(Error::Io { .. })
        ));
    }
}
