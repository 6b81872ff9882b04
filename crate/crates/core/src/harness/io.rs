//! Instance files: Matrix Market for `A`, a plain list for `b` and a JSON
//! description.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{Oracle, SoftMaxProblem};
use crate::sparse::{read_matrix_market, write_matrix_market};

pub const MATRIX_FILE: &str = "A.mtx";
pub const B_FILE: &str = "b.txt";
pub const META_FILE: &str = "meta.json";

/// Writes `b` as `# length n` followed by one value per line.
pub fn write_vector(b: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "# length {}", b.len())?;
        for v in b {
            writeln!(w, "{v}")?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let format = |line: usize, msg: String| Error::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut expected = None;
    let mut values = Vec::new();
    let mut last = 0;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        last = lineno;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            if expected.is_none() && values.is_empty() {
                let n = rest
                    .trim()
                    .strip_prefix("length")
                    .and_then(|s| s.trim().parse::<usize>().ok())
                    .ok_or_else(|| format(lineno, format!("expected `# length n` header, got {text:?}")))?;
                expected = Some(n);
            }
            continue;
        }
        if expected.is_none() {
            return Err(format(lineno, "missing `# length n` header".into()));
        }
        let v: f64 = text
            .parse()
            .map_err(|_| format(lineno, format!("not a number: {text:?}")))?;
        if !v.is_finite() {
            return Err(format(lineno, format!("non-finite value {v}")));
        }
        values.push(v);
    }
    match expected {
        None => Err(format(last.max(1), "missing `# length n` header".into())),
        Some(n) if n != values.len() => Err(format(
            last.max(1),
            format!("header declares {n} values, found {}", values.len()),
        )),
        Some(_) => Ok(values),
    }
}

/// Description written next to a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub mode: String,
    pub m: usize,
    pub n: usize,
    pub nnz: usize,
    pub density: Option<f64>,
    pub gamma: f64,
    pub seed: Option<u64>,
    pub lipschitz: f64,
    pub mean_component_lipschitz: f64,
}

impl InstanceMeta {
    pub fn describe(problem: &SoftMaxProblem, mode: &str, density: Option<f64>, seed: Option<u64>) -> Self {
        let a = problem.matrix();
        let li = problem.component_lipschitz();
        Self {
            mode: mode.to_string(),
            m: a.rows(),
            n: a.cols(),
            nnz: a.nnz(),
            density,
            gamma: problem.gamma(),
            seed,
            lipschitz: problem.gradient_lipschitz(),
            mean_component_lipschitz: li.iter().sum::<f64>() / li.len().max(1) as f64,
        }
    }
}

/// Writes `A.mtx`, `b.txt` and `meta.json` into `dir`, creating it.
pub fn write_instance(problem: &SoftMaxProblem, meta: &InstanceMeta, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix_market(problem.matrix(), dir.join(MATRIX_FILE))?;
    write_vector(problem.b(), dir.join(B_FILE))?;
    write_json(meta, dir.join(META_FILE))
}

/// Reads `A` and `b`. Without a `b` file the caller must supply one.
pub fn read_instance(matrix: &Path, b: &Path, gamma: f64) -> Result<SoftMaxProblem> {
    let a = read_matrix_market(matrix)?;
    let b = read_vector(b)?;
    SoftMaxProblem::new(a, b, gamma)
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: PathBuf) -> Result<()> {
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))
}
