use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CountMatrix, MatrixFormat, Storage};
use crate::error::{Error, Result};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Shortest text that parses back to the same `f64`; integral values
/// carry no fractional part.
pub fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn write_value<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        write!(w, "{}", v as i64)
    } else {
        write!(w, "{v:?}")
    }
}

pub fn load_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<CountMatrix> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    match format {
        MatrixFormat::DenseCsv => read_dense_csv(path, reader),
        MatrixFormat::Triplet => read_triplet(path, reader),
    }
}

fn read_dense_csv<R: BufRead>(path: &Path, reader: R) -> Result<CountMatrix> {
    let mut data = Vec::new();
    let mut n_cols = 0;
    let mut n_rows = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let start = data.len();
        for (c, field) in line.split(',').enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(path, lineno + 1, format!("bad number {field:?}")))?;
            if v < 0.0 {
                return Err(Error::Negative {
                    row: n_rows,
                    col: c,
                    value: v,
                });
            }
            data.push(v);
        }
        let width = data.len() - start;
        if n_rows == 0 {
            n_cols = width;
        } else if width != n_cols {
            return Err(parse_err(
                path,
                lineno + 1,
                format!("expected {n_cols} fields, found {width}"),
            ));
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::Empty);
    }
    CountMatrix::from_dense(n_rows, n_cols, data)
}

fn read_triplet<R: BufRead>(path: &Path, reader: R) -> Result<CountMatrix> {
    let mut lines = reader.lines().enumerate();
    let (n_rows, n_cols, nnz) = loop {
        let Some((lineno, line)) = lines.next() else {
            return Err(Error::Empty);
        };
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let header = line
            .strip_prefix('%')
            .ok_or_else(|| parse_err(path, lineno + 1, "missing %<rows> <cols> <nnz> header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(path, lineno + 1, "bad header"))?;
        if dims.len() != 3 {
            return Err(parse_err(path, lineno + 1, "header needs 3 integers"));
        }
        break (dims[0], dims[1], dims[2]);
    };
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::Empty);
    }

    let mut col_ptr = vec![0usize; n_cols + 1];
    let mut rows = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    let mut prev: Option<(usize, usize)> = None;
    for (lineno, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let mut fields = line.split_whitespace();
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| parse_err(path, lineno, format!("missing {what}")))
        };
        let r: usize = next("row")?
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad row index"))?;
        let c: usize = next("column")?
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad column index"))?;
        let v: f64 = next("value")?
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad value"))?;
        if r >= n_rows || c >= n_cols {
            return Err(parse_err(path, lineno, format!("index ({r}, {c}) out of range")));
        }
        if let Some((pr, pc)) = prev {
            if (c, r) <= (pc, pr) {
                return Err(parse_err(
                    path,
                    lineno,
                    "entries must be unique and sorted by column then row",
                ));
            }
        }
        if v < 0.0 {
            return Err(Error::Negative {
                row: r,
                col: c,
                value: v,
            });
        }
        prev = Some((r, c));
        col_ptr[c + 1] += 1;
        rows.push(r as u32);
        values.push(v);
    }
    if rows.len() != nnz {
        return Err(parse_err(
            path,
            0,
            format!("header declares {nnz} entries, found {}", rows.len()),
        ));
    }
    for c in 0..n_cols {
        col_ptr[c + 1] += col_ptr[c];
    }
    CountMatrix::from_compressed(n_rows, n_cols, col_ptr, rows, values)
}

pub fn save_matrix(m: &CountMatrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        MatrixFormat::DenseCsv => match m.storage() {
            Storage::Dense(d) => {
                for row in d.chunks_exact(m.n_cols()) {
                    for (c, &v) in row.iter().enumerate() {
                        if c > 0 {
                            w.write_all(b",")?;
                        }
                        write_value(&mut w, v)?;
                    }
                    w.write_all(b"\n")?;
                }
            }
            Storage::Sparse(_) => {
                for r in 0..m.n_rows() {
                    for (c, v) in m.row_dense(r).into_iter().enumerate() {
                        if c > 0 {
                            w.write_all(b",")?;
                        }
                        write_value(&mut w, v)?;
                    }
                    w.write_all(b"\n")?;
                }
            }
        },
        MatrixFormat::Triplet => {
            let trip = m.triplets();
            writeln!(w, "%{} {} {}", m.n_rows(), m.n_cols(), trip.len())?;
            for (r, c, v) in trip {
                write!(w, "{r} {c} ")?;
                write_value(&mut w, v)?;
                w.write_all(b"\n")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads one real per line (signals, marginal sums, value lists).
pub fn load_values(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(
            line.parse()
                .map_err(|_| parse_err(path, lineno + 1, format!("bad number {line:?}")))?,
        );
    }
    Ok(out)
}

pub fn save_values(values: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &v in values {
        write_value(&mut w, v)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_three_line_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "m.csv", "1,2\n0,1\n2,0\n");
        let m = load_matrix(&p, MatrixFormat::DenseCsv).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (3, 2));
        assert_eq!(m.grand_total(), 6.0);
    }

    #[test]
    fn loads_triplet_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "m.tpl", "%3 2 4\n0 0 1\n2 0 2\n0 1 2\n1 1 1\n");
        let m = load_matrix(&p, MatrixFormat::Triplet).unwrap();
        assert!(m.is_sparse());
        assert_eq!((m.n_rows(), m.n_cols()), (3, 2));
        assert_eq!(m.column_sums(), vec![3.0, 3.0]);
    }

    #[test]
    fn negative_csv_cell_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "m.csv", "1,2\n0,-1\n");
        match load_matrix(&p, MatrixFormat::DenseCsv) {
            Err(Error::Negative { row, col, value }) => {
                assert_eq!((row, col, value), (1, 1, -1.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "m.csv", "1,2\n3,x\n");
        match load_matrix(&p, MatrixFormat::DenseCsv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let p = write(&dir, "ragged.csv", "1,2\n3\n");
        assert!(matches!(
            load_matrix(&p, MatrixFormat::DenseCsv),
            Err(Error::Parse { line: 2, .. })
        ));
        let p = write(&dir, "unsorted.tpl", "%2 2 2\n0 1 1\n0 0 1\n");
        assert!(matches!(
            load_matrix(&p, MatrixFormat::Triplet),
            Err(Error::Parse { line: 3, .. })
        ));
        let p = write(&dir, "count.tpl", "%2 2 3\n0 1 1\n");
        assert!(matches!(load_matrix(&p, MatrixFormat::Triplet), Err(Error::Parse { .. })));
        let p = write(&dir, "empty.csv", "\n");
        assert!(matches!(load_matrix(&p, MatrixFormat::DenseCsv), Err(Error::Empty)));
    }

    #[test]
    fn values_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        let v = vec![6800.0, 6800.5, 0.1, 1e-300, 123456789.123456789];
        save_values(&v, &p).unwrap();
        assert_eq!(load_values(&p).unwrap(), v);
    }
}
