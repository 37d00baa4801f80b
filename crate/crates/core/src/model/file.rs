use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

use super::{parse_model, TestArray};

/// Text serialization of an array together with the strength it targets.
///
/// ```text
/// 2^3            <- model
/// 6 2            <- rows, strength
/// 0 0 0          <- one line per row
/// ...
/// ```
///
/// Lines starting with `#` are comments. Output always uses LF endings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayFile {
    pub array: TestArray,
    pub strength: usize,
}

impl ArrayFile {
    pub fn new(array: TestArray, strength: usize) -> Self {
        Self { array, strength }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let err = |line: usize, reason: String| Error::ArrayFile { line, reason };

        let (n, spec) = lines.next().ok_or_else(|| err(1, "missing model line".into()))?;
        let model = parse_model(spec).map_err(|e| err(n, e.to_string()))?;

        let (n, header) = lines
            .next()
            .ok_or_else(|| err(n + 1, "missing `rows strength` line".into()))?;
        let header: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(n, format!("expected two integers, found `{header}`")))?;
        let [m, t] = header[..] else {
            return Err(err(n, "expected exactly two integers `rows strength`".into()));
        };

        let mut rows = Vec::with_capacity(m);
        let mut last = n;
        for (n, line) in lines {
            last = n;
            let row: Vec<u32> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(n, format!("non-integer entry in `{line}`")))?;
            if row.len() != model.factors() {
                return Err(err(
                    n,
                    format!("expected {} entries, found {}", model.factors(), row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != m {
            return Err(err(
                last,
                format!("header declares {m} rows, found {}", rows.len()),
            ));
        }
        let array = TestArray::from_rows(model, &rows).map_err(|e| err(last, e.to_string()))?;
        Ok(Self { array, strength: t })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }
}

impl fmt::Display for ArrayFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.array.model())?;
        writeln!(f, "{} {}", self.array.num_rows(), self.strength)?;
        for row in self.array.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{v}")?;
                first = false;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}
