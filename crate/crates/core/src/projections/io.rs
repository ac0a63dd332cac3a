//! CSV export/import of projection matrices.
//!
//! ```text
//! kind,M,N,d,c,seed
//! expander,3,6,1,2,42
//! 1,0,0,1,0,0
//! ...
//! ```
//!
//! The header line is followed by one metadata line (absent fields empty)
//! and `M` lines of `N` entries.

use std::fmt::Write as _;

use super::matrix::{ProjectionKind, ProjectionMatrix, ProjectionMeta};
use crate::{Error, Result};

const HEADER: &str = "kind,M,N,d,c,seed";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ProjectionMatrix {
    pub fn to_csv(&self) -> String {
        let meta = self.meta();
        let mut s = format!(
            "{HEADER}\n{},{},{},{},{},{}\n",
            self.kind(),
            self.rows(),
            self.cols(),
            opt(meta.column_degree),
            opt(meta.row_degree),
            opt(meta.seed)
        );
        for i in 0..self.rows() {
            let mut first = true;
            for x in self.row(i) {
                if !first {
                    s.push(',');
                }
                first = false;
                // `{}` on f64 is shortest round-trip
                let _ = write!(s, "{x}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "empty projection file"))?;
        if header.trim() != HEADER {
            return Err(Error::parse(ln + 1, format!("expected header `{HEADER}`")));
        }
        let (ln, meta_line) = lines
            .next()
            .ok_or_else(|| Error::parse(ln + 2, "missing metadata line"))?;
        let f: Vec<&str> = meta_line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(Error::parse(ln + 1, "metadata line needs 6 fields"));
        }
        let bad = |what: &str| Error::parse(ln + 1, format!("bad {what}"));
        let kind: ProjectionKind = f[0].parse()?;
        let m: usize = f[1].parse().map_err(|_| bad("M"))?;
        let n: usize = f[2].parse().map_err(|_| bad("N"))?;
        let parse_opt = |s: &str, what: &str| -> Result<Option<u64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(what))
            }
        };
        let meta = ProjectionMeta {
            column_degree: parse_opt(f[3], "d")?.map(|x| x as usize),
            row_degree: parse_opt(f[4], "c")?.map(|x| x as usize),
            seed: parse_opt(f[5], "seed")?,
        };
        let mut entries = Vec::with_capacity(m * n);
        let mut rows = 0;
        for (ln, line) in lines {
            rows += 1;
            if rows > m {
                return Err(Error::parse(ln + 1, format!("more than M = {m} rows")));
            }
            let before = entries.len();
            for tok in line.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(ln + 1, format!("bad entry `{tok}`")))?;
                entries.push(v);
            }
            if entries.len() - before != n {
                return Err(Error::parse(ln + 1, format!("row has {} entries, expected {n}", entries.len() - before)));
            }
        }
        if rows != m {
            return Err(Error::domain(format!("projection file has {rows} rows, expected {m}")));
        }
        ProjectionMatrix::new(m, n, entries, kind, meta)
    }
}
