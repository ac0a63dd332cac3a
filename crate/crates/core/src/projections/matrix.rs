use std::fmt;
use std::str::FromStr;

use crate::numerics::{cholesky_spd, RngStream, SpdFactor};
use crate::{Error, Result};

/// Retries for randomised constructions whose draw can be rank deficient.
pub(crate) const MAX_RANK_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectionKind {
    Gaussian,
    Expander,
    Identity,
    RowSelection,
    Topology,
    Custom,
}

impl ProjectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionKind::Gaussian => "gaussian",
            ProjectionKind::Expander => "expander",
            ProjectionKind::Identity => "identity",
            ProjectionKind::RowSelection => "row_selection",
            ProjectionKind::Topology => "topology",
            ProjectionKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ProjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProjectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => ProjectionKind::Gaussian,
            "expander" => ProjectionKind::Expander,
            "identity" => ProjectionKind::Identity,
            "row_selection" => ProjectionKind::RowSelection,
            "topology" => ProjectionKind::Topology,
            "custom" => ProjectionKind::Custom,
            other => return Err(Error::domain(format!("unknown projection kind `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionMeta {
    pub column_degree: Option<usize>,
    pub row_degree: Option<usize>,
    pub seed: Option<u64>,
}

/// A full-row-rank `M x N` sensing matrix together with the Cholesky factor
/// of `A Aᵀ`.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    kind: ProjectionKind,
    meta: ProjectionMeta,
    gram_factor: SpdFactor,
}

impl ProjectionMatrix {
    /// Validates shape, the structural invariants of `kind`, and positive
    /// definiteness of `A Aᵀ`. `entries` is row-major.
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
        kind: ProjectionKind,
        meta: ProjectionMeta,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || rows > cols {
            return Err(Error::domain(format!(
                "projection must satisfy 1 <= M <= N, got M={rows}, N={cols}"
            )));
        }
        crate::error::check_dim(rows * cols, entries.len())?;
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("projection has non-finite entries"));
        }
        check_structure(rows, cols, &entries, kind, &meta)?;
        let gram = gram(rows, cols, &entries);
        let gram_factor = cholesky_spd(&gram, rows)?;
        Ok(ProjectionMatrix {
            rows,
            cols,
            entries,
            kind,
            meta,
            gram_factor,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            e[i * n + i] = 1.0;
        }
        Self::new(n, n, e, ProjectionKind::Identity, ProjectionMeta::default())
    }

    /// Rows are the unit vectors of `indices` (zero-based, distinct).
    pub fn row_selection(n: usize, indices: &[usize]) -> Result<Self> {
        let m = indices.len();
        let mut e = vec![0.0; m * n];
        for (r, &i) in indices.iter().enumerate() {
            if i >= n {
                return Err(Error::domain(format!("row selection index {i} out of range 0..{n}")));
            }
            e[r * n + i] = 1.0;
        }
        Self::new(m, n, e, ProjectionKind::RowSelection, ProjectionMeta::default())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn meta(&self) -> &ProjectionMeta {
        &self.meta
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Cholesky factor `L` of `A Aᵀ`.
    pub fn gram_factor(&self) -> &SpdFactor {
        &self.gram_factor
    }

    /// Row-major `A Aᵀ`.
    pub fn gram(&self) -> Vec<f64> {
        gram(self.rows, self.cols, &self.entries)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::error::check_dim(self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `Aᵀ v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        crate::error::check_dim(self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    /// `c A` as a custom-kind matrix.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let e = self.entries.iter().map(|x| c * x).collect();
        Self::new(self.rows, self.cols, e, ProjectionKind::Custom, self.meta)
    }

    /// Largest singular value by power iteration on `A Aᵀ` (relative
    /// tolerance 1e-8 on the Rayleigh quotient, at most 10^4 iterations).
    /// The Rayleigh quotient never exceeds the true eigenvalue, so the
    /// estimate approaches `sigma_max` from below.
    pub fn sigma_max(&self) -> f64 {
        let m = self.rows;
        let g = self.gram();
        let mut v: Vec<f64> = (0..m as u64)
            .map(|i| 1.0 + (crate::numerics::splitmix64(i) >> 11) as f64 / (1u64 << 53) as f64)
            .collect();
        normalise(&mut v);
        let mut lambda = 0.0;
        let mut w = vec![0.0; m];
        for _ in 0..10_000 {
            for i in 0..m {
                w[i] = g[i * m..(i + 1) * m].iter().zip(&v).map(|(a, b)| a * b).sum();
            }
            let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
            normalise(&mut w);
            std::mem::swap(&mut v, &mut w);
            let done = (next - lambda).abs() <= 1e-8 * next.abs();
            lambda = next;
            if done {
                break;
            }
        }
        lambda.max(0.0).sqrt()
    }
}

fn normalise(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn gram(rows: usize, cols: usize, e: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; rows * rows];
    for i in 0..rows {
        let ri = &e[i * cols..(i + 1) * cols];
        for j in 0..=i {
            let rj = &e[j * cols..(j + 1) * cols];
            let s: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
            g[i * rows + j] = s;
            g[j * rows + i] = s;
        }
    }
    g
}

fn check_structure(
    rows: usize,
    cols: usize,
    e: &[f64],
    kind: ProjectionKind,
    meta: &ProjectionMeta,
) -> Result<()> {
    let binary = e.iter().all(|&x| x == 0.0 || x == 1.0);
    match kind {
        ProjectionKind::Expander => {
            let (d, c) = match (meta.column_degree, meta.row_degree) {
                (Some(d), Some(c)) => (d, c),
                _ => return Err(Error::domain("expander requires column and row degree metadata")),
            };
            if !binary || cols * d != rows * c {
                return Err(Error::domain("expander must be 0-1 with N d = M c"));
            }
            for i in 0..rows {
                let s: f64 = e[i * cols..(i + 1) * cols].iter().sum();
                if s != c as f64 {
                    return Err(Error::domain(format!("expander row {i} sums to {s}, expected {c}")));
                }
            }
            for j in 0..cols {
                let s: f64 = (0..rows).map(|i| e[i * cols + j]).sum();
                if s != d as f64 {
                    return Err(Error::domain(format!("expander column {j} sums to {s}, expected {d}")));
                }
            }
        }
        ProjectionKind::RowSelection | ProjectionKind::Identity => {
            if !binary {
                return Err(Error::domain("row selection must be 0-1"));
            }
            let mut seen = vec![false; cols];
            for i in 0..rows {
                let row = &e[i * cols..(i + 1) * cols];
                let ones: Vec<usize> = (0..cols).filter(|&j| row[j] == 1.0).collect();
                if ones.len() != 1 || seen[ones[0]] {
                    return Err(Error::domain(format!(
                        "row {i} of a row selection must pick one fresh coordinate"
                    )));
                }
                seen[ones[0]] = true;
            }
            if kind == ProjectionKind::Identity && (rows != cols || (0..rows).any(|i| e[i * cols + i] != 1.0)) {
                return Err(Error::domain("identity projection must be the square identity"));
            }
        }
        ProjectionKind::Topology if !binary => {
            return Err(Error::domain("topology projection must be 0-1"));
        }
        _ => {}
    }
    Ok(())
}

/// `M x N` matrix of i.i.d. `N(0, entry_variance)` entries; redrawn if
/// `A Aᵀ` is numerically singular.
pub fn gaussian_projection(
    m: usize,
    n: usize,
    entry_variance: f64,
    rng: &mut RngStream,
) -> Result<ProjectionMatrix> {
    if m == 0 || m > n {
        return Err(Error::domain(format!("gaussian projection needs 1 <= M <= N, got M={m}, N={n}")));
    }
    if !(entry_variance > 0.0) || !entry_variance.is_finite() {
        return Err(Error::domain("entry variance must be positive"));
    }
    let sd = entry_variance.sqrt();
    let meta = ProjectionMeta {
        seed: Some(rng.root_seed()),
        ..Default::default()
    };
    for _ in 0..MAX_RANK_RETRIES {
        let mut e = vec![0.0; m * n];
        rng.fill_normal(&mut e);
        e.iter_mut().for_each(|x| *x *= sd);
        match ProjectionMatrix::new(m, n, e, ProjectionKind::Gaussian, meta) {
            Err(Error::NotPositiveDefinite { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::Construction {
        what: "gaussian projection",
        retries: MAX_RANK_RETRIES,
    })
}
