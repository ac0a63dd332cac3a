use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use crate::config::KeyValues;
use crate::numerics::RngStream;
use crate::projections::{
    expander_projection, gaussian_projection, GridTopology, ProjectionMatrix,
};
use crate::{Error, Result};

/// Stream id of the fixed projection matrix of a plan.
pub const PROJECTION_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone)]
pub enum ProjectionSpec {
    /// `M x N` Gaussian, entry variance defaults to `1/N`.
    Gaussian { m: usize, variance: Option<f64> },
    /// Biregular 0-1 with column degree `d`.
    Expander { m: usize, d: usize },
    Identity,
    /// A fresh uniform `M`-subset of entries every time step.
    Subsample { m: usize },
    /// A fresh set of `M` sensing nodes every time step, each measuring the
    /// sum over its incident edges. `N` is the edge count.
    GridNodes {
        topology: Arc<GridTopology>,
        source: String,
        m: usize,
    },
    /// A matrix supplied by the caller (`source` is its file path, if any).
    Custom {
        matrix: Arc<ProjectionMatrix>,
        source: String,
    },
}

impl ProjectionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProjectionSpec::Gaussian { .. } => "gaussian",
            ProjectionSpec::Expander { .. } => "expander",
            ProjectionSpec::Identity => "identity",
            ProjectionSpec::Subsample { .. } => "subsample",
            ProjectionSpec::GridNodes { .. } => "grid",
            ProjectionSpec::Custom { .. } => "custom",
        }
    }

    /// Sketch dimension per step (`n` is the ambient dimension).
    pub fn sketch_dim(&self, n: usize) -> usize {
        match self {
            ProjectionSpec::Gaussian { m, .. }
            | ProjectionSpec::Expander { m, .. }
            | ProjectionSpec::Subsample { m }
            | ProjectionSpec::GridNodes { m, .. } => *m,
            ProjectionSpec::Identity => n,
            ProjectionSpec::Custom { matrix, .. } => matrix.rows(),
        }
    }

    pub fn is_time_varying(&self) -> bool {
        matches!(self, ProjectionSpec::Subsample { .. } | ProjectionSpec::GridNodes { .. })
    }

    /// Builds the matrix of a static spec.
    pub fn build(&self, n: usize, rng: &mut RngStream) -> Result<ProjectionMatrix> {
        match self {
            ProjectionSpec::Gaussian { m, variance } => {
                gaussian_projection(*m, n, variance.unwrap_or(1.0 / n as f64), rng)
            }
            ProjectionSpec::Expander { m, d } => expander_projection(*m, n, *d, rng),
            ProjectionSpec::Identity => ProjectionMatrix::identity(n),
            ProjectionSpec::Custom { matrix, .. } => Ok((**matrix).clone()),
            _ => Err(Error::domain("time-varying projections have no single matrix")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMode {
    /// One matrix for all replicates.
    Fixed,
    /// A new matrix per replicate.
    Fresh,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Whitened windowed GLR (missing-data form for time-varying sensing).
    Glr,
    /// Per-coordinate CUSUMs on the raw sketches against an all-ones mean.
    CusumBaseline,
}

#[derive(Debug, Clone)]
pub struct DetectorSpec {
    pub projection: ProjectionSpec,
    pub matrix_mode: MatrixMode,
    pub method: Method,
    pub window: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeanSpec {
    /// Every entry equal to `value`.
    Uniform(f64),
    /// `round(fraction · N)` entries, chosen per replicate, equal to
    /// `value`; the rest zero.
    Sparse { fraction: f64, value: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeTime {
    /// No change (`κ = ∞`): run lengths estimate the ARL.
    Never,
    /// Change before the first sample (`κ = 0`): run lengths estimate the
    /// EDD.
    Immediate,
}

#[derive(Debug, Clone)]
pub struct DataSpec {
    pub n: usize,
    pub mean: MeanSpec,
    pub change: ChangeTime,
}

impl DataSpec {
    /// Post-change mean for one replicate, `None` under the null.
    pub(crate) fn draw_mean(&self, rng: &mut RngStream) -> Result<Option<Vec<f64>>> {
        if self.change == ChangeTime::Never {
            return Ok(None);
        }
        let n = self.n;
        Ok(Some(match &self.mean {
            MeanSpec::Uniform(v) => vec![*v; n],
            MeanSpec::Sparse { fraction, value } => {
                let k = (fraction * n as f64).round() as usize;
                let mut mu = vec![0.0; n];
                if k > 0 {
                    for i in rand::seq::index::sample(rng, n, k.min(n)) {
                        mu[i] = *value;
                    }
                }
                mu
            }
            MeanSpec::Explicit(mu) => {
                crate::error::check_dim(n, mu.len())?;
                mu.clone()
            }
        }))
    }
}

#[derive(Debug, Clone)]
pub struct SimPlan {
    pub detector: DetectorSpec,
    pub data: DataSpec,
    pub replicates: usize,
    pub horizon_cap: usize,
    pub root_seed: u64,
}

/// Keys understood by [`SimPlan::from_kv`].
pub const PLAN_KEYS: &[&str] = &[
    "projection",
    "M",
    "N",
    "d",
    "variance",
    "projection_file",
    "topology",
    "matrix_mode",
    "method",
    "w",
    "b",
    "mean",
    "mean_fraction",
    "mean_vector",
    "change",
    "replicates",
    "horizon_cap",
    "seed",
];

impl SimPlan {
    pub fn validate(&self) -> Result<()> {
        let n = self.data.n;
        if n == 0 || self.replicates == 0 || self.horizon_cap == 0 || self.detector.window == 0 {
            return Err(Error::domain("N, replicates, horizon cap and window must be positive"));
        }
        if self.detector.threshold.is_nan() {
            return Err(Error::domain("threshold is NaN"));
        }
        let m = self.detector.projection.sketch_dim(n);
        if m == 0 || m > n {
            return Err(Error::domain(format!("need 1 <= M <= N, got M={m}, N={n}")));
        }
        match &self.detector.projection {
            ProjectionSpec::GridNodes { topology, .. } if topology.edge_count() != n => {
                return Err(Error::domain(format!(
                    "grid plan needs N = edge count {}, got {n}",
                    topology.edge_count()
                )));
            }
            ProjectionSpec::Custom { matrix, .. } if matrix.cols() != n => {
                return Err(Error::Dimension {
                    expected: n,
                    got: matrix.cols(),
                });
            }
            _ => {}
        }
        if self.detector.projection.is_time_varying() && self.detector.method != Method::Glr {
            return Err(Error::domain("the CUSUM baseline needs a fixed projection"));
        }
        if let MeanSpec::Sparse { fraction, .. } = self.data.mean {
            if !(0.0..=1.0).contains(&fraction) {
                return Err(Error::domain("mean fraction must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// The matrix shared by all replicates, if the plan has one.
    pub fn fixed_projection(&self) -> Result<Option<ProjectionMatrix>> {
        let spec = &self.detector.projection;
        if spec.is_time_varying() || self.detector.matrix_mode == MatrixMode::Fresh {
            return Ok(None);
        }
        let mut rng = RngStream::new(self.root_seed, PROJECTION_STREAM);
        spec.build(self.data.n, &mut rng).map(Some)
    }

    /// Plain `key = value` form; [`SimPlan::from_kv`] inverts it.
    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        let d = &self.detector;
        kv.set("projection", d.projection.name());
        match &d.projection {
            ProjectionSpec::Gaussian { m, variance } => {
                kv.set("M", m.to_string());
                if let Some(v) = variance {
                    kv.set("variance", v.to_string());
                }
            }
            ProjectionSpec::Expander { m, d } => {
                kv.set("M", m.to_string());
                kv.set("d", d.to_string());
            }
            ProjectionSpec::Identity => {}
            ProjectionSpec::Subsample { m } => kv.set("M", m.to_string()),
            ProjectionSpec::GridNodes { source, m, .. } => {
                kv.set("M", m.to_string());
                kv.set("topology", source.clone());
            }
            ProjectionSpec::Custom { source, .. } => kv.set("projection_file", source.clone()),
        }
        kv.set("N", self.data.n.to_string());
        kv.set(
            "matrix_mode",
            match d.matrix_mode {
                MatrixMode::Fixed => "fixed",
                MatrixMode::Fresh => "fresh",
            },
        );
        kv.set(
            "method",
            match d.method {
                Method::Glr => "glr",
                Method::CusumBaseline => "cusum",
            },
        );
        kv.set("w", d.window.to_string());
        kv.set("b", fmt_f64(d.threshold));
        match &self.data.mean {
            MeanSpec::Uniform(v) => kv.set("mean", v.to_string()),
            MeanSpec::Sparse { fraction, value } => {
                kv.set("mean", value.to_string());
                kv.set("mean_fraction", fraction.to_string());
            }
            MeanSpec::Explicit(mu) => {
                let s: Vec<String> = mu.iter().map(|x| x.to_string()).collect();
                kv.set("mean_vector", s.join(" "));
            }
        }
        kv.set(
            "change",
            match self.data.change {
                ChangeTime::Never => "never",
                ChangeTime::Immediate => "immediate",
            },
        );
        kv.set("replicates", self.replicates.to_string());
        kv.set("horizon_cap", self.horizon_cap.to_string());
        kv.set("seed", self.root_seed.to_string());
        kv
    }

    /// Reads a plan; `topology` and `projection_file` values are paths
    /// (or `synthetic:<nodes>:<edges>:<seed>` for a generated topology).
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        kv.check_keys(PLAN_KEYS)?;
        let n: usize = kv.require("N")?;
        let kind = kv.get("projection").unwrap_or("gaussian");
        let projection = match kind {
            "gaussian" => ProjectionSpec::Gaussian {
                m: kv.require("M")?,
                variance: kv.get_parsed("variance")?,
            },
            "expander" => ProjectionSpec::Expander {
                m: kv.require("M")?,
                d: kv.require("d")?,
            },
            "identity" => ProjectionSpec::Identity,
            "subsample" => ProjectionSpec::Subsample { m: kv.require("M")? },
            "grid" => {
                let source: String = kv.require("topology")?;
                ProjectionSpec::GridNodes {
                    topology: Arc::new(load_topology(&source)?),
                    source,
                    m: kv.require("M")?,
                }
            }
            "custom" => {
                let source: String = kv.require("projection_file")?;
                let text = std::fs::read_to_string(PathBuf::from(&source))?;
                ProjectionSpec::Custom {
                    matrix: Arc::new(ProjectionMatrix::from_csv(&text)?),
                    source,
                }
            }
            other => return Err(Error::domain(format!("unknown projection `{other}`"))),
        };
        let matrix_mode = match kv.get("matrix_mode").unwrap_or("fixed") {
            "fixed" => MatrixMode::Fixed,
            "fresh" => MatrixMode::Fresh,
            other => return Err(Error::domain(format!("unknown matrix_mode `{other}`"))),
        };
        let method = match kv.get("method").unwrap_or("glr") {
            "glr" => Method::Glr,
            "cusum" => Method::CusumBaseline,
            other => return Err(Error::domain(format!("unknown method `{other}`"))),
        };
        let mean = if let Some(v) = kv.get("mean_vector").filter(|s| !s.is_empty()) {
            let mu: std::result::Result<Vec<f64>, _> = v.split_whitespace().map(str::parse).collect();
            MeanSpec::Explicit(mu.map_err(|_| Error::domain("bad mean_vector"))?)
        } else {
            let value: f64 = kv.get_parsed("mean")?.unwrap_or(0.0);
            match kv.get_parsed::<f64>("mean_fraction")? {
                Some(fraction) => MeanSpec::Sparse { fraction, value },
                None => MeanSpec::Uniform(value),
            }
        };
        let change = match kv.get("change").unwrap_or("never") {
            "never" => ChangeTime::Never,
            "immediate" => ChangeTime::Immediate,
            other => return Err(Error::domain(format!("unknown change `{other}`"))),
        };
        let plan = SimPlan {
            detector: DetectorSpec {
                projection,
                matrix_mode,
                method,
                window: kv.get_parsed("w")?.unwrap_or(200),
                threshold: kv.get_parsed("b")?.unwrap_or(f64::INFINITY),
            },
            data: DataSpec { n, mean, change },
            replicates: kv.get_parsed("replicates")?.unwrap_or(2000),
            horizon_cap: kv.get_parsed("horizon_cap")?.unwrap_or(100_000),
            root_seed: kv.get_parsed("seed")?.unwrap_or(0),
        };
        plan.validate()?;
        Ok(plan)
    }
}

fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        x.to_string()
    }
}

/// A topology from an edge-list path or `synthetic:<nodes>:<edges>:<seed>`.
pub fn load_topology(source: &str) -> Result<GridTopology> {
    if let Some(rest) = source.strip_prefix("synthetic:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let bad = || Error::domain(format!("bad synthetic topology spec `{source}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nodes: usize = parts[0].parse().map_err(|_| bad())?;
        let edges: usize = parts[1].parse().map_err(|_| bad())?;
        let seed: u64 = parts[2].parse().map_err(|_| bad())?;
        return GridTopology::synthetic(nodes, edges, &mut RngStream::new(seed, 0));
    }
    GridTopology::load(std::path::Path::new(source))
}

impl fmt::Display for SimPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_kv().fmt(f)
    }
}
