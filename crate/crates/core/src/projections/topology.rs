use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::matrix::{ProjectionKind, ProjectionMatrix, ProjectionMeta, MAX_RANK_RETRIES};
use crate::numerics::RngStream;
use crate::{Error, Result};

/// Undirected network; edge `e` is `edges[e]`. Nodes are zero-based in
/// memory and one-based in edge-list files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridTopology {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

impl GridTopology {
    pub fn new(node_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if node_count == 0 || edges.is_empty() {
            return Err(Error::domain("topology needs at least one node and one edge"));
        }
        let mut incident = vec![Vec::new(); node_count];
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::domain(format!("edge {e} is a self-loop at node {}", a + 1)));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::domain(format!("edge {e} references a node beyond {node_count}")));
            }
            incident[a].push(e);
            incident[b].push(e);
        }
        Ok(GridTopology {
            node_count,
            edges,
            incident,
        })
    }

    /// Parses a whitespace-separated `node_a node_b` edge list with 1-based
    /// node ids; `#` starts a comment. The node count is the largest id.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_node = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut next = || -> Result<usize> {
                let tok = it
                    .next()
                    .ok_or_else(|| Error::parse(idx + 1, "expected two node ids"))?;
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(idx + 1, format!("bad node id `{tok}`")))?;
                if v == 0 {
                    return Err(Error::parse(idx + 1, "node ids are 1-based"));
                }
                Ok(v)
            };
            let (a, b) = (next()?, next()?);
            if it.next().is_some() {
                return Err(Error::parse(idx + 1, "trailing fields after edge"));
            }
            max_node = max_node.max(a).max(b);
            edges.push((a - 1, b - 1));
        }
        Self::new(max_node, edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# {} nodes, {} edges\n", self.node_count, self.edges.len());
        for &(a, b) in &self.edges {
            let _ = writeln!(s, "{} {}", a + 1, b + 1);
        }
        s
    }

    /// Connected random graph: a random recursive tree plus uniformly drawn
    /// extra edges, no self-loops or parallel edges.
    pub fn synthetic(node_count: usize, edge_count: usize, rng: &mut RngStream) -> Result<Self> {
        let max_edges = node_count.saturating_mul(node_count.saturating_sub(1)) / 2;
        if node_count < 2 || edge_count + 1 < node_count || edge_count > max_edges {
            return Err(Error::domain(format!(
                "cannot build a connected simple graph with {node_count} nodes and {edge_count} edges"
            )));
        }
        let mut seen = HashSet::with_capacity(edge_count);
        let mut edges = Vec::with_capacity(edge_count);
        for v in 1..node_count {
            let u = rng.below(v);
            seen.insert((u, v));
            edges.push((u, v));
        }
        while edges.len() < edge_count {
            let a = rng.below(node_count);
            let b = rng.below(node_count);
            let key = (a.min(b), a.max(b));
            if a != b && seen.insert(key) {
                edges.push(key);
            }
        }
        Self::new(node_count, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge indices incident to `node`.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incident[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.incident[node].len()
    }

    /// 0-1 node/edge incidence rows for `nodes`.
    pub fn incidence_projection(&self, nodes: &[usize]) -> Result<ProjectionMatrix> {
        let n = self.edges.len();
        let mut e = vec![0.0; nodes.len() * n];
        for (r, &v) in nodes.iter().enumerate() {
            if v >= self.node_count {
                return Err(Error::domain(format!("node {v} out of range")));
            }
            for &k in &self.incident[v] {
                e[r * n + k] = 1.0;
            }
        }
        ProjectionMatrix::new(nodes.len(), n, e, ProjectionKind::Topology, ProjectionMeta::default())
    }
}

/// Draws sets of sensing nodes: `m` distinct nodes of positive degree,
/// uniformly at random, redrawn while two chosen nodes have identical
/// incidence (which would make `A Aᵀ` singular).
#[derive(Debug, Clone)]
pub struct SensingSampler {
    eligible: Vec<usize>,
    // For simple graphs only the two ends of an isolated edge (or of an
    // isolated bundle of parallel edges) share their incidence.
    twin: Vec<Option<usize>>,
}

impl SensingSampler {
    pub fn new(topo: &GridTopology) -> Self {
        let eligible: Vec<usize> = (0..topo.node_count).filter(|&v| topo.degree(v) > 0).collect();
        let only_neighbour = |v: usize| -> Option<usize> {
            let mut it = topo.incident(v).iter().map(|&e| {
                let (a, b) = topo.edges[e];
                if a == v {
                    b
                } else {
                    a
                }
            });
            let first = it.next()?;
            it.all(|u| u == first).then_some(first)
        };
        let twin = (0..topo.node_count)
            .map(|v| {
                let u = only_neighbour(v)?;
                (only_neighbour(u) == Some(v)).then_some(u)
            })
            .collect();
        SensingSampler { eligible, twin }
    }

    pub fn eligible_count(&self) -> usize {
        self.eligible.len()
    }

    /// Writes a sorted node set into `out`.
    pub fn sample_into(&self, m: usize, rng: &mut RngStream, out: &mut Vec<usize>) -> Result<()> {
        if m == 0 || m > self.eligible.len() {
            return Err(Error::domain(format!(
                "cannot select {m} sensing nodes from {} nodes with edges",
                self.eligible.len()
            )));
        }
        for _ in 0..MAX_RANK_RETRIES {
            out.clear();
            out.extend(
                rand::seq::index::sample(rng, self.eligible.len(), m)
                    .into_iter()
                    .map(|i| self.eligible[i]),
            );
            out.sort_unstable();
            let clash = out
                .iter()
                .any(|&v| self.twin[v].is_some_and(|u| out.binary_search(&u).is_ok()));
            if !clash {
                return Ok(());
            }
        }
        Err(Error::Construction {
            what: "sensing node selection",
            retries: MAX_RANK_RETRIES,
        })
    }
}

/// One draw of [`SensingSampler`], sorted.
pub fn sample_sensing_nodes(topo: &GridTopology, m: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(m);
    SensingSampler::new(topo).sample_into(m, rng, &mut out)?;
    Ok(out)
}

/// Random `m`-node incidence sensing matrix over the edges of `topo`.
pub fn topology_projection(topo: &GridTopology, m: usize, rng: &mut RngStream) -> Result<ProjectionMatrix> {
    for _ in 0..MAX_RANK_RETRIES {
        let nodes = sample_sensing_nodes(topo, m, rng)?;
        match topo.incidence_projection(&nodes) {
            Err(Error::NotPositiveDefinite { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::Construction {
        what: "topology projection",
        retries: MAX_RANK_RETRIES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> GridTopology {
        GridTopology::parse("# path\n1 2\n2 3\n").unwrap()
    }

    #[test]
    fn middle_node_row() {
        let a = path3().incidence_projection(&[1]).unwrap();
        assert_eq!(a.entries(), &[1.0, 1.0]);
    }

    #[test]
    fn end_nodes_give_identity() {
        let a = path3().incidence_projection(&[0, 2]).unwrap();
        assert_eq!(a.entries(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(a.gram(), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn parse_errors() {
        assert!(GridTopology::parse("1 1\n").is_err());
        assert!(GridTopology::parse("0 2\n").is_err());
        assert!(GridTopology::parse("1\n").is_err());
        assert!(GridTopology::parse("1 2 3\n").is_err());
        assert!(GridTopology::parse("# nothing\n").is_err());
        match GridTopology::parse("1 2\nx 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let t = GridTopology::synthetic(40, 60, &mut RngStream::new(3, 0)).unwrap();
        assert_eq!(GridTopology::parse(&t.to_edge_list()).unwrap(), t);
    }

    #[test]
    fn synthetic_is_simple_and_connected() {
        let t = GridTopology::synthetic(200, 300, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(t.edge_count(), 300);
        let set: HashSet<_> = t.edges().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        assert_eq!(set.len(), 300);
        let mut seen = vec![false; 200];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in t.incident(v) {
                let (a, b) = t.edges()[e];
                let u = if a == v { b } else { a };
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn twins_detected() {
        let t = GridTopology::parse("1 2\n3 4\n4 5\n6 7\n6 7\n").unwrap();
        let s = SensingSampler::new(&t);
        assert_eq!(s.twin[0], Some(1));
        assert_eq!(s.twin[2], None);
        assert_eq!(s.twin[5], Some(6));
    }

    #[test]
    fn two_leaves_on_one_edge_never_both_selected() {
        let t = GridTopology::parse("1 2\n3 4\n").unwrap();
        for seed in 0..50 {
            let a = topology_projection(&t, 2, &mut RngStream::new(seed, 0)).unwrap();
            assert_eq!(a.rows(), 2);
        }
    }

    #[test]
    fn western_scale_construction() {
        let mut rng = RngStream::new(2013, 0);
        let t = GridTopology::synthetic(4941, 6594, &mut rng).unwrap();
        let a = topology_projection(&t, 100, &mut rng).unwrap();
        assert_eq!((a.rows(), a.cols()), (100, 6594));
        assert!((0..a.rows()).all(|i| a.gram_factor().get(i, i) > 0.0));
    }
}
