//! Finite simple graphs: the commutation data underlying a graph product.
//!
//! Vertices carry a fixed total order (their position in the vertex list);
//! the normal-form engine uses that order to pick canonical representatives,
//! so it is part of the graph's identity, not a display detail.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Which neighborhood of a vertex to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    /// Adjacent vertices only.
    Link,
    /// Adjacent vertices plus the vertex itself.
    Star,
}

/// A finite simple graph with named, totally ordered vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    adj: Vec<Vec<bool>>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

/// Validates and builds a [`Graph`] from vertex names and name pairs.
///
/// Rejects self-loops, duplicate edges and unknown endpoints, naming the
/// offending item.
pub fn build_graph<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Graph> {
    let names: Vec<String> = vertices.iter().map(|s| s.as_ref().to_string()).collect();
    let mut seen = BTreeSet::new();
    for n in &names {
        if !seen.insert(n.clone()) {
            return Err(Error::DuplicateEdge(n.clone(), "duplicate vertex".into()));
        }
    }
    let n = names.len();
    let mut adj = vec![vec![false; n]; n];
    let mut edge_set = BTreeSet::new();
    let index = |name: &str| -> Result<VertexId> {
        names
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    };
    for (a, b) in edges {
        let (a, b) = (a.as_ref(), b.as_ref());
        let (i, j) = (index(a)?, index(b)?);
        if i == j {
            return Err(Error::SelfLoop(a.to_string()));
        }
        let key = (i.min(j), i.max(j));
        if !edge_set.insert(key) {
            return Err(Error::DuplicateEdge(a.to_string(), b.to_string()));
        }
        adj[i][j] = true;
        adj[j][i] = true;
    }
    Ok(Graph { names, adj, edges: edge_set })
}

impl Graph {
    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_index(&self, name: &str) -> Result<VertexId> {
        self.names
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.edges
    }

    /// True when `a` and `b` are joined by an edge (never for `a == b`).
    pub fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.adj[a][b]
    }

    /// Link or star of a vertex.
    pub fn neighborhood(&self, v: VertexId, kind: Neighborhood) -> Result<BTreeSet<VertexId>> {
        if v >= self.names.len() {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        let mut out: BTreeSet<VertexId> =
            (0..self.names.len()).filter(|&u| self.adj[v][u]).collect();
        if kind == Neighborhood::Star {
            out.insert(v);
        }
        Ok(out)
    }

    /// Tests whether the graph is a join of two nonempty full subgraphs.
    ///
    /// Returns `(true, None)` when irreducible, otherwise `(false, Some((v1, v2)))`
    /// where every cross pair between `v1` and `v2` is an edge. The witness is
    /// read off the components of the complement graph: the graph is a join
    /// exactly when its complement is disconnected.
    pub fn is_irreducible(&self) -> Result<(bool, Option<(BTreeSet<VertexId>, BTreeSet<VertexId>)>)> {
        let n = self.names.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        // components of the complement
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = count;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    if v != u && !self.adj[u][v] && comp[v] == usize::MAX {
                        comp[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        if count == 1 {
            return Ok((true, None));
        }
        let first: BTreeSet<VertexId> = (0..n).filter(|&v| comp[v] == 0).collect();
        let rest: BTreeSet<VertexId> = (0..n).filter(|&v| comp[v] != 0).collect();
        Ok((false, Some((first, rest))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn p4() -> Graph {
        build_graph(&["v1", "v2", "v3", "v4"], &[("v1", "v2"), ("v2", "v3"), ("v3", "v4")]).unwrap()
    }

    #[test]
    fn builds_k2_and_p4() {
        let k2 = build_graph(&["v1", "v2"], &[("v1", "v2")]).unwrap();
        assert_eq!(k2.vertex_count(), 2);
        assert!(k2.adjacent(0, 1));
        let g = p4();
        assert_eq!(g.edges().len(), 3);
        assert!(!g.adjacent(0, 2));
    }

    #[test]
    fn rejects_self_loop() {
        let err = build_graph(&["v1"], &[("v1", "v1")]).unwrap_err();
        assert_eq!(err, Error::SelfLoop("v1".into()));
    }

    #[test]
    fn rejects_duplicate_edge_and_unknown_endpoint() {
        assert!(matches!(
            build_graph(&["v1", "v2"], &[("v1", "v2"), ("v2", "v1")]),
            Err(Error::DuplicateEdge(_, _))
        ));
        assert!(matches!(
            build_graph(&["v1", "v2"], &[("v1", "v9")]),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn link_and_star() {
        let g = p4();
        let link_v1 = g.neighborhood(0, Neighborhood::Link).unwrap();
        assert_eq!(link_v1, BTreeSet::from([1]));
        let star_v2 = g.neighborhood(1, Neighborhood::Star).unwrap();
        assert_eq!(star_v2, BTreeSet::from([0, 1, 2]));
        assert!(g.neighborhood(9, Neighborhood::Link).is_err());
    }

    /// Brute force join search over all bipartitions, used as the oracle
    /// for the complement-components implementation.
    fn join_by_brute_force(g: &Graph) -> Option<(BTreeSet<VertexId>, BTreeSet<VertexId>)> {
        let n = g.vertex_count();
        for mask in 1..(1u32 << n) - 1 {
            let v1: BTreeSet<VertexId> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            let v2: BTreeSet<VertexId> = (0..n).filter(|&v| mask & (1 << v) == 0).collect();
            if v1.iter().all(|&a| v2.iter().all(|&b| g.adjacent(a, b))) {
                return Some((v1, v2));
            }
        }
        None
    }

    #[test]
    fn irreducibility_matches_brute_force() {
        let k2 = build_graph(&["v1", "v2"], &[("v1", "v2")]).unwrap();
        let p3 = build_graph(&["v1", "v2", "v3"], &[("v1", "v2"), ("v2", "v3")]).unwrap();
        let cases = [(&k2, false), (&p3, false), (&p4(), true)];
        for (g, expect_irr) in cases {
            let (irr, witness) = g.is_irreducible().unwrap();
            assert_eq!(irr, expect_irr);
            assert_eq!(irr, join_by_brute_force(g).is_none());
            if let Some((v1, v2)) = witness {
                assert!(!v1.is_empty() && !v2.is_empty());
                assert!(v1.iter().all(|&a| v2.iter().all(|&b| g.adjacent(a, b))));
            }
        }
        // P3 splits off the middle vertex: complement has components {v1,v3} and {v2}
        let (_, w) = p3.is_irreducible().unwrap();
        let (a, b) = w.unwrap();
        assert!(a == BTreeSet::from([1]) && b == BTreeSet::from([0, 2])
            || b == BTreeSet::from([1]) && a == BTreeSet::from([0, 2]));
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = build_graph::<&str>(&[], &[]).unwrap();
        assert_eq!(g.is_irreducible().unwrap_err(), Error::EmptyGraph);
    }

    #[test]
    fn exhaustive_irreducibility_on_small_graphs() {
        // every graph on <= 5 vertices: complement-components agrees with brute force
        for n in 1..=5usize {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            for mask in 0..(1u64 << pairs.len()) {
                let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
                let edges: Vec<(String, String)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, &(i, j))| (names[i].clone(), names[j].clone()))
                    .collect();
                let g = build_graph(
                    &names.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
                    &edges
                        .iter()
                        .map(|(a, b)| (a.as_str(), b.as_str()))
                        .collect::<Vec<_>>(),
                )
                .unwrap();
                let (irr, _) = g.is_irreducible().unwrap();
                assert_eq!(irr, join_by_brute_force(&g).is_none(), "n={n} mask={mask}");
            }
        }
    }
}
