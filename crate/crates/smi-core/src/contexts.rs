//! Convenience constructors for frequently used graph product contexts.

use crate::error::Result;
use crate::fingroup::FiniteGroup;
use crate::graph::{build_graph, Graph, VertexId};
use crate::word::GraphProduct;

/// Free product of cyclic groups: edgeless graph with vertices `w0, w1, ..`.
pub fn free_product(orders: &[usize]) -> GraphProduct {
    let names: Vec<String> = (0..orders.len()).map(|i| format!("w{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let graph = build_graph(&refs, &[]).expect("edgeless graph is simple");
    let groups = orders.iter().map(|&n| FiniteGroup::cyclic(n).expect("n > 0")).collect();
    GraphProduct::new(graph, groups).expect("one group per vertex")
}

/// Path graph `v1 - v2 - .. - vn` with cyclic vertex groups of given orders.
pub fn path(orders: &[usize]) -> GraphProduct {
    let names: Vec<String> = (1..=orders.len()).map(|i| format!("v{i}")).collect();
    let edges: Vec<(String, String)> =
        (0..orders.len().saturating_sub(1)).map(|i| (names[i].clone(), names[i + 1].clone())).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let edge_refs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let graph = build_graph(&refs, &edge_refs).expect("path graph is simple");
    let groups = orders.iter().map(|&n| FiniteGroup::cyclic(n).expect("n > 0")).collect();
    GraphProduct::new(graph, groups).expect("one group per vertex")
}

/// The path on four vertices with Z2 at every vertex.
pub fn p4_all_z2() -> GraphProduct {
    path(&[2, 2, 2, 2])
}

/// P4 with Z2 everywhere except one replaced vertex group.
pub fn p4_with_group_at(v: VertexId, group: FiniteGroup) -> GraphProduct {
    let mut groups: Vec<FiniteGroup> =
        (0..4).map(|_| FiniteGroup::cyclic(2).expect("2 > 0")).collect();
    groups[v] = group;
    GraphProduct::new(p4_all_z2().graph().clone(), groups).expect("one group per vertex")
}

/// Arbitrary simple graph with Z2 at every vertex.
pub fn all_z2(vertices: &[&str], edges: &[(&str, &str)]) -> GraphProduct {
    let graph = build_graph(vertices, edges).expect("simple graph");
    let groups = (0..vertices.len()).map(|_| FiniteGroup::cyclic(2).expect("2 > 0")).collect();
    GraphProduct::new(graph, groups).expect("one group per vertex")
}

/// Same-shape context over an explicit graph and per-vertex groups.
pub fn with_groups(graph: Graph, groups: Vec<FiniteGroup>) -> Result<GraphProduct> {
    GraphProduct::new(graph, groups)
}
