//! Exact construction of the finite iterates and measurements on them.
//!
//! One substitution step replaces every edge by a fresh copy of the rule
//! graph of the edge's colour, gluing the plus planting onto the edge's tail
//! and the minus planting onto its head. Interior rule vertices become new
//! graph vertices; their incidence vector at birth equals the rule's interior
//! incidence vector and only ever evolves through later substitutions of the
//! edges around them.
//!
//! The engine is deterministic: vertices are numbered in creation order
//! (initial vertices first, then interiors in edge order per step) and edges
//! are emitted in (parent edge, rule edge) order, so repeated runs produce
//! byte-identical exports. Everything here is brute force on purpose; it is
//! the ground truth the matrix analysis is validated against.

use crate::model::{kappa, Edge, IgsSpec, KappaVector};
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

/// Where a vertex came from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Origin {
    /// Vertex of the initial graph, by id there.
    Initial { vertex: u32 },
    /// Interior vertex of a rule copy, by rule colour and id in the rule.
    Interior { rule: crate::model::ColourId, vertex: u32 },
}

/// Per-vertex provenance record.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexRecord {
    pub birth_generation: u32,
    pub birth_type: KappaVector,
    pub origin: Origin,
}

/// A finite iterate with full provenance.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneratedGraph {
    pub generation: u32,
    /// Vertex id is the index into this vector.
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<Edge>,
    /// The distinguished pair of the default initial edge, when it exists.
    pub planted: Option<(u32, u32)>,
}

impl GeneratedGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("edge budget exceeded: next generation has {projected} edges, budget is {budget}")]
    BudgetExceeded { projected: u128, budget: u64 },
    #[error("graph has no planted vertex pair to measure")]
    NoPlantedPair,
    #[error("planted vertices are not connected")]
    PlantedUnreachable,
}

/// Generation 0: the system's initial graph with provenance records.
pub fn initial_graph(spec: &IgsSpec) -> GeneratedGraph {
    let initial = spec.effective_initial();
    let vertices = (0..initial.vertex_names.len() as u32)
        .map(|v| VertexRecord {
            birth_generation: 0,
            birth_type: kappa(&initial.edges, v, spec.colour_count),
            origin: Origin::Initial { vertex: v },
        })
        .collect();
    GeneratedGraph {
        generation: 0,
        vertices,
        edges: initial.edges.clone(),
        planted: if spec.has_planted_initial() {
            Some((0, 1))
        } else {
            None
        },
    }
}

/// One substitution step. Fails without allocating if the result would
/// exceed `budget_edges`.
pub fn substitute_once(
    spec: &IgsSpec,
    graph: &GeneratedGraph,
    budget_edges: u64,
) -> Result<GeneratedGraph, EngineError> {
    let projected: u128 = graph
        .edges
        .iter()
        .map(|e| spec.rule(e.colour).edges.len() as u128)
        .sum();
    if projected > budget_edges as u128 {
        return Err(EngineError::BudgetExceeded {
            projected,
            budget: budget_edges,
        });
    }

    // Interior incidence vectors per rule, computed once per step.
    let interior_types: Vec<Vec<(u32, KappaVector)>> = spec
        .rules
        .iter()
        .map(|rule| {
            rule.interior_vertices()
                .map(|v| (v, kappa(&rule.edges, v, spec.colour_count)))
                .collect()
        })
        .collect();

    let generation = graph.generation + 1;
    let mut vertices = graph.vertices.clone();
    let mut edges = Vec::with_capacity(projected as usize);
    // Rule vertex id -> id in the new graph, rebuilt per substituted edge.
    let mut local_map: Vec<u32> = Vec::new();
    for parent in &graph.edges {
        let rule = spec.rule(parent.colour);
        local_map.clear();
        local_map.resize(rule.vertex_count(), u32::MAX);
        local_map[rule.beta_plus as usize] = parent.tail;
        local_map[rule.beta_minus as usize] = parent.head;
        for (v, birth_type) in &interior_types[parent.colour.index()] {
            local_map[*v as usize] = vertices.len() as u32;
            vertices.push(VertexRecord {
                birth_generation: generation,
                birth_type: birth_type.clone(),
                origin: Origin::Interior {
                    rule: parent.colour,
                    vertex: *v,
                },
            });
        }
        for e in &rule.edges {
            edges.push(Edge {
                tail: local_map[e.tail as usize],
                head: local_map[e.head as usize],
                colour: e.colour,
            });
        }
    }

    Ok(GeneratedGraph {
        generation,
        vertices,
        edges,
        planted: graph.planted,
    })
}

/// Builds the `n`-th iterate from scratch.
pub fn iterate(spec: &IgsSpec, n: u32, budget_edges: u64) -> Result<GeneratedGraph, EngineError> {
    let mut graph = initial_graph(spec);
    for _ in 0..n {
        graph = substitute_once(spec, &graph, budget_edges)?;
    }
    Ok(graph)
}

fn undirected_adjacency(graph: &GeneratedGraph) -> Vec<Vec<u32>> {
    let mut adjacency = vec![Vec::new(); graph.vertex_count()];
    for e in &graph.edges {
        adjacency[e.tail as usize].push(e.head);
        adjacency[e.head as usize].push(e.tail);
    }
    adjacency
}

fn bfs_distances(adjacency: &[Vec<u32>], start: u32) -> Vec<u64> {
    let mut dist = vec![u64::MAX; adjacency.len()];
    dist[start as usize] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v as usize];
        for &w in &adjacency[v as usize] {
            if dist[w as usize] == u64::MAX {
                dist[w as usize] = d + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Undirected shortest-path distance between the planted vertices.
pub fn planted_distance(graph: &GeneratedGraph) -> Result<u64, EngineError> {
    let (from, to) = graph.planted.ok_or(EngineError::NoPlantedPair)?;
    let dist = bfs_distances(&undirected_adjacency(graph), from);
    match dist[to as usize] {
        u64::MAX => Err(EngineError::PlantedUnreachable),
        d => Ok(d),
    }
}

/// Histogram of total degrees (in plus out; a self-loop contributes 2).
pub fn degree_histogram(graph: &GeneratedGraph) -> BTreeMap<u64, u64> {
    let mut degree = vec![0u64; graph.vertex_count()];
    for e in &graph.edges {
        degree[e.tail as usize] += 1;
        degree[e.head as usize] += 1;
    }
    let mut histogram = BTreeMap::new();
    for d in degree {
        *histogram.entry(d).or_insert(0) += 1;
    }
    histogram
}

/// Maximum total degree; 0 for an edgeless graph.
pub fn max_degree(graph: &GeneratedGraph) -> u64 {
    degree_histogram(graph).keys().next_back().copied().unwrap_or(0)
}

/// Current incidence vector of one vertex, recomputed from the edge list.
pub fn vertex_kappa(graph: &GeneratedGraph, vertex: u32, colour_count: u16) -> KappaVector {
    kappa(&graph.edges, vertex, colour_count)
}

/// Undirected diameter by repeated BFS; `None` when disconnected.
/// Quadratic in the vertex count, intended for small iterates in tests.
pub fn diameter(graph: &GeneratedGraph) -> Option<u64> {
    let adjacency = undirected_adjacency(graph);
    let mut best = 0;
    for start in 0..graph.vertex_count() as u32 {
        let dist = bfs_distances(&adjacency, start);
        for d in dist {
            if d == u64::MAX {
                return None;
            }
            best = best.max(d);
        }
    }
    Some(best)
}

/// Whether the graph is connected as an undirected graph.
pub fn is_connected(graph: &GeneratedGraph) -> bool {
    if graph.vertex_count() == 0 {
        return true;
    }
    let dist = bfs_distances(&undirected_adjacency(graph), 0);
    dist.iter().all(|&d| d != u64::MAX)
}

/// Edge list export: one `tail head colour` line per edge, in engine order.
pub fn export_edges(graph: &GeneratedGraph) -> String {
    let mut out = String::new();
    for e in &graph.edges {
        out.push_str(&format!("{} {} {}\n", e.tail, e.head, e.colour.get()));
    }
    out
}

/// Vertex provenance export: `id generation birth_type origin` per line.
///
/// The birth type is comma-separated; origins resolve to names, either
/// `initial:<vertex>` or `rule<colour>:<vertex>`.
pub fn export_vertices(spec: &IgsSpec, graph: &GeneratedGraph) -> String {
    let initial = spec.effective_initial();
    let mut out = String::new();
    for (id, record) in graph.vertices.iter().enumerate() {
        let counts: Vec<String> = record.birth_type.0.iter().map(|c| c.to_string()).collect();
        let origin = match record.origin {
            Origin::Initial { vertex } => {
                format!("initial:{}", initial.vertex_names[vertex as usize])
            }
            Origin::Interior { rule, vertex } => {
                format!("rule{}:{}", rule.get(), spec.rule(rule).name(vertex))
            }
        };
        out.push_str(&format!(
            "{} {} {} {}\n",
            id,
            record.birth_generation,
            counts.join(","),
            origin
        ));
    }
    out
}
