//! System description: coloured rule graphs, the initial graph, the JSON file
//! format, validity checks, and the two count vectors everything downstream
//! consumes.
//!
//! A system with `K` colours consists of one rule graph per colour plus an
//! initial graph (by default a single edge of the initial colour between the
//! two distinguished vertices `v+` and `v-`). Each rule graph is a directed
//! multigraph with two distinct planting vertices; substitution glues the
//! plus planting onto an edge's tail and the minus planting onto its head.
//!
//! Two measurements are defined here because every analysis module needs
//! them: [`chi`] counts edges per colour (a length-`K` row), and [`kappa`]
//! counts a vertex's incident edges per colour and direction (a length-`2K`
//! row, colour-major, outgoing before incoming).

use serde::{Deserialize, Serialize};
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use thiserror::Error;

/// 1-based colour identifier; colour `k` labels rule graph `R_k`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct ColourId(u16);

impl ColourId {
    /// Fails on 0; colours are 1-based.
    pub fn new(value: u16) -> Option<Self> {
        if value == 0 {
            None
        } else {
            Some(ColourId(value))
        }
    }

    pub fn get(self) -> u16 {
        self.0
    }

    /// 0-based index into per-colour arrays.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        ColourId(u16::try_from(index + 1).expect("colour index fits u16"))
    }
}

impl TryFrom<u16> for ColourId {
    type Error = String;

    fn try_from(value: u16) -> Result<Self, Self::Error> {
        ColourId::new(value).ok_or_else(|| "colour identifiers are 1-based; 0 is invalid".into())
    }
}

impl From<ColourId> for u16 {
    fn from(c: ColourId) -> u16 {
        c.0
    }
}

impl fmt::Display for ColourId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "colour {}", self.0)
    }
}

impl fmt::Debug for ColourId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ColourId({})", self.0)
    }
}

/// Directed coloured edge; endpoints are dense vertex ids within one graph.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Edge {
    pub tail: u32,
    pub head: u32,
    pub colour: ColourId,
}

/// One rule graph: vertex names, the two planting vertices, coloured edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleGraph {
    pub colour: ColourId,
    pub vertex_names: Vec<String>,
    pub beta_plus: u32,
    pub beta_minus: u32,
    pub edges: Vec<Edge>,
}

impl RuleGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn name(&self, vertex: u32) -> &str {
        &self.vertex_names[vertex as usize]
    }

    /// Vertices that are not planting vertices, in id order.
    pub fn interior_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.vertex_count() as u32).filter(move |&v| v != self.beta_plus && v != self.beta_minus)
    }
}

/// Explicit initial graph; when absent the system starts from a single edge
/// of the initial colour from `v+` to `v-`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InitialGraph {
    pub vertex_names: Vec<String>,
    pub edges: Vec<Edge>,
}

/// A complete system: colour count, initial data, one rule per colour.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IgsSpec {
    pub colour_count: u16,
    pub initial_colour: ColourId,
    pub initial: Option<InitialGraph>,
    /// Indexed by colour: `rules[c.index()]` is the rule of colour `c`.
    pub rules: Vec<RuleGraph>,
}

impl IgsSpec {
    pub fn rule(&self, colour: ColourId) -> &RuleGraph {
        &self.rules[colour.index()]
    }

    pub fn colours(&self) -> impl Iterator<Item = ColourId> {
        (1..=self.colour_count).map(ColourId)
    }

    /// The initial graph, materializing the default single planted edge.
    pub fn effective_initial(&self) -> InitialGraph {
        match &self.initial {
            Some(g) => g.clone(),
            None => InitialGraph {
                vertex_names: vec!["v+".to_owned(), "v-".to_owned()],
                edges: vec![Edge {
                    tail: 0,
                    head: 1,
                    colour: self.initial_colour,
                }],
            },
        }
    }

    /// Whether the system starts from the default planted edge, which is what
    /// gives the planted pair its meaning for distance measurements.
    pub fn has_planted_initial(&self) -> bool {
        self.initial.is_none()
    }
}

/// Per-colour edge counts of an edge multiset, as a length-`K` row.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct ChiVector(pub Vec<u64>);

impl ChiVector {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Per-colour, per-direction incidence counts at one vertex, length `2K`.
///
/// Position `2i` counts outgoing edges of colour `i+1`, position `2i+1`
/// incoming ones. A self-loop counts once in each position of its colour.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct KappaVector(pub Vec<u64>);

impl KappaVector {
    /// Total degree (in plus out) of the vertex.
    pub fn degree(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Counts edges per colour.
pub fn chi(edges: &[Edge], colour_count: u16) -> ChiVector {
    let mut counts = vec![0u64; colour_count as usize];
    for e in edges {
        counts[e.colour.index()] += 1;
    }
    ChiVector(counts)
}

/// Counts incident edges at `vertex` per colour and direction.
pub fn kappa(edges: &[Edge], vertex: u32, colour_count: u16) -> KappaVector {
    let mut counts = vec![0u64; 2 * colour_count as usize];
    for e in edges {
        if e.tail == vertex {
            counts[2 * e.colour.index()] += 1;
        }
        if e.head == vertex {
            counts[2 * e.colour.index() + 1] += 1;
        }
    }
    KappaVector(counts)
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    colours: u16,
    initial_colour: ColourId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_graph: Option<GraphFile>,
    rules: Vec<RuleFile>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<String>,
    edges: Vec<EdgeFile>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    colour: ColourId,
    vertices: Vec<String>,
    beta_plus: String,
    beta_minus: String,
    edges: Vec<EdgeFile>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    from: String,
    to: String,
    colour: ColourId,
}

/// Errors that make a file unusable as a system description.
///
/// These are format-level problems (bad JSON, dangling names, wrong rule
/// coverage); graph-theoretic validity is checked separately by [`validate`].
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("system declares {colours} colours; at least one is required")]
    NoColours { colours: u16 },
    #[error("initial colour {found} is out of range 1..={max}")]
    InitialColourOutOfRange { found: u16, max: u16 },
    #[error("rule declared for colour {found}, which is out of range 1..={max}")]
    RuleColourOutOfRange { found: u16, max: u16 },
    #[error("two rules declared for {colour}")]
    DuplicateRule { colour: ColourId },
    #[error("no rule declared for {colour}")]
    MissingRule { colour: ColourId },
    #[error("duplicate vertex name {name:?} in {place}")]
    DuplicateVertex { place: String, name: String },
    #[error("unknown vertex name {name:?} referenced by {role} in {place}")]
    UnknownVertex {
        place: String,
        role: String,
        name: String,
    },
    #[error("edge colour {found} in {place} is out of range 1..={max}")]
    EdgeColourOutOfRange {
        place: String,
        found: u16,
        max: u16,
    },
}

fn vertex_table(
    names: &[String],
    place: &str,
) -> Result<BTreeMap<String, u32>, ParseError> {
    let mut table = BTreeMap::new();
    for (id, name) in names.iter().enumerate() {
        match table.entry(name.clone()) {
            Entry::Vacant(slot) => {
                slot.insert(id as u32);
            }
            Entry::Occupied(_) => {
                return Err(ParseError::DuplicateVertex {
                    place: place.to_owned(),
                    name: name.clone(),
                });
            }
        }
    }
    Ok(table)
}

fn resolve_vertex(
    table: &BTreeMap<String, u32>,
    name: &str,
    role: &str,
    place: &str,
) -> Result<u32, ParseError> {
    table.get(name).copied().ok_or_else(|| ParseError::UnknownVertex {
        place: place.to_owned(),
        role: role.to_owned(),
        name: name.to_owned(),
    })
}

fn resolve_edges(
    table: &BTreeMap<String, u32>,
    edges: &[EdgeFile],
    colour_count: u16,
    place: &str,
) -> Result<Vec<Edge>, ParseError> {
    let mut out = Vec::with_capacity(edges.len());
    for e in edges {
        if e.colour.get() > colour_count {
            return Err(ParseError::EdgeColourOutOfRange {
                place: place.to_owned(),
                found: e.colour.get(),
                max: colour_count,
            });
        }
        out.push(Edge {
            tail: resolve_vertex(table, &e.from, "edge tail", place)?,
            head: resolve_vertex(table, &e.to, "edge head", place)?,
            colour: e.colour,
        });
    }
    Ok(out)
}

/// Parses a UTF-8 JSON system description.
pub fn parse_spec(text: &str) -> Result<IgsSpec, ParseError> {
    let file: SpecFile = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    if file.colours == 0 {
        return Err(ParseError::NoColours { colours: 0 });
    }
    if file.initial_colour.get() > file.colours {
        return Err(ParseError::InitialColourOutOfRange {
            found: file.initial_colour.get(),
            max: file.colours,
        });
    }

    let mut rules: Vec<Option<RuleGraph>> = (0..file.colours).map(|_| None).collect();
    for rule in &file.rules {
        if rule.colour.get() > file.colours {
            return Err(ParseError::RuleColourOutOfRange {
                found: rule.colour.get(),
                max: file.colours,
            });
        }
        let place = format!("rule for {}", rule.colour);
        let table = vertex_table(&rule.vertices, &place)?;
        let resolved = RuleGraph {
            colour: rule.colour,
            vertex_names: rule.vertices.clone(),
            beta_plus: resolve_vertex(&table, &rule.beta_plus, "beta_plus", &place)?,
            beta_minus: resolve_vertex(&table, &rule.beta_minus, "beta_minus", &place)?,
            edges: resolve_edges(&table, &rule.edges, file.colours, &place)?,
        };
        let slot = &mut rules[rule.colour.index()];
        if slot.is_some() {
            return Err(ParseError::DuplicateRule { colour: rule.colour });
        }
        *slot = Some(resolved);
    }
    let mut dense = Vec::with_capacity(rules.len());
    for (index, slot) in rules.into_iter().enumerate() {
        match slot {
            Some(rule) => dense.push(rule),
            None => {
                return Err(ParseError::MissingRule {
                    colour: ColourId::from_index(index),
                })
            }
        }
    }

    let initial = match &file.initial_graph {
        None => None,
        Some(g) => {
            let table = vertex_table(&g.vertices, "initial graph")?;
            Some(InitialGraph {
                vertex_names: g.vertices.clone(),
                edges: resolve_edges(&table, &g.edges, file.colours, "initial graph")?,
            })
        }
    };

    Ok(IgsSpec {
        colour_count: file.colours,
        initial_colour: file.initial_colour,
        initial,
        rules: dense,
    })
}

fn edges_to_file(edges: &[Edge], names: &[String]) -> Vec<EdgeFile> {
    edges
        .iter()
        .map(|e| EdgeFile {
            from: names[e.tail as usize].clone(),
            to: names[e.head as usize].clone(),
            colour: e.colour,
        })
        .collect()
}

/// Serializes a system back to the JSON file format (pretty, trailing newline).
pub fn serialize_spec(spec: &IgsSpec) -> String {
    let file = SpecFile {
        colours: spec.colour_count,
        initial_colour: spec.initial_colour,
        initial_graph: spec.initial.as_ref().map(|g| GraphFile {
            vertices: g.vertex_names.clone(),
            edges: edges_to_file(&g.edges, &g.vertex_names),
        }),
        rules: spec
            .rules
            .iter()
            .map(|r| RuleFile {
                colour: r.colour,
                vertices: r.vertex_names.clone(),
                beta_plus: r.name(r.beta_plus).to_owned(),
                beta_minus: r.name(r.beta_minus).to_owned(),
                edges: edges_to_file(&r.edges, &r.vertex_names),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("spec serialization cannot fail");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Validity
// ---------------------------------------------------------------------------

/// A single violation of the model's validity requirements.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    /// Planting vertices of a rule coincide.
    PlantingsCoincide { colour: ColourId },
    /// A rule graph is not connected as an undirected graph.
    RuleNotConnected { colour: ColourId },
    /// The undirected distance between a rule's planting vertices is below 2.
    PlantingsTooClose { colour: ColourId, distance: u64 },
    /// An explicit initial graph has no edges, so nothing can ever grow.
    EmptyInitialGraph,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PlantingsCoincide { colour } => {
                write!(f, "rule for {colour}: planting vertices coincide")
            }
            Violation::RuleNotConnected { colour } => {
                write!(f, "rule for {colour}: graph is not connected")
            }
            Violation::PlantingsTooClose { colour, distance } => write!(
                f,
                "rule for {colour}: planting vertices are at distance {distance}, need at least 2"
            ),
            Violation::EmptyInitialGraph => write!(f, "initial graph has no edges"),
        }
    }
}

/// All validity violations found in a system.
#[derive(Debug, Error)]
pub struct ValidationErrors {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "system is invalid ({} violation{}):",
            self.violations.len(),
            if self.violations.len() == 1 { "" } else { "s" }
        )?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Undirected BFS distances from `start` over the edge list; `u64::MAX` marks
/// unreachable vertices.
fn undirected_distances(vertex_count: usize, edges: &[Edge], start: u32) -> Vec<u64> {
    let mut adjacency = vec![Vec::new(); vertex_count];
    for e in edges {
        adjacency[e.tail as usize].push(e.head);
        adjacency[e.head as usize].push(e.tail);
    }
    let mut dist = vec![u64::MAX; vertex_count];
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

/// Checks the model's validity requirements on every rule and the initial
/// graph, collecting all violations instead of stopping at the first.
pub fn validate(spec: &IgsSpec) -> Result<(), ValidationErrors> {
    let mut violations = Vec::new();
    for rule in &spec.rules {
        if rule.beta_plus == rule.beta_minus {
            violations.push(Violation::PlantingsCoincide { colour: rule.colour });
            continue;
        }
        let dist = undirected_distances(rule.vertex_count(), &rule.edges, rule.beta_plus);
        if dist.iter().any(|&d| d == u64::MAX) {
            violations.push(Violation::RuleNotConnected { colour: rule.colour });
            continue;
        }
        let planted = dist[rule.beta_minus as usize];
        if planted < 2 {
            violations.push(Violation::PlantingsTooClose {
                colour: rule.colour,
                distance: planted,
            });
        }
    }
    if let Some(initial) = &spec.initial {
        if initial.edges.is_empty() {
            violations.push(Violation::EmptyInitialGraph);
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationErrors { violations })
    }
}
