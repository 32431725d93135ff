//! Matrix extraction, condensation into irreducible blocks, spectral radii,
//! and the growth laws they induce on row-vector norms.
//!
//! The systems of interest are reducible, so nothing here assumes a single
//! irreducible matrix. The workhorse is the condensation: strongly connected
//! components of the positivity digraph in topological order, each with its
//! spectral radius, cyclicity, and primitivity. Norm growth of `row * X^n`
//! is then governed by the largest radius among blocks reachable from the
//! row's support, with a polynomial correction counting the longest chain of
//! radius-attaining blocks (growth `n^{chain-1} * rate^n`).

use crate::matrix::{big_row, ln_biguint, row_norm1, row_times_matrix, IntMatrix};
use crate::model::{chi, kappa, ChiVector, ColourId, IgsSpec};
use crate::tolerances::{
    CONSTANT_ITER_CAP, CONSTANT_REL_TOL, RATE_EQ_REL_TOL, RHO_BRACKET_REL_TOL, RHO_ITER_CAP,
};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error("rule for {colour}: planted path enumeration exceeded budget of {budget}")]
    PathBudgetExceeded { colour: ColourId, budget: u64 },
    #[error("rule for {colour}: no simple path between the planting vertices")]
    NoPlantedPath { colour: ColourId },
}

/// Mass matrix: row `i` counts the edges of each colour in rule `i+1`.
pub fn mass_matrix(spec: &IgsSpec) -> IntMatrix {
    let rows: Vec<Vec<u64>> = spec
        .rules
        .iter()
        .map(|r| chi(&r.edges, spec.colour_count).0)
        .collect();
    IntMatrix::from_rows(&rows)
}

/// Degree matrix: rows `2i` and `2i+1` are the incidence vectors of the plus
/// and minus planting vertices of rule `i+1`. Side `2K`.
pub fn degree_matrix(spec: &IgsSpec) -> IntMatrix {
    let mut rows = Vec::with_capacity(2 * spec.rules.len());
    for r in &spec.rules {
        rows.push(kappa(&r.edges, r.beta_plus, spec.colour_count).0);
        rows.push(kappa(&r.edges, r.beta_minus, spec.colour_count).0);
    }
    IntMatrix::from_rows(&rows)
}

/// Projects a degree-matrix position onto its colour index.
pub fn project_position(position: usize) -> usize {
    position / 2
}

/// Checks that positivity of the degree matrix projects into positivity of
/// the mass matrix: `N[a][b] > 0` requires `M[pi(a)][pi(b)] > 0`. Returns
/// offending positions, empty when the projection property holds.
pub fn degree_projection_defects(n: &IntMatrix, m: &IntMatrix) -> Vec<(usize, usize)> {
    let mut defects = Vec::new();
    for a in 0..n.side() {
        for b in 0..n.side() {
            if n.get(a, b) > 0 && m.get(project_position(a), project_position(b)) == 0 {
                defects.push((a, b));
            }
        }
    }
    defects
}

/// A block of the finer form whose members do not all land in one block of
/// the coarser form under the index projection.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RefinementDefect {
    /// Block index in the finer form.
    pub block: usize,
    /// Two members of that block whose projected images disagree.
    pub members: (usize, usize),
    /// The distinct coarser-form blocks those images fall in.
    pub images: (usize, usize),
}

/// Checks that the block partition of `sub` refines the block partition of
/// `sup` through the index map `project`: every block of `sub` must project
/// into a single block of `sup`. Returns one defect per offending pair,
/// empty when the refinement holds.
pub fn block_refinement_defects(
    sub: &FrobeniusForm,
    sup: &FrobeniusForm,
    mut project: impl FnMut(usize) -> usize,
) -> Vec<RefinementDefect> {
    let mut defects = Vec::new();
    for (b, block) in sub.blocks.iter().enumerate() {
        let first = block.members[0];
        let target = sup.block_of[project(first)];
        for &member in &block.members[1..] {
            let image = sup.block_of[project(member)];
            if image != target {
                defects.push(RefinementDefect {
                    block: b,
                    members: (first, member),
                    images: (target, image),
                });
            }
        }
    }
    defects
}

// ---------------------------------------------------------------------------
// Choice family
// ---------------------------------------------------------------------------

/// Per-colour sets of edge-count vectors of simple planted paths.
///
/// A choice matrix picks one vector from each set as its rows; the family is
/// never materialized, only the per-colour sets (sorted, deduplicated).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChoiceFamily {
    pub sets: Vec<Vec<ChiVector>>,
}

impl ChoiceFamily {
    /// Number of distinct choice matrices.
    pub fn product_size(&self) -> BigUint {
        let mut size = BigUint::one();
        for set in &self.sets {
            size *= BigUint::from(set.len());
        }
        size
    }
}

/// Materializes one member of the family: row `i` is the vector at position
/// `combo[i]` of set `i`.
pub fn assemble_choice(family: &ChoiceFamily, combo: &[usize]) -> IntMatrix {
    assert_eq!(combo.len(), family.sets.len(), "one pick per colour");
    let rows: Vec<Vec<u64>> = combo
        .iter()
        .zip(&family.sets)
        .map(|(&pick, set)| set[pick].0.clone())
        .collect();
    IntMatrix::from_rows(&rows)
}

/// Visits every selection of one vector per colour, in lexicographic order
/// of set positions, when the family holds at most `budget` matrices.
/// Returns the number visited, or `None` (visiting nothing) when the family
/// is larger than the budget.
pub fn for_each_choice(
    family: &ChoiceFamily,
    budget: u64,
    mut visit: impl FnMut(&[usize]),
) -> Option<u64> {
    if family.product_size() > BigUint::from(budget) {
        return None;
    }
    let counts: Vec<usize> = family.sets.iter().map(|s| s.len()).collect();
    if counts.iter().any(|&c| c == 0) {
        return Some(0);
    }
    let mut combo = vec![0usize; counts.len()];
    let mut visited = 0u64;
    loop {
        visit(&combo);
        visited += 1;
        // Mixed-radix increment, least significant position last.
        let mut pos = counts.len();
        loop {
            if pos == 0 {
                return Some(visited);
            }
            pos -= 1;
            combo[pos] += 1;
            if combo[pos] < counts[pos] {
                break;
            }
            combo[pos] = 0;
        }
    }
}

/// Enumerates, per rule, the edge-colour count vectors of all simple
/// undirected paths from the plus to the minus planting vertex.
///
/// Parallel edges give distinct paths (their count vectors coincide unless
/// the colours differ); the budget bounds the number of completed paths per
/// rule and fails loudly on combinatorial blowup.
pub fn choice_family(spec: &IgsSpec, path_budget: u64) -> Result<ChoiceFamily, SpectralError> {
    let mut sets = Vec::with_capacity(spec.rules.len());
    for rule in &spec.rules {
        // Undirected incidence: (other endpoint, edge colour) per vertex.
        let mut incident: Vec<Vec<(u32, ColourId)>> = vec![Vec::new(); rule.vertex_count()];
        for e in &rule.edges {
            incident[e.tail as usize].push((e.head, e.colour));
            if e.tail != e.head {
                incident[e.head as usize].push((e.tail, e.colour));
            }
        }

        let mut found: Vec<ChiVector> = Vec::new();
        let mut paths_seen: u64 = 0;
        let mut visited = vec![false; rule.vertex_count()];
        let mut counts = vec![0u64; spec.colour_count as usize];
        visited[rule.beta_plus as usize] = true;
        walk_paths(
            rule.beta_plus,
            rule.beta_minus,
            &incident,
            &mut visited,
            &mut counts,
            &mut found,
            &mut paths_seen,
            path_budget,
        )
        .map_err(|()| SpectralError::PathBudgetExceeded {
            colour: rule.colour,
            budget: path_budget,
        })?;
        if found.is_empty() {
            return Err(SpectralError::NoPlantedPath {
                colour: rule.colour,
            });
        }
        found.sort_unstable();
        found.dedup();
        sets.push(found);
    }
    Ok(ChoiceFamily { sets })
}

#[allow(clippy::too_many_arguments)]
fn walk_paths(
    at: u32,
    goal: u32,
    incident: &[Vec<(u32, ColourId)>],
    visited: &mut Vec<bool>,
    counts: &mut Vec<u64>,
    found: &mut Vec<ChiVector>,
    paths_seen: &mut u64,
    budget: u64,
) -> Result<(), ()> {
    for &(next, colour) in &incident[at as usize] {
        if visited[next as usize] {
            continue;
        }
        counts[colour.index()] += 1;
        if next == goal {
            *paths_seen += 1;
            if *paths_seen > budget {
                return Err(());
            }
            found.push(ChiVector(counts.clone()));
        } else {
            visited[next as usize] = true;
            walk_paths(next, goal, incident, visited, counts, found, paths_seen, budget)?;
            visited[next as usize] = false;
        }
        counts[colour.index()] -= 1;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Condensation
// ---------------------------------------------------------------------------

/// One diagonal block of the condensation.
#[derive(Clone, Debug)]
pub struct Block {
    /// Matrix indices in this strongly connected component, sorted.
    pub members: Vec<usize>,
    /// Spectral radius of the restriction to `members`.
    pub rho: f64,
    /// Whether the block carries any cycle (size above one, or a positive
    /// diagonal entry for singletons).
    pub has_cycle: bool,
    /// Gcd of cycle lengths through the block; 0 when acyclic.
    pub period: u64,
    /// Primitive: has a cycle and period 1.
    pub primitive: bool,
}

/// Condensation of a non-negative matrix: strongly connected components of
/// its positivity digraph in topological order (every edge goes from a lower
/// block index to a higher one), with per-block spectral data.
#[derive(Clone, Debug)]
pub struct FrobeniusForm {
    /// Matrix index to block index.
    pub block_of: Vec<usize>,
    pub blocks: Vec<Block>,
    /// Block adjacency, sorted and deduplicated, excluding self-edges.
    pub dag: Vec<Vec<usize>>,
}

struct TarjanState<'a> {
    m: &'a IntMatrix,
    index: usize,
    stack: Vec<usize>,
    on_stack: Vec<bool>,
    idx: Vec<Option<usize>>,
    low: Vec<usize>,
    comps: Vec<Vec<usize>>,
}

impl<'a> TarjanState<'a> {
    fn strongconnect(&mut self, v: usize) {
        self.idx[v] = Some(self.index);
        self.low[v] = self.index;
        self.index += 1;
        self.stack.push(v);
        self.on_stack[v] = true;

        for w in self.m.successors(v) {
            if self.idx[w].is_none() {
                self.strongconnect(w);
                self.low[v] = self.low[v].min(self.low[w]);
            } else if self.on_stack[w] {
                self.low[v] = self.low[v].min(self.idx[w].unwrap());
            }
        }

        // Root of SCC
        if self.low[v] == self.idx[v].unwrap() {
            let mut comp = Vec::new();
            while let Some(w) = self.stack.pop() {
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            self.comps.push(comp);
        }
    }
}

/// Spectral radius of the restriction of `m` to `members`.
///
/// Singletons are exact; larger (necessarily irreducible) blocks use power
/// iteration on the shifted matrix `B + I` with Collatz-Wielandt bounds,
/// which bracket the radius from both sides and stop at
/// [`RHO_BRACKET_REL_TOL`] relative width.
pub fn spectral_radius(m: &IntMatrix, members: &[usize]) -> f64 {
    if members.len() == 1 {
        return m.get(members[0], members[0]) as f64;
    }
    let b = m.restrict(members);
    let side = b.side();
    let mut x = vec![1.0f64; side];
    let mut best = (0.0, f64::INFINITY);
    for _ in 0..RHO_ITER_CAP {
        let mut y = vec![0.0f64; side];
        for i in 0..side {
            let mut acc = x[i]; // the +I shift
            for j in 0..side {
                let e = b.get(i, j);
                if e > 0 {
                    acc += e as f64 * x[j];
                }
            }
            y[i] = acc;
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..side {
            let ratio = y[i] / x[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        best = (lo - 1.0, hi - 1.0);
        if hi - lo <= RHO_BRACKET_REL_TOL * hi {
            break;
        }
        let max = y.iter().cloned().fold(0.0f64, f64::max);
        for v in &mut y {
            *v /= max;
        }
        x = y;
    }
    (best.0 + best.1) / 2.0
}

/// Perron vector of a primitive matrix, normalized to unit maximum.
///
/// Power iteration on the shifted matrix `A + I`; stops with the same
/// bracket as [`spectral_radius`].
pub fn perron_vector(m: &IntMatrix) -> Vec<f64> {
    let side = m.side();
    let mut x = vec![1.0f64; side];
    for _ in 0..RHO_ITER_CAP {
        let mut y = vec![0.0f64; side];
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..side {
            let mut acc = x[i];
            for j in 0..side {
                let e = m.get(i, j);
                if e > 0 {
                    acc += e as f64 * x[j];
                }
            }
            y[i] = acc;
            let ratio = acc / x[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let max = y.iter().cloned().fold(0.0f64, f64::max);
        for v in &mut y {
            *v /= max;
        }
        x = y;
        if hi - lo <= RHO_BRACKET_REL_TOL * hi {
            break;
        }
    }
    x
}

/// Gcd of cycle lengths through one strongly connected component, via BFS
/// levels: every intra-component edge `(u, v)` contributes
/// `|level(u) + 1 - level(v)|`.
fn component_period(m: &IntMatrix, members: &[usize]) -> u64 {
    let in_comp: Vec<bool> = {
        let mut flags = vec![false; m.side()];
        for &v in members {
            flags[v] = true;
        }
        flags
    };
    let mut level: Vec<Option<i64>> = vec![None; m.side()];
    level[members[0]] = Some(0);
    let mut queue = std::collections::VecDeque::from([members[0]]);
    let mut g: u64 = 0;
    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap();
        for w in m.successors(v) {
            if !in_comp[w] {
                continue;
            }
            match level[w] {
                None => {
                    level[w] = Some(lv + 1);
                    queue.push_back(w);
                }
                Some(lw) => {
                    g = g.gcd(&((lv + 1 - lw).unsigned_abs()));
                }
            }
        }
    }
    g
}

/// Computes the condensation with per-block spectral data.
pub fn condensation(m: &IntMatrix) -> FrobeniusForm {
    let side = m.side();
    let mut state = TarjanState {
        m,
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; side],
        idx: vec![None; side],
        low: vec![0; side],
        comps: Vec::new(),
    };
    for v in 0..side {
        if state.idx[v].is_none() {
            state.strongconnect(v);
        }
    }
    // Tarjan emits sinks first; reverse for topological order.
    state.comps.reverse();
    let comps = state.comps;

    let mut block_of = vec![0usize; side];
    for (b, comp) in comps.iter().enumerate() {
        for &v in comp {
            block_of[v] = b;
        }
    }

    let mut dag: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for v in 0..side {
        for w in m.successors(v) {
            let (bv, bw) = (block_of[v], block_of[w]);
            if bv != bw {
                debug_assert!(bv < bw, "condensation must be topologically ordered");
                dag[bv].push(bw);
            }
        }
    }
    for succ in &mut dag {
        succ.sort_unstable();
        succ.dedup();
    }

    let blocks = comps
        .into_iter()
        .map(|members| {
            let has_cycle = members.len() > 1 || m.get(members[0], members[0]) > 0;
            let period = if has_cycle {
                if members.len() == 1 {
                    1
                } else {
                    component_period(m, &members)
                }
            } else {
                0
            };
            let rho = spectral_radius(m, &members);
            Block {
                rho,
                has_cycle,
                period,
                primitive: has_cycle && period == 1,
                members,
            }
        })
        .collect();

    FrobeniusForm {
        block_of,
        blocks,
        dag,
    }
}

impl FrobeniusForm {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks reachable from any seed block, seeds included.
    pub fn reachable_from(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.block_count()];
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(b) = stack.pop() {
            for &next in &self.dag[b] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        seen
    }

    /// Blocks that can reach some seed block, seeds included.
    pub fn coreachable_to(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.block_count()];
        for s in seeds {
            seen[s] = true;
        }
        // Topological order makes one reverse sweep enough.
        for b in (0..self.block_count()).rev() {
            if self.dag[b].iter().any(|&next| seen[next]) {
                seen[b] = true;
            }
        }
        seen
    }

    /// Matrix indices reachable from `index` in the positivity digraph,
    /// including `index` itself.
    pub fn reachable_indices(&self, index: usize) -> Vec<usize> {
        let blocks = self.reachable_from([self.block_of[index]]);
        let mut out = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            if blocks[b] {
                out.extend_from_slice(&block.members);
            }
        }
        out.sort_unstable();
        out
    }
}

// ---------------------------------------------------------------------------
// Growth laws
// ---------------------------------------------------------------------------

/// Asymptotic law `norm ~ n^poly_degree * rate^n` for a row-vector power
/// sequence. A rate of 0 means the sequence is eventually zero.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct GrowthLaw {
    pub rate: f64,
    pub poly_degree: usize,
}

/// Growth law of `sum over targets of (e_starts * X^n)[target]`.
///
/// With `targets = None` the full norm is measured. The rate is the largest
/// block radius among blocks reachable from the starts (and co-reachable
/// from the targets, when given); the polynomial degree is one less than the
/// longest chain of rate-attaining blocks along the condensation order.
pub fn index_growth(
    form: &FrobeniusForm,
    starts: &[usize],
    targets: Option<&[usize]>,
) -> GrowthLaw {
    let reach = form.reachable_from(starts.iter().map(|&i| form.block_of[i]));
    let allowed: Vec<bool> = match targets {
        None => reach,
        Some(t) => {
            let coreach = form.coreachable_to(t.iter().map(|&i| form.block_of[i]));
            reach
                .iter()
                .zip(&coreach)
                .map(|(&a, &b)| a && b)
                .collect()
        }
    };

    let rate = allowed
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .map(|(b, _)| form.blocks[b].rho)
        .fold(0.0f64, f64::max);
    if rate <= 0.0 {
        return GrowthLaw {
            rate: 0.0,
            poly_degree: 0,
        };
    }

    let attains = |b: usize| (form.blocks[b].rho - rate).abs() <= RATE_EQ_REL_TOL * rate;
    let mut chain = vec![0usize; form.block_count()];
    let mut longest = 0usize;
    for b in 0..form.block_count() {
        if !allowed[b] {
            continue;
        }
        let mut here = 0usize;
        for (pred, succs) in form.dag.iter().enumerate().take(b) {
            if allowed[pred] && succs.contains(&b) {
                here = here.max(chain[pred]);
            }
        }
        chain[b] = here + usize::from(attains(b));
        longest = longest.max(chain[b]);
    }
    debug_assert!(longest >= 1);

    GrowthLaw {
        rate,
        poly_degree: longest - 1,
    }
}

/// Chain count of a single position: the number of blocks in the longest
/// chain of rate-attaining blocks reachable from it. The norm of
/// `e_index * X^n` grows like `n^(chain-1) * rate^n`; 0 when the norm dies.
pub fn kappa_chain(form: &FrobeniusForm, index: usize) -> usize {
    let law = index_growth(form, &[index], None);
    if law.rate <= 0.0 {
        0
    } else {
        law.poly_degree + 1
    }
}

/// A growth law together with its numerically estimated constant.
#[derive(Clone, Debug)]
pub struct GrowthDescriptor {
    pub law: GrowthLaw,
    /// Limit of `norm / (n^poly rate^n)`; `None` when the norm dies.
    pub constant: Option<f64>,
    pub iterations: u32,
    pub converged: bool,
}

/// Measures `norm(row * X^n)` growth: the law from the condensation, the
/// constant from the exact big-integer sequence, stopping at
/// [`CONSTANT_REL_TOL`] relative step or [`CONSTANT_ITER_CAP`] iterations.
pub fn growth_descriptor(m: &IntMatrix, form: &FrobeniusForm, row: &[u64]) -> GrowthDescriptor {
    let starts: Vec<usize> = row
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0)
        .map(|(i, _)| i)
        .collect();
    if starts.is_empty() {
        return GrowthDescriptor {
            law: GrowthLaw {
                rate: 0.0,
                poly_degree: 0,
            },
            constant: None,
            iterations: 0,
            converged: true,
        };
    }
    let law = index_growth(form, &starts, None);
    if law.rate <= 0.0 {
        return GrowthDescriptor {
            law,
            constant: None,
            iterations: 0,
            converged: true,
        };
    }

    let ln_rate = law.rate.ln();
    let mut vec = big_row(row);
    let mut previous: Option<f64> = None;
    let mut iterations = 0;
    let mut converged = false;
    let mut constant = 0.0;
    for n in 1..=CONSTANT_ITER_CAP {
        vec = row_times_matrix(&vec, m);
        iterations = n;
        let norm = row_norm1(&vec);
        debug_assert!(
            !num_traits::Zero::is_zero(&norm),
            "positive rate implies the norm never dies"
        );
        let ln_c =
            ln_biguint(&norm) - law.poly_degree as f64 * (n as f64).ln() - n as f64 * ln_rate;
        constant = ln_c.exp();
        if let Some(prev) = previous {
            if (constant - prev).abs() <= CONSTANT_REL_TOL * constant {
                converged = true;
                break;
            }
        }
        previous = Some(constant);
    }

    GrowthDescriptor {
        law,
        constant: Some(constant),
        iterations,
        converged,
    }
}
