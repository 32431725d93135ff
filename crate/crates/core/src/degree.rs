//! Birth types, dominance, survival, degree classes, and the degree spectrum.
//!
//! Every vertex of an iterate is born with one of finitely many incidence
//! vectors: the vectors of the initial vertices plus the interior vectors of
//! the reachable rules. After birth a vertex's incidence evolves linearly,
//! `kappa_n = kappa_birth * N^(n-m)` for a vertex born at generation `m`, so
//! the whole degree distribution of every iterate is a finite sum of
//! explicit geometric families: the histogram is computed exactly without
//! materializing any graph.
//!
//! The degree spectrum comes from the types that both dominate (their degree
//! grows at the global rate with the maximal polynomial factor) and survive
//! (fresh copies keep being born unboundedly often). Dominant survivors
//! partition into lattice classes by the fractional part of the logarithm of
//! their amplitude; each class contributes a power-law branch whose exponent
//! is set by how fast its members are born relative to how fast their
//! degrees grow.

use crate::matrix::{big_row, dot, row_norm1, row_times_matrix, IntMatrix};
use crate::model::{ColourId, IgsSpec, KappaVector};
use crate::spectral::{growth_descriptor, index_growth, FrobeniusForm, GrowthLaw};
use crate::tolerances::{
    CLASS_DEAD_ZONE, CLASS_LATTICE_TOL, CONSTANT_ITER_CAP, RATE_EQ_REL_TOL,
};
use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DegreeError {
    #[error(
        "degree classification is ambiguous: amplitudes {a} and {b} have lattice distance {distance:e}, \
         inside the refusal band"
    )]
    AmbiguousClassification { a: f64, b: f64, distance: f64 },
    #[error(
        "degree growth constant for birth type {kappa:?} did not converge within {cap} iterations"
    )]
    ConstantNotConverged { kappa: Vec<u64>, cap: u32 },
}

/// Where copies of a birth type come from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TypeOrigin {
    Initial { vertex: u32 },
    Interior { rule: ColourId, vertex: u32 },
}

/// One birth type with everything the spectrum needs to know about it.
#[derive(Clone, Debug)]
pub struct BirthType {
    pub kappa: KappaVector,
    pub origins: Vec<TypeOrigin>,
    /// Vertices of the initial graph with this incidence vector.
    pub initial_count: u64,
    /// Interior vertices per rule colour with this incidence vector.
    pub interior_count: Vec<u64>,
    /// First generation at which the type occurs.
    pub mu: u32,
    /// Degree growth rate of one vertex of this type.
    pub lambda: f64,
    /// Polynomial factor of the degree growth (chain count; degree grows
    /// like `n^(tau-1) lambda^n`).
    pub tau: usize,
    /// Numeric limit of `degree / (age^(tau-1) lambda^age)`.
    pub c_deg: f64,
    pub c_converged: bool,
    /// Attains the global rate and polynomial factor.
    pub dominant: bool,
    /// Fresh copies are born unboundedly often.
    pub surviving: bool,
    /// Amplitude `c_deg / C_deg` relative to the maximum-degree constant;
    /// only meaningful (and only set) for dominant types.
    pub alpha: Option<f64>,
}

impl BirthType {
    /// Support of the interior-count vector: rule colours producing copies.
    pub fn support(&self) -> Vec<usize> {
        self.interior_count
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A lattice class of dominant surviving types: one power-law branch.
#[derive(Clone, Debug)]
pub struct DegreeClass {
    /// Type indices, ascending by incidence vector; the first member is the
    /// representative.
    pub members: Vec<usize>,
    /// Amplitude of the representative.
    pub alpha: f64,
    /// Birth-count growth of the class: the fastest member law.
    pub eff_law: GrowthLaw,
    /// `ln(eff rate) / ln(degree rate)`: the branch's power-law exponent.
    pub dimension_exponent: f64,
}

/// Full degree-side analysis of a system.
#[derive(Clone, Debug)]
pub struct DegreeAnalysis {
    /// False when degrees stay bounded (degree rate 1); everything past the
    /// types is then vacuous.
    pub applicable: bool,
    /// Global degree growth rate.
    pub lambda_u: f64,
    /// Global polynomial factor of degree growth.
    pub tau_deg: usize,
    /// Maximum-degree constant: `max over dominant types of
    /// c_deg * lambda_u^(-mu)`.
    pub c_deg_max: f64,
    pub types: Vec<BirthType>,
    pub classes: Vec<DegreeClass>,
    /// At least two classes with distinct branch rates.
    pub bedm: bool,
    /// Single-exponent power law with unbounded branch growth.
    pub scale_free: bool,
    /// Finitely many distinct branch exponents, more than one.
    pub multiscale_free: bool,
    /// Leading branch exponent; `None` when no branch exists.
    pub dimension: Option<f64>,
    /// Distinct branch exponents, ascending.
    pub spectrum: Vec<f64>,
}

fn dedup_sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("rates are finite"));
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        match out.last() {
            Some(&last) if (v - last).abs() <= RATE_EQ_REL_TOL * last.abs().max(1.0) => {}
            _ => out.push(v),
        }
    }
    out
}

/// Collects the deduplicated birth types of a system with their structural
/// data (incidence vector, origins, occurrence counts, first generation):
/// incidence vectors of the initial vertices plus interior vectors of every
/// rule whose colour is reachable from the initial colour in the mass
/// matrix. The numeric growth fields stay at their defaults; only
/// [`degree_analysis`] fills those.
pub fn birth_types(spec: &IgsSpec, mass_form: &FrobeniusForm, mass: &IntMatrix) -> Vec<BirthType> {
    let mut types = collect_types(spec, mass_form);
    let iota = spec.initial_colour.index();
    // First occurrence: generation 0 for initial types, else the first
    // generation with a positive birth count, within the shortest-walk bound.
    let colour_count = spec.colour_count as usize;
    for t in &mut types {
        if t.initial_count > 0 {
            t.mu = 0;
            continue;
        }
        let mut found = None;
        for m in 1..=colour_count as u32 {
            if !birth_count(t, mass, iota, m).is_zero() {
                found = Some(m);
                break;
            }
        }
        t.mu = found.expect("interior types of reachable rules occur within K generations");
    }
    types
}

fn collect_types(spec: &IgsSpec, mass_form: &FrobeniusForm) -> Vec<BirthType> {
    let iota = spec.initial_colour.index();
    let reachable = mass_form.reachable_indices(iota);
    let colour_count = spec.colour_count as usize;

    let mut table: BTreeMap<Vec<u64>, BirthType> = BTreeMap::new();
    let initial = spec.effective_initial();
    for v in 0..initial.vertex_names.len() as u32 {
        let kappa = crate::model::kappa(&initial.edges, v, spec.colour_count);
        let entry = table.entry(kappa.0.clone()).or_insert_with(|| BirthType {
            kappa: kappa.clone(),
            origins: Vec::new(),
            initial_count: 0,
            interior_count: vec![0; colour_count],
            mu: 0,
            lambda: 0.0,
            tau: 0,
            c_deg: 0.0,
            c_converged: false,
            dominant: false,
            surviving: false,
            alpha: None,
        });
        entry.initial_count += 1;
        entry.origins.push(TypeOrigin::Initial { vertex: v });
    }
    for &c in &reachable {
        let rule = &spec.rules[c];
        for v in rule.interior_vertices() {
            let kappa = crate::model::kappa(&rule.edges, v, spec.colour_count);
            let entry = table.entry(kappa.0.clone()).or_insert_with(|| BirthType {
                kappa: kappa.clone(),
                origins: Vec::new(),
                initial_count: 0,
                interior_count: vec![0; colour_count],
                mu: 0,
                lambda: 0.0,
                tau: 0,
                c_deg: 0.0,
                c_converged: false,
                dominant: false,
                surviving: false,
                alpha: None,
            });
            entry.interior_count[c] += 1;
            entry.origins.push(TypeOrigin::Interior {
                rule: rule.colour,
                vertex: v,
            });
        }
    }
    table.into_values().collect()
}

/// Number of copies of type `t` born at generation `m`, exactly:
/// the initial count at `m = 0`, `e_iota * M^(m-1) * interior_count` after.
pub fn birth_count(t: &BirthType, mass: &IntMatrix, iota: usize, m: u32) -> BigUint {
    if m == 0 {
        return BigUint::from(t.initial_count);
    }
    let row = crate::matrix::row_times_matrix_pow(&crate::matrix::unit_row(mass.side(), iota), mass, m - 1);
    dot(&row, &big_row(&t.interior_count))
}

/// Colour indices whose occurrence counts can be pumped unboundedly: some
/// walk from the initial colour passes a cyclic block and then reaches them.
fn pumpable_colours(mass_form: &FrobeniusForm, iota: usize) -> Vec<bool> {
    let from_iota = mass_form.reachable_from([mass_form.block_of[iota]]);
    let cyclic_seeds: Vec<usize> = (0..mass_form.block_count())
        .filter(|&b| from_iota[b] && mass_form.blocks[b].has_cycle)
        .collect();
    let pumped = mass_form.reachable_from(cyclic_seeds);
    (0..mass_form.block_of.len())
        .map(|a| pumped[mass_form.block_of[a]])
        .collect()
}

/// Runs the whole degree side.
pub fn degree_analysis(
    spec: &IgsSpec,
    mass: &IntMatrix,
    mass_form: &FrobeniusForm,
    degree_m: &IntMatrix,
    degree_form: &FrobeniusForm,
) -> Result<DegreeAnalysis, DegreeError> {
    let iota = spec.initial_colour.index();
    let mut types = birth_types(spec, mass_form, mass);

    // Per-type degree growth.
    for t in &mut types {
        let descriptor = growth_descriptor(degree_m, degree_form, &t.kappa.0);
        t.lambda = descriptor.law.rate;
        t.tau = if descriptor.law.rate > 0.0 {
            descriptor.law.poly_degree + 1
        } else {
            0
        };
        t.c_deg = descriptor.constant.unwrap_or(0.0);
        t.c_converged = descriptor.converged;
    }

    let lambda_u = types.iter().map(|t| t.lambda).fold(0.0f64, f64::max);
    let attains = |v: f64| (v - lambda_u).abs() <= RATE_EQ_REL_TOL * lambda_u.max(1.0);
    let tau_deg = types
        .iter()
        .filter(|t| attains(t.lambda))
        .map(|t| t.tau)
        .max()
        .unwrap_or(0);
    for t in &mut types {
        t.dominant = attains(t.lambda) && t.tau == tau_deg;
        if t.dominant && !t.c_converged {
            return Err(DegreeError::ConstantNotConverged {
                kappa: t.kappa.0.clone(),
                cap: CONSTANT_ITER_CAP,
            });
        }
    }

    // Survival.
    let pumpable = pumpable_colours(mass_form, iota);
    for t in &mut types {
        t.surviving = t.support().iter().any(|&c| pumpable[c]);
    }

    // Amplitudes.
    let c_deg_max = types
        .iter()
        .filter(|t| t.dominant)
        .map(|t| t.c_deg * lambda_u.powi(-(t.mu as i32)))
        .fold(0.0f64, f64::max);
    for t in &mut types {
        if t.dominant {
            t.alpha = Some(t.c_deg / c_deg_max);
        }
    }

    let applicable = lambda_u > 1.0 + RATE_EQ_REL_TOL;

    // Lattice classes over dominant survivors.
    let mut classes: Vec<DegreeClass> = Vec::new();
    if applicable {
        let ln_rate = lambda_u.ln();
        for (index, t) in types.iter().enumerate() {
            if !(t.dominant && t.surviving) {
                continue;
            }
            let alpha = t.alpha.expect("dominant types carry an amplitude");
            let mut placed = false;
            for class in &mut classes {
                let shift = (alpha / class.alpha).ln() / ln_rate;
                let distance = (shift - shift.round()).abs();
                if distance <= CLASS_LATTICE_TOL {
                    class.members.push(index);
                    placed = true;
                    break;
                }
                if distance < CLASS_DEAD_ZONE {
                    return Err(DegreeError::AmbiguousClassification {
                        a: alpha,
                        b: class.alpha,
                        distance,
                    });
                }
            }
            if !placed {
                classes.push(DegreeClass {
                    members: vec![index],
                    alpha,
                    eff_law: GrowthLaw {
                        rate: 0.0,
                        poly_degree: 0,
                    },
                    dimension_exponent: f64::NAN,
                });
            }
        }

        // Branch rates: fastest member birth law per class.
        for class in &mut classes {
            let mut best = GrowthLaw {
                rate: 0.0,
                poly_degree: 0,
            };
            for &index in &class.members {
                let law = index_growth(mass_form, &[iota], Some(&types[index].support()));
                if law.rate > best.rate * (1.0 + RATE_EQ_REL_TOL) {
                    best = law;
                } else if (law.rate - best.rate).abs() <= RATE_EQ_REL_TOL * best.rate.max(1.0) {
                    best.poly_degree = best.poly_degree.max(law.poly_degree);
                }
            }
            class.eff_law = best;
            class.dimension_exponent = best.rate.ln() / lambda_u.ln();
        }
    }

    let branch_rates = dedup_sorted(classes.iter().map(|c| c.eff_law.rate).collect());
    let bedm = branch_rates.len() > 1;
    let max_rate = branch_rates.last().copied().unwrap_or(0.0);
    let scale_free = applicable && !bedm && max_rate > 1.0 + RATE_EQ_REL_TOL;
    let spectrum = dedup_sorted(classes.iter().map(|c| c.dimension_exponent).collect());
    let dimension = if applicable && !classes.is_empty() {
        Some(max_rate.ln() / lambda_u.ln())
    } else {
        None
    };

    Ok(DegreeAnalysis {
        applicable,
        lambda_u,
        tau_deg,
        c_deg_max,
        types,
        classes,
        bedm,
        scale_free,
        multiscale_free: bedm,
        dimension,
        spectrum,
    })
}

// ---------------------------------------------------------------------------
// Exact combinatorial histogram
// ---------------------------------------------------------------------------

/// One degree level with its exact constituent counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistogramLevel {
    pub degree: BigUint,
    pub count: BigUint,
    /// `(type index, birth generation, count)` triples, ascending.
    pub parts: Vec<(usize, u32, BigUint)>,
}

/// Exact degree histogram of one iterate, from matrix data alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialHistogram {
    pub generation: u32,
    /// Levels ascending by degree.
    pub levels: Vec<HistogramLevel>,
}

impl CombinatorialHistogram {
    /// Maximum degree of the iterate; zero only for an edgeless iterate.
    pub fn max_degree(&self) -> BigUint {
        self.levels
            .last()
            .map(|l| l.degree.clone())
            .unwrap_or_else(BigUint::zero)
    }

    /// Total vertex count of the iterate.
    pub fn vertex_count(&self) -> BigUint {
        let mut acc = BigUint::zero();
        for level in &self.levels {
            acc += &level.count;
        }
        acc
    }
}

/// Computes the exact degree histogram of generation `n`: every vertex is a
/// copy of some birth type born at some generation `m`, contributing degree
/// `norm1(kappa * N^(n-m))` with multiplicity `birth_count(type, m)`.
pub fn combinatorial_histogram(
    types: &[BirthType],
    mass: &IntMatrix,
    degree_m: &IntMatrix,
    iota: usize,
    n: u32,
) -> CombinatorialHistogram {
    // Degree of each type by age, exact.
    let degree_by_age: Vec<Vec<BigUint>> = types
        .iter()
        .map(|t| {
            let mut row = big_row(&t.kappa.0);
            let mut norms = Vec::with_capacity(n as usize + 1);
            norms.push(row_norm1(&row));
            for _ in 0..n {
                row = row_times_matrix(&row, degree_m);
                norms.push(row_norm1(&row));
            }
            norms
        })
        .collect();

    // Occurrence row by generation: occ[m] = e_iota M^(m-1) for m >= 1.
    let mut occ_row = crate::matrix::unit_row(mass.side(), iota);
    let mut buckets: BTreeMap<BigUint, Vec<(usize, u32, BigUint)>> = BTreeMap::new();
    for m in 0..=n {
        for (index, t) in types.iter().enumerate() {
            let count = if m == 0 {
                BigUint::from(t.initial_count)
            } else {
                dot(&occ_row, &big_row(&t.interior_count))
            };
            if count.is_zero() {
                continue;
            }
            let degree = degree_by_age[index][(n - m) as usize].clone();
            buckets
                .entry(degree)
                .or_default()
                .push((index, m, count));
        }
        if (1..n).contains(&m) {
            occ_row = row_times_matrix(&occ_row, mass);
        }
    }

    let levels = buckets
        .into_iter()
        .map(|(degree, parts)| {
            let mut count = BigUint::zero();
            for (_, _, c) in &parts {
                count += c;
            }
            HistogramLevel {
                degree,
                count,
                parts,
            }
        })
        .collect();
    CombinatorialHistogram {
        generation: n,
        levels,
    }
}
