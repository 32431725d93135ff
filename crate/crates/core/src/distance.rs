//! Planted-distance growth, stability of minimizing choices, Hausdorff
//! dimensions, and the fractal spectrum.
//!
//! The planted distance of the `n`-th iterate started from colour `j` is an
//! exact min-plus quantity: `d_n(j) = min over choice sequences of
//! norm1(e_j * D_1 * ... * D_n)`, where each choice matrix draws one planted
//! path count vector per colour. The recursion `F(x)_a = min over the
//! colour-`a` choice set of <d, x>` computes it in one sweep per generation,
//! exactly, in big integers.
//!
//! The growth rate of that sequence is controlled by the trimmed choice
//! matrices: restrict a choice matrix to the colours reachable from `j`
//! inside the family, take the worst reachable block radius, and minimize
//! over choices. A minimizing choice that is primitive, and stays primitive
//! under every single-row replacement, certifies that the rate is attained
//! by an eigenvector fixed point of the recursion; the certificate is
//! checked numerically and reported with its residual.

use crate::matrix::{ln_biguint, row_norm1, IntMatrix};
use crate::model::{ChiVector, ColourId, IgsSpec};
use crate::spectral::{condensation, perron_vector, spectral_radius, ChoiceFamily, FrobeniusForm};
use crate::tolerances::{
    BELLMAN_ITER_CAP, BELLMAN_RATIO_REL_TOL, BELLMAN_STABLE_WINDOW, RATE_EQ_REL_TOL,
};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error(
        "stability check for {colour} needs {count} choice combinations, budget is {budget}"
    )]
    TrimEnumerationBudget {
        colour: ColourId,
        count: BigUint,
        budget: u64,
    },
}

// ---------------------------------------------------------------------------
// Exact min-plus recursion
// ---------------------------------------------------------------------------

/// One sweep of the minimizing recursion over all colours.
fn bellman_step(family: &ChoiceFamily, values: &[BigUint]) -> Vec<BigUint> {
    family
        .sets
        .iter()
        .map(|options| {
            options
                .iter()
                .map(|d| {
                    let mut acc = BigUint::zero();
                    for (count, value) in d.0.iter().zip(values) {
                        if *count > 0 {
                            acc += value * *count;
                        }
                    }
                    acc
                })
                .min()
                .expect("choice sets are nonempty")
        })
        .collect()
}

/// Exact planted distance of the `n`-th iterate started from colour `j`
/// (0-based), i.e. the `n`-fold recursion applied to the all-ones vector.
pub fn min_product_value(family: &ChoiceFamily, j: usize, n: u32) -> BigUint {
    let mut values = vec![BigUint::one(); family.sets.len()];
    for _ in 0..n {
        values = bellman_step(family, &values);
    }
    values[j].clone()
}

/// The full distance vector at generation `n`, one entry per start colour.
pub fn min_product_values(family: &ChoiceFamily, n: u32) -> Vec<BigUint> {
    let mut values = vec![BigUint::one(); family.sets.len()];
    for _ in 0..n {
        values = bellman_step(family, &values);
    }
    values
}

/// Literal enumeration over all choice-matrix sequences of length `n`:
/// `min over (D_1..D_n) of norm1(e_j * D_1 * ... * D_n)`.
///
/// Exponential in `n`; this is the oracle the recursion is validated
/// against, not a production path.
pub fn brute_force_min_product(family: &ChoiceFamily, j: usize, n: u32) -> BigUint {
    let side = family.sets.len();
    let mut matrices: Vec<IntMatrix> = Vec::new();
    let mut picks = vec![0usize; side];
    loop {
        let rows: Vec<Vec<u64>> = (0..side)
            .map(|i| family.sets[i][picks[i]].0.clone())
            .collect();
        matrices.push(IntMatrix::from_rows(&rows));
        // Mixed-radix increment over the per-colour option counts.
        let mut carry = true;
        for i in 0..side {
            if !carry {
                break;
            }
            picks[i] += 1;
            if picks[i] == family.sets[i].len() {
                picks[i] = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }

    fn descend(row: &[BigUint], depth: u32, matrices: &[IntMatrix]) -> BigUint {
        if depth == 0 {
            return row_norm1(row);
        }
        matrices
            .iter()
            .map(|m| descend(&crate::matrix::row_times_matrix(row, m), depth - 1, matrices))
            .min()
            .expect("at least one choice matrix")
    }

    let start = crate::matrix::unit_row(side, j);
    descend(&start, n, &matrices)
}

/// Growth-rate estimate of the exact distance recursion for one colour.
#[derive(Clone, Debug)]
pub struct BellmanRun {
    /// Window-length geometric mean of the final value ratios.
    pub lambda: f64,
    pub iterations: u32,
    /// Whether single-step ratios stayed within tolerance of each other for
    /// the whole stability window. False signals an imprimitive minimizing
    /// structure whose single-step ratios oscillate.
    pub converged: bool,
}

/// Iterates the recursion until the value ratio at colour `j` is stable for
/// [`BELLMAN_STABLE_WINDOW`] consecutive steps (or the cap is hit).
pub fn bellman_run(family: &ChoiceFamily, j: usize) -> BellmanRun {
    let mut values = vec![BigUint::one(); family.sets.len()];
    let mut ln_history: Vec<f64> = vec![0.0];
    let mut stable_for = 0u32;
    let mut iterations = 0u32;
    for _ in 1..=BELLMAN_ITER_CAP {
        values = bellman_step(family, &values);
        iterations += 1;
        ln_history.push(ln_biguint(&values[j]));
        let len = ln_history.len();
        if len >= 3 {
            let r_new = ln_history[len - 1] - ln_history[len - 2];
            let r_old = ln_history[len - 2] - ln_history[len - 3];
            if (r_new - r_old).abs() <= BELLMAN_RATIO_REL_TOL * r_new.abs().max(1.0) {
                stable_for += 1;
                if stable_for >= BELLMAN_STABLE_WINDOW {
                    break;
                }
            } else {
                stable_for = 0;
            }
        }
    }
    let len = ln_history.len();
    let window = (BELLMAN_STABLE_WINDOW as usize).min(len - 1);
    let lambda = ((ln_history[len - 1] - ln_history[len - 1 - window]) / window as f64).exp();
    BellmanRun {
        lambda,
        iterations,
        converged: stable_for >= BELLMAN_STABLE_WINDOW,
    }
}

// ---------------------------------------------------------------------------
// Trims and stability
// ---------------------------------------------------------------------------

/// Colours reachable from `j` (inclusive) through the supports of the choice
/// sets: the union over choice matrices of the reachable set, which equals
/// reachability in the union digraph because row choices are independent.
pub fn trim_set(family: &ChoiceFamily, j: usize) -> Vec<usize> {
    let side = family.sets.len();
    let mut union = IntMatrix::zeros(side);
    for (i, options) in family.sets.iter().enumerate() {
        for d in options {
            for (b, &count) in d.0.iter().enumerate() {
                if count > 0 {
                    union.set(i, b, 1);
                }
            }
        }
    }
    let mut seen = vec![false; side];
    seen[j] = true;
    let mut stack = vec![j];
    while let Some(v) = stack.pop() {
        for w in union.successors(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..side).filter(|&v| seen[v]).collect()
}

/// A stable minimizing choice with its certified fixed point.
#[derive(Clone, Debug)]
pub struct StabilityCertificate {
    /// Option index chosen per trim position (lexicographically first stable
    /// minimizer).
    pub choice: Vec<usize>,
    /// The chosen full count vectors, one per trim colour.
    pub rows: Vec<ChiVector>,
    /// Perron vector of the trimmed choice matrix, unit maximum.
    pub fixed_point: Vec<f64>,
    /// `max over positions of |min-product(v) - lambda v|`, with `v`
    /// normalized to unit maximum.
    pub residual: f64,
}

/// Why no stable minimizer exists.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StabilityFailure {
    /// No minimizing choice is primitive on the trim (or attains the rate
    /// with its full trimmed radius).
    NoPrimitiveMinimizer,
    /// Some primitive minimizer loses primitivity under a single-row
    /// replacement at the given trim colour (0-based).
    ReplacementBreaks { colour: usize },
}

/// Outcome of the stability check for one start colour.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub colour: ColourId,
    /// Trim: 0-based colours reachable inside the family.
    pub trim: Vec<usize>,
    /// Minimized worst reachable block radius over all choices.
    pub lambda: f64,
    pub minimizer_count: u64,
    pub stable: bool,
    pub certificate: Option<StabilityCertificate>,
    pub failure: Option<StabilityFailure>,
}

fn reachable_max_rho(form: &FrobeniusForm, start_block: usize) -> f64 {
    let reach = form.reachable_from([start_block]);
    reach
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .map(|(b, _)| form.blocks[b].rho)
        .fold(0.0f64, f64::max)
}

fn full_max_rho(form: &FrobeniusForm) -> f64 {
    form.blocks.iter().map(|b| b.rho).fold(0.0f64, f64::max)
}

fn is_primitive(form: &FrobeniusForm) -> bool {
    form.block_count() == 1 && form.blocks[0].primitive
}

/// Enumerates all trimmed choice matrices for colour `j`, computes the
/// minimized rate, and searches the minimizers (lexicographic order of
/// option indices) for one that is primitive and stays primitive under
/// every single-row replacement.
pub fn check_primitive_stability(
    family: &ChoiceFamily,
    j: usize,
    combo_budget: u64,
) -> Result<StabilityReport, DistanceError> {
    let trim = trim_set(family, j);
    let pos_of_j = trim.iter().position(|&a| a == j).expect("trim contains start");
    let option_counts: Vec<usize> = trim.iter().map(|&a| family.sets[a].len()).collect();

    let mut combo_count = BigUint::one();
    for &c in &option_counts {
        combo_count *= BigUint::from(c);
    }
    if combo_count > BigUint::from(combo_budget) {
        return Err(DistanceError::TrimEnumerationBudget {
            colour: ColourId::from_index(j),
            count: combo_count,
            budget: combo_budget,
        });
    }

    // Option rows restricted to trim columns. Forward invariance of the trim
    // guarantees no mass is lost in the restriction.
    let restricted: Vec<Vec<Vec<u64>>> = trim
        .iter()
        .map(|&a| {
            family.sets[a]
                .iter()
                .map(|d| {
                    let row: Vec<u64> = trim.iter().map(|&b| d.0[b]).collect();
                    debug_assert_eq!(
                        row.iter().sum::<u64>(),
                        d.0.iter().sum::<u64>(),
                        "choice support must stay inside the trim"
                    );
                    row
                })
                .collect()
        })
        .collect();

    let build = |choice: &[usize]| -> IntMatrix {
        let rows: Vec<Vec<u64>> = choice
            .iter()
            .enumerate()
            .map(|(p, &o)| restricted[p][o].clone())
            .collect();
        IntMatrix::from_rows(&rows)
    };

    // Pass 1: the minimized rate.
    let mut lambda = f64::INFINITY;
    let mut choice = vec![0usize; trim.len()];
    let mut combos: Vec<Vec<usize>> = Vec::new();
    loop {
        combos.push(choice.clone());
        let form = condensation(&build(&choice));
        let value = reachable_max_rho(&form, form.block_of[pos_of_j]);
        lambda = lambda.min(value);
        if !next_combo(&mut choice, &option_counts) {
            break;
        }
    }

    // Pass 2: stable minimizer search, lexicographic.
    let near = |a: f64, b: f64| (a - b).abs() <= RATE_EQ_REL_TOL * b.max(1.0);
    let mut minimizer_count = 0u64;
    let mut certificate: Option<StabilityCertificate> = None;
    let mut failure: Option<StabilityFailure> = None;
    for combo in &combos {
        let a = build(combo);
        let form = condensation(&a);
        if !near(reachable_max_rho(&form, form.block_of[pos_of_j]), lambda) {
            continue;
        }
        minimizer_count += 1;
        if certificate.is_some() {
            continue;
        }
        if !near(full_max_rho(&form), lambda) || !is_primitive(&form) {
            if failure.is_none() {
                failure = Some(StabilityFailure::NoPrimitiveMinimizer);
            }
            continue;
        }
        // Single-row replacements must all stay primitive.
        let mut broken: Option<usize> = None;
        'rows: for p in 0..trim.len() {
            for o in 0..option_counts[p] {
                if o == combo[p] {
                    continue;
                }
                let mut perturbed = combo.clone();
                perturbed[p] = o;
                if !is_primitive(&condensation(&build(&perturbed))) {
                    broken = Some(p);
                    break 'rows;
                }
            }
        }
        match broken {
            Some(p) => {
                failure = Some(StabilityFailure::ReplacementBreaks { colour: trim[p] });
            }
            None => {
                let v = perron_vector(&a);
                let rate = spectral_radius(&a, &(0..trim.len()).collect::<Vec<_>>());
                let mut residual = 0.0f64;
                for (p, _) in trim.iter().enumerate() {
                    let applied = restricted[p]
                        .iter()
                        .map(|row| {
                            row.iter()
                                .zip(&v)
                                .map(|(&c, x)| c as f64 * x)
                                .sum::<f64>()
                        })
                        .fold(f64::INFINITY, f64::min);
                    residual = residual.max((applied - rate * v[p]).abs());
                }
                certificate = Some(StabilityCertificate {
                    choice: combo.clone(),
                    rows: combo
                        .iter()
                        .enumerate()
                        .map(|(p, &o)| family.sets[trim[p]][o].clone())
                        .collect(),
                    fixed_point: v,
                    residual,
                });
                failure = None;
            }
        }
    }

    Ok(StabilityReport {
        colour: ColourId::from_index(j),
        trim,
        lambda,
        minimizer_count,
        stable: certificate.is_some(),
        certificate,
        failure,
    })
}

fn next_combo(choice: &mut [usize], counts: &[usize]) -> bool {
    for i in (0..choice.len()).rev() {
        choice[i] += 1;
        if choice[i] < counts[i] {
            return true;
        }
        choice[i] = 0;
    }
    false
}

// ---------------------------------------------------------------------------
// Dimensions and spectrum
// ---------------------------------------------------------------------------

/// Distance data of one start colour.
#[derive(Clone, Debug)]
pub struct ColourDistance {
    pub colour: ColourId,
    /// Trim of the choice family, 0-based colours.
    pub trim: Vec<usize>,
    /// Distance growth rate; the exact-recursion estimate is primary.
    pub lambda: f64,
    pub bellman: BellmanRun,
    pub stability: StabilityReport,
    /// Colours reachable in the mass matrix sharing this colour's rate.
    pub i_dist: Vec<usize>,
    /// Largest mass radius reachable inside `i_dist`.
    pub lambda_surv: f64,
    /// `ln(lambda_surv) / ln(lambda)`.
    pub dim_h: f64,
}

/// Full distance-side analysis of a system.
#[derive(Clone, Debug)]
pub struct FractalAnalysis {
    pub per_colour: Vec<ColourDistance>,
    /// Distinct Hausdorff dimensions over the surviving colours of the
    /// initial colour, ascending.
    pub spectrum: Vec<f64>,
    /// Distinct surviving mass rates over the same colours, ascending.
    pub surviving_rates: Vec<f64>,
    /// More than one dimension in the spectrum.
    pub multifractal: bool,
    /// More than one distinct surviving mass rate.
    pub bddm: bool,
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

/// Runs the whole distance side: per-colour rates and stability, surviving
/// colour sets, dimensions, and the spectrum at the initial colour.
pub fn fractal_analysis(
    spec: &IgsSpec,
    family: &ChoiceFamily,
    mass: &IntMatrix,
    mass_form: &FrobeniusForm,
    combo_budget: u64,
) -> Result<FractalAnalysis, DistanceError> {
    let side = family.sets.len();
    let runs: Vec<BellmanRun> = (0..side).map(|j| bellman_run(family, j)).collect();
    let lambdas: Vec<f64> = runs.iter().map(|r| r.lambda).collect();

    let mut per_colour = Vec::with_capacity(side);
    for j in 0..side {
        let stability = check_primitive_stability(family, j, combo_budget)?;
        let reach = mass_form.reachable_indices(j);
        let i_dist: Vec<usize> = reach
            .iter()
            .copied()
            .filter(|&a| (lambdas[a] - lambdas[j]).abs() <= RATE_EQ_REL_TOL * lambdas[j].max(1.0))
            .collect();
        let sub = mass.restrict(&i_dist);
        let sub_form = condensation(&sub);
        let pos = i_dist.iter().position(|&a| a == j).expect("j survives itself");
        let lambda_surv = reachable_max_rho(&sub_form, sub_form.block_of[pos]);
        let lambda = lambdas[j];
        per_colour.push(ColourDistance {
            colour: ColourId::from_index(j),
            trim: stability.trim.clone(),
            lambda,
            bellman: runs[j].clone(),
            stability,
            i_dist,
            lambda_surv,
            dim_h: lambda_surv.ln() / lambda.ln(),
        });
    }

    let iota = spec.initial_colour.index();
    let surviving = per_colour[iota].i_dist.clone();
    let spectrum = dedup_sorted(surviving.iter().map(|&a| per_colour[a].dim_h).collect());
    let surviving_rates =
        dedup_sorted(surviving.iter().map(|&a| per_colour[a].lambda_surv).collect());
    let multifractal = spectrum.len() > 1;
    let bddm = surviving_rates.len() > 1;
    debug_assert_eq!(
        multifractal, bddm,
        "dimension multiplicity must match surviving-rate multiplicity"
    );

    Ok(FractalAnalysis {
        per_colour,
        spectrum,
        surviving_rates,
        multifractal,
        bddm,
    })
}
