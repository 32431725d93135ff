//! Cross-oracle identity checks: every matrix-side prediction is compared
//! against brute-force measurement on materialized iterates, per system,
//! with one printed pass/fail line per identity. The first failure is
//! reported with its counterexample and stops the run.

use eigs_core::distance::{brute_force_min_product, min_product_value};
use eigs_core::engine::{degree_histogram, planted_distance, vertex_kappa};
use eigs_core::matrix::{big_row, row_norm1, row_times_matrix};
use eigs_core::model::chi;
use eigs_core::{
    assemble_choice, birth_types, block_refinement_defects, choice_family,
    combinatorial_histogram, condensation, degree_matrix, for_each_choice, iterate, mass_matrix,
    parse_spec, project_position, random_spec, validate, BirthType, ChoiceFamily, FrobeniusForm,
    GeneratedGraph, IgsSpec, IntMatrix, RandomSpecParams,
};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::{
    DEFAULT_COMBO_BUDGET, DEFAULT_PATH_BUDGET, EXIT_BUDGET, EXIT_DOMAIN, EXIT_OK, EXIT_PARSE,
};

/// Work cap on the brute-force distance enumeration: the largest `n` with
/// `family_size^n` below this is checked.
const BRUTE_WORK_CAP: u64 = 200_000;

enum VerifyError {
    /// An identity failed; the message is the counterexample.
    Identity(String),
    /// An expansion budget was exceeded before the identity could be checked.
    Budget(String),
}

pub fn cmd_verify(
    paths: &[PathBuf],
    n_max: u32,
    random: u32,
    seed: u64,
    budget_edges: u64,
    tolerance: f64,
) -> u8 {
    let mut corpus: Vec<(String, IgsSpec)> = Vec::new();
    for path in paths {
        match load_for_verify(path) {
            Ok(spec) => corpus.push((display_name(path), spec)),
            Err(code) => return code,
        }
    }
    let params = RandomSpecParams::default();
    for offset in 0..random as u64 {
        let spec = random_spec(&params, seed + offset);
        if let Err(errors) = validate(&spec) {
            // The generator guarantees validity by construction; reaching
            // this is itself a failed identity.
            println!(
                "random(seed={}): FAIL generator produced an invalid system: {}",
                seed + offset,
                errors.violations[0]
            );
            return EXIT_DOMAIN;
        }
        corpus.push((format!("random(seed={})", seed + offset), spec));
    }
    if corpus.is_empty() {
        eprintln!("error: nothing to verify; pass system files or --random N");
        return EXIT_DOMAIN;
    }

    for (label, spec) in &corpus {
        println!("{label}: checking generations 0..={n_max}");
        match verify_system(spec, n_max, budget_edges, tolerance) {
            Ok(()) => {}
            Err(VerifyError::Identity(message)) => {
                println!("counterexample: {message}");
                return EXIT_DOMAIN;
            }
            Err(VerifyError::Budget(message)) => {
                eprintln!("error: {message}");
                return EXIT_BUDGET;
            }
        }
    }
    println!("ok: {} system{} verified", corpus.len(), plural(corpus.len()));
    EXIT_OK
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_for_verify(path: &Path) -> Result<IgsSpec, u8> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_PARSE);
        }
    };
    let spec = match parse_spec(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return Err(EXIT_PARSE);
        }
    };
    if let Err(errors) = validate(&spec) {
        println!(
            "{}: FAIL invalid system: {}",
            display_name(path),
            errors.violations[0]
        );
        return Err(EXIT_DOMAIN);
    }
    Ok(spec)
}

struct Checked {
    spec: IgsSpec,
    mass: IntMatrix,
    mass_form: FrobeniusForm,
    incidence: IntMatrix,
    family: ChoiceFamily,
    types: Vec<BirthType>,
    graphs: Vec<GeneratedGraph>,
    chi0: Vec<u64>,
}

fn pass(name: &str, detail: &str) {
    if detail.is_empty() {
        println!("  {name}: pass");
    } else {
        println!("  {name}: pass ({detail})");
    }
}

fn fail(name: &str, counterexample: String) -> VerifyError {
    println!("  {name}: FAIL {counterexample}");
    VerifyError::Identity(counterexample)
}

fn verify_system(
    spec: &IgsSpec,
    n_max: u32,
    budget_edges: u64,
    tolerance: f64,
) -> Result<(), VerifyError> {
    let mass = mass_matrix(spec);
    let mass_form = condensation(&mass);
    let incidence = degree_matrix(spec);
    let incidence_form = condensation(&incidence);
    let family = choice_family(spec, DEFAULT_PATH_BUDGET)
        .map_err(|e| VerifyError::Budget(e.to_string()))?;
    let types = birth_types(spec, &mass_form, &mass);
    let mut graphs = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        graphs.push(iterate(spec, n, budget_edges).map_err(|e| VerifyError::Budget(e.to_string()))?);
    }
    let initial = spec.effective_initial();
    let checked = Checked {
        spec: spec.clone(),
        mass,
        mass_form,
        incidence,
        family,
        types,
        graphs,
        chi0: chi(&initial.edges, spec.colour_count).0,
    };

    check_edge_counts(&checked)?;
    check_vertex_counts(&checked)?;
    check_vertex_incidence(&checked)?;
    check_histograms(&checked)?;
    check_distances(&checked)?;
    check_brute_force(&checked)?;
    check_choice_blocks(&checked)?;
    check_incidence_blocks(&checked, &incidence_form)?;
    check_stable_rates(&checked, tolerance)?;
    Ok(())
}

/// `|E(generation n)| = norm1(chi0 * M^n)`.
fn check_edge_counts(c: &Checked) -> Result<(), VerifyError> {
    let name = "edge count matches mass powers";
    let mut row = big_row(&c.chi0);
    for graph in &c.graphs {
        let predicted = row_norm1(&row);
        let measured = BigUint::from(graph.edges.len());
        if measured != predicted {
            return Err(fail(
                name,
                format!(
                    "at n={}: engine has {} edges, matrices predict {}",
                    graph.generation, measured, predicted
                ),
            ));
        }
        row = row_times_matrix(&row, &c.mass);
    }
    pass(name, &format!("{} generations", c.graphs.len()));
    Ok(())
}

/// `|V(generation n)| = |V(0)| + sum over m<=n of occurrences(m-1) * interiors`.
fn check_vertex_counts(c: &Checked) -> Result<(), VerifyError> {
    let name = "vertex count matches birth counts";
    let interiors: Vec<u64> = c
        .spec
        .rules
        .iter()
        .map(|r| r.vertex_count() as u64 - 2)
        .collect();
    let mut expected = BigUint::from(c.spec.effective_initial().vertex_names.len());
    let mut occ = big_row(&c.chi0);
    for graph in &c.graphs {
        let measured = BigUint::from(graph.vertices.len());
        if measured != expected {
            return Err(fail(
                name,
                format!(
                    "at n={}: engine has {} vertices, matrices predict {}",
                    graph.generation, measured, expected
                ),
            ));
        }
        // Births of generation n+1: interiors of every rule copy substituted
        // into the edges of generation n.
        for (count, interior) in occ.iter().zip(&interiors) {
            expected += count * BigUint::from(*interior);
        }
        occ = row_times_matrix(&occ, &c.mass);
    }
    pass(name, "");
    Ok(())
}

/// Every vertex's recomputed incidence vector equals its birth vector pushed
/// through the incidence-evolution matrix for its age.
fn check_vertex_incidence(c: &Checked) -> Result<(), VerifyError> {
    let name = "vertex incidence matches birth-type evolution";
    let last = c.graphs.last().expect("at least generation 0");
    let mut evolved: BTreeMap<(Vec<u64>, u32), Vec<BigUint>> = BTreeMap::new();
    for (id, record) in last.vertices.iter().enumerate() {
        let age = last.generation - record.birth_generation;
        let key = (record.birth_type.0.clone(), age);
        let predicted = evolved.entry(key).or_insert_with(|| {
            let mut row = big_row(&record.birth_type.0);
            for _ in 0..age {
                row = row_times_matrix(&row, &c.incidence);
            }
            row
        });
        let measured = vertex_kappa(last, id as u32, c.spec.colour_count);
        let matches = measured
            .0
            .iter()
            .zip(predicted.iter())
            .all(|(m, p)| BigUint::from(*m) == *p);
        if !matches {
            return Err(fail(
                name,
                format!(
                    "at n={}, vertex {}: engine incidence {:?}, predicted {:?}",
                    last.generation, id, measured.0, predicted
                ),
            ));
        }
    }
    pass(
        name,
        &format!("{} vertices at n={}", last.vertices.len(), last.generation),
    );
    Ok(())
}

/// The engine degree histogram equals the combinatorial prediction at every
/// generation.
fn check_histograms(c: &Checked) -> Result<(), VerifyError> {
    let name = "degree histogram matches prediction";
    let iota = c.spec.initial_colour.index();
    for graph in &c.graphs {
        let engine: BTreeMap<BigUint, BigUint> = degree_histogram(graph)
            .into_iter()
            .map(|(d, count)| (BigUint::from(d), BigUint::from(count)))
            .collect();
        let predicted: BTreeMap<BigUint, BigUint> =
            combinatorial_histogram(&c.types, &c.mass, &c.incidence, iota, graph.generation)
                .levels
                .into_iter()
                .map(|l| (l.degree, l.count))
                .collect();
        if engine != predicted {
            let diff = first_histogram_difference(&engine, &predicted);
            return Err(fail(
                name,
                format!("at n={}: {}", graph.generation, diff),
            ));
        }
    }
    pass(name, "");
    Ok(())
}

fn first_histogram_difference(
    engine: &BTreeMap<BigUint, BigUint>,
    predicted: &BTreeMap<BigUint, BigUint>,
) -> String {
    for (degree, count) in engine {
        match predicted.get(degree) {
            None => return format!("engine has degree {degree} (count {count}), prediction lacks it"),
            Some(p) if p != count => {
                return format!("degree {degree}: engine count {count}, predicted {p}")
            }
            _ => {}
        }
    }
    for (degree, count) in predicted {
        if !engine.contains_key(degree) {
            return format!("prediction has degree {degree} (count {count}), engine lacks it");
        }
    }
    "histograms differ".to_owned()
}

/// Breadth-first search between the planted vertices equals the exact
/// minimizing recursion.
fn check_distances(c: &Checked) -> Result<(), VerifyError> {
    let name = "planted distance: breadth-first search = recursion";
    if c.graphs[0].planted.is_none() {
        println!("  {name}: skipped (no planted pair in the initial graph)");
        return Ok(());
    }
    let iota = c.spec.initial_colour.index();
    for graph in &c.graphs {
        let bfs = planted_distance(graph).map_err(|e| {
            fail(
                name,
                format!("at n={}: {}", graph.generation, e),
            )
        })?;
        let predicted = min_product_value(&c.family, iota, graph.generation);
        if BigUint::from(bfs) != predicted {
            return Err(fail(
                name,
                format!(
                    "at n={}: breadth-first search {}, recursion {}",
                    graph.generation, bfs, predicted
                ),
            ));
        }
    }
    pass(name, &format!("n<={}", c.graphs.last().unwrap().generation));
    Ok(())
}

/// The recursion equals literal enumeration over all choice sequences, to
/// the depth the enumeration stays affordable.
fn check_brute_force(c: &Checked) -> Result<(), VerifyError> {
    let name = "planted distance: recursion = brute force";
    let size = match c.family.product_size().to_u64() {
        Some(s) => s,
        None => {
            println!("  {name}: skipped (family too large)");
            return Ok(());
        }
    };
    let mut depth = 0u32;
    let mut work = 1u64;
    while depth + 1 < c.graphs.len() as u32 {
        match work.checked_mul(size) {
            Some(w) if w <= BRUTE_WORK_CAP => {
                work = w;
                depth += 1;
            }
            _ => break,
        }
    }
    let iota = c.spec.initial_colour.index();
    for n in 0..=depth {
        let brute = brute_force_min_product(&c.family, iota, n);
        let recursion = min_product_value(&c.family, iota, n);
        if brute != recursion {
            return Err(fail(
                name,
                format!("at n={n}: brute force {brute}, recursion {recursion}"),
            ));
        }
    }
    pass(name, &format!("depth {depth}"));
    Ok(())
}

/// Every assembled choice matrix refines the mass block partition and has at
/// least as many blocks.
fn check_choice_blocks(c: &Checked) -> Result<(), VerifyError> {
    let name = "choice blocks refine mass blocks";
    let mut violation: Option<String> = None;
    let visited = for_each_choice(&c.family, DEFAULT_COMBO_BUDGET, |combo| {
        if violation.is_some() {
            return;
        }
        let form = condensation(&assemble_choice(&c.family, combo));
        let defects = block_refinement_defects(&form, &c.mass_form, |i| i);
        if let Some(d) = defects.first() {
            violation = Some(format!(
                "choice {:?}: colours {} and {} share a choice block but sit in \
                 different mass blocks",
                combo,
                d.members.0 + 1,
                d.members.1 + 1
            ));
            return;
        }
        if form.block_count() < c.mass_form.block_count() {
            violation = Some(format!(
                "choice {:?}: {} blocks, coarser than the {} mass blocks",
                combo,
                form.block_count(),
                c.mass_form.block_count()
            ));
        }
    });
    match visited {
        None => {
            println!("  {name}: skipped (family larger than the enumeration budget)");
            Ok(())
        }
        Some(count) => match violation {
            Some(message) => Err(fail(name, message)),
            None => {
                pass(name, &format!("{count} choices"));
                Ok(())
            }
        },
    }
}

/// Incidence blocks project position-wise into single mass blocks and are
/// at least as numerous.
fn check_incidence_blocks(c: &Checked, incidence_form: &FrobeniusForm) -> Result<(), VerifyError> {
    let name = "incidence blocks project into mass blocks";
    let defects = block_refinement_defects(incidence_form, &c.mass_form, project_position);
    if let Some(d) = defects.first() {
        return Err(fail(
            name,
            format!(
                "incidence positions {} and {} share a block but project into \
                 different mass blocks",
                d.members.0 + 1,
                d.members.1 + 1
            ),
        ));
    }
    if incidence_form.block_count() < c.mass_form.block_count() {
        return Err(fail(
            name,
            format!(
                "{} incidence blocks, coarser than the {} mass blocks",
                incidence_form.block_count(),
                c.mass_form.block_count()
            ),
        ));
    }
    pass(name, "");
    Ok(())
}

/// Where the minimizing structure is stable, the recursion rate equals the
/// minimized reachable radius and the certificate residual is tight.
fn check_stable_rates(c: &Checked, tolerance: f64) -> Result<(), VerifyError> {
    let name = "stable colours: recursion rate = minimized radius";
    let stability = eigs_core::fractal_analysis(
        &c.spec,
        &c.family,
        &c.mass,
        &c.mass_form,
        DEFAULT_COMBO_BUDGET,
    );
    let analysis = match stability {
        Ok(a) => a,
        Err(e) => {
            println!("  {name}: skipped ({e})");
            return Ok(());
        }
    };
    let mut stable_colours = 0;
    for colour in &analysis.per_colour {
        if !colour.stability.stable {
            continue;
        }
        stable_colours += 1;
        if colour.bellman.converged {
            let gap = (colour.lambda - colour.stability.lambda).abs();
            if gap > tolerance * colour.stability.lambda.max(1.0) {
                return Err(fail(
                    name,
                    format!(
                        "colour {}: recursion rate {}, minimized radius {}",
                        colour.colour.get(),
                        colour.lambda,
                        colour.stability.lambda
                    ),
                ));
            }
        }
        if let Some(cert) = &colour.stability.certificate {
            if cert.residual > tolerance {
                return Err(fail(
                    name,
                    format!(
                        "colour {}: certificate residual {:e} above {:e}",
                        colour.colour.get(),
                        cert.residual,
                        tolerance
                    ),
                ));
            }
        }
    }
    pass(name, &format!("{stable_colours} stable colours"));
    Ok(())
}

