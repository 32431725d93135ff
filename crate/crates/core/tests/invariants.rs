//! Structural invariants checked over seeded random systems.

mod common;

use eigs_core::distance::{brute_force_min_product, min_product_value, trim_set};
use eigs_core::engine::vertex_kappa;
use eigs_core::model::{kappa, serialize_spec};
use eigs_core::spectral::degree_projection_defects;
use eigs_core::*;
use num_bigint::BigUint;
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = RandomSpecParams> {
    (1u16..=4, 1u32..=4, 0u32..=3, 0.0f64..=1.0).prop_map(
        |(colours, max_interior, max_extra_edges, forward_bias)| RandomSpecParams {
            colours,
            max_interior,
            max_extra_edges,
            forward_bias,
        },
    )
}

fn spec_strategy() -> impl Strategy<Value = IgsSpec> {
    (params_strategy(), any::<u64>()).prop_map(|(params, seed)| random_spec(&params, seed))
}

/// Reorders the interior vertices of every rule and renumbers edges to
/// match: an isomorphic description of the same system.
fn relabel_interiors(spec: &IgsSpec) -> IgsSpec {
    let mut out = spec.clone();
    for rule in &mut out.rules {
        let v = rule.vertex_names.len() as u32;
        let interior: Vec<u32> =
            (0..v).filter(|&x| x != rule.beta_plus && x != rule.beta_minus).collect();
        let mut target: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
        target.insert(rule.beta_plus, rule.beta_plus);
        target.insert(rule.beta_minus, rule.beta_minus);
        for (slot, &old) in interior.iter().rev().enumerate() {
            target.insert(old, interior[slot]);
        }
        let mut names = rule.vertex_names.clone();
        for (&old, &new) in &target {
            names[new as usize] = rule.vertex_names[old as usize].clone();
        }
        rule.vertex_names = names;
        for edge in &mut rule.edges {
            edge.tail = target[&edge.tail];
            edge.head = target[&edge.head];
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every generated system passes validation and a serialize/parse
    /// round trip reproduces it exactly.
    #[test]
    fn random_specs_validate_and_round_trip(spec in spec_strategy()) {
        prop_assert!(validate(&spec).is_ok());
        let text = serialize_spec(&spec);
        let back = parse_spec(&text).expect("own serialization parses");
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(serialize_spec(&back), text);
    }

    /// Handshake: inside one rule, for each colour, total outgoing incidence
    /// equals total incoming incidence equals the edge count.
    #[test]
    fn incidence_sums_match_edge_counts(spec in spec_strategy()) {
        for rule in &spec.rules {
            let counts = chi(&rule.edges, spec.colour_count);
            let mut out_sum = vec![0u64; spec.colour_count as usize];
            let mut in_sum = vec![0u64; spec.colour_count as usize];
            for v in 0..rule.vertex_names.len() as u32 {
                let k = kappa(&rule.edges, v, spec.colour_count);
                for c in 0..spec.colour_count as usize {
                    out_sum[c] += k.0[2 * c];
                    in_sum[c] += k.0[2 * c + 1];
                }
            }
            prop_assert_eq!(&out_sum, &counts.0);
            prop_assert_eq!(&in_sum, &counts.0);
        }
    }

    /// Positivity of the incidence-evolution matrix projects onto positivity
    /// of the mass matrix.
    #[test]
    fn incidence_positivity_projects(spec in spec_strategy()) {
        let mass = mass_matrix(&spec);
        let degree_m = degree_matrix(&spec);
        prop_assert!(degree_projection_defects(&degree_m, &mass).is_empty());
    }

    /// Block partitions: every assembled choice matrix refines the mass
    /// partition (so it has at least as many blocks), and the incidence
    /// partition projects into the mass partition position-wise.
    #[test]
    fn block_partitions_refine_mass(spec in spec_strategy()) {
        let mass = mass_matrix(&spec);
        let mass_form = condensation(&mass);
        let family = choice_family(&spec, 1 << 20).expect("budget generous");
        prop_assume!(family.product_size() <= BigUint::from(256u32));
        for_each_choice(&family, 256, |combo| {
            let choice_form = condensation(&assemble_choice(&family, combo));
            assert!(block_refinement_defects(&choice_form, &mass_form, |i| i).is_empty());
            assert!(choice_form.block_count() >= mass_form.block_count());
        })
        .expect("within budget");
        let degree_form = condensation(&degree_matrix(&spec));
        prop_assert!(
            block_refinement_defects(&degree_form, &mass_form, project_position).is_empty()
        );
        prop_assert!(degree_form.block_count() >= mass_form.block_count());
    }

    /// Planted paths are real paths: each count vector uses at least two
    /// edges and never more of a colour than the rule has.
    #[test]
    fn choice_vectors_are_bounded_paths(spec in spec_strategy()) {
        let family = choice_family(&spec, 1 << 20).expect("budget generous");
        prop_assert_eq!(family.sets.len(), spec.rules.len());
        for (rule, set) in spec.rules.iter().zip(&family.sets) {
            let counts = chi(&rule.edges, spec.colour_count);
            prop_assert!(!set.is_empty());
            for v in set {
                prop_assert!(v.total() >= 2);
                for (have, cap) in v.0.iter().zip(&counts.0) {
                    prop_assert!(have <= cap);
                }
            }
            // Sorted and deduplicated.
            for pair in set.windows(2) {
                prop_assert!(pair[0] < pair[1]);
            }
        }
    }

    /// The trim contains its colour and is closed under reachability in the
    /// union digraph of the choice vectors.
    #[test]
    fn trim_is_reach_closed(spec in spec_strategy()) {
        let family = choice_family(&spec, 1 << 20).expect("budget generous");
        for j in 0..family.sets.len() {
            let trim = trim_set(&family, j);
            prop_assert!(trim.contains(&j));
            for &a in &trim {
                for v in &family.sets[a] {
                    for (b, &count) in v.0.iter().enumerate() {
                        if count > 0 {
                            prop_assert!(trim.contains(&b), "colour {b} escapes the trim of {j}");
                        }
                    }
                }
            }
        }
    }

    /// Edge counts of generated graphs equal mass-power norms, and the edge
    /// substitution preserves colour counts exactly.
    #[test]
    fn generated_sizes_match_mass_powers(spec in spec_strategy()) {
        let mass = mass_matrix(&spec);
        let iota = spec.initial_colour.index();
        for (n, expected) in edge_series(&mass, iota, 3) {
            let graph = iterate(&spec, n, 1_000_000).expect("small generations fit");
            prop_assert_eq!(BigUint::from(graph.edges.len()), expected);
        }
    }

    /// Incidence evolution: a vertex born in generation m with incidence u
    /// has incidence uN^(n-m) in generation n, recomputed from the actual
    /// edges.
    #[test]
    fn vertex_incidence_evolves_linearly(spec in spec_strategy()) {
        let degree_m = degree_matrix(&spec);
        let n = 3u32;
        let graph = iterate(&spec, n, 1_000_000).expect("small generations fit");
        for (v, record) in graph.vertices.iter().enumerate() {
            let expected = matrix::row_times_matrix_pow(
                &matrix::big_row(&record.birth_type.0),
                &degree_m,
                n - record.birth_generation,
            );
            let actual = vertex_kappa(&graph, v as u32, spec.colour_count);
            let actual_big: Vec<BigUint> =
                actual.0.iter().map(|&x| BigUint::from(x)).collect();
            prop_assert_eq!(actual_big, expected);
        }
    }

    /// The minimizing recursion agrees with brute force over every choice
    /// combination on small products.
    #[test]
    fn recursion_matches_brute_force(spec in spec_strategy()) {
        let family = choice_family(&spec, 1 << 20).expect("budget generous");
        let product = family.product_size();
        prop_assume!(product <= BigUint::from(64u32));
        let iota = spec.initial_colour.index();
        for n in 0..=2u32 {
            prop_assert_eq!(
                min_product_value(&family, iota, n),
                brute_force_min_product(&family, iota, n)
            );
        }
    }

    /// Relabeling rule interiors changes nothing observable.
    #[test]
    fn interior_relabeling_is_invisible(spec in spec_strategy()) {
        let permuted = relabel_interiors(&spec);
        prop_assert!(validate(&permuted).is_ok());
        prop_assert_eq!(mass_matrix(&permuted), mass_matrix(&spec));
        prop_assert_eq!(degree_matrix(&permuted), degree_matrix(&spec));
        let family = choice_family(&spec, 1 << 20).expect("budget generous");
        let permuted_family = choice_family(&permuted, 1 << 20).expect("budget generous");
        prop_assert_eq!(family.sets, permuted_family.sets);
        let graph = iterate(&spec, 2, 1_000_000).expect("fits");
        let permuted_graph = iterate(&permuted, 2, 1_000_000).expect("fits");
        prop_assert_eq!(graph.edges.len(), permuted_graph.edges.len());
        prop_assert_eq!(
            eigs_core::engine::degree_histogram(&graph),
            eigs_core::engine::degree_histogram(&permuted_graph)
        );
    }

    /// Growth laws are sandwiched by their own descriptors: rate to the n
    /// times a polynomial bounds the exact norms both ways.
    #[test]
    fn growth_law_brackets_exact_norms(spec in spec_strategy()) {
        let mass = mass_matrix(&spec);
        let form = condensation(&mass);
        let iota = spec.initial_colour.index();
        let law = index_growth(&form, &[iota], None);
        let series = edge_series(&mass, iota, 12);
        if law.rate <= 1.0 + 1e-9 {
            // Polynomial growth only: norms are bounded by a polynomial.
            let bound = (1..=12u32).map(|n| (n as f64).powi(law.poly_degree as i32 + 1)).fold(0.0, f64::max);
            for (n, value) in &series[1..] {
                let v = matrix::ln_biguint(value).exp();
                prop_assert!(v <= (mass.side() as f64 + 1.0) * bound * (*n as f64 + 1.0).max(1.0) * 64.0);
            }
        } else {
            // Geometric growth: ln norm / n converges to ln rate.
            let (n, value) = series.last().unwrap();
            let per_step = matrix::ln_biguint(value) / *n as f64;
            // Within a factor accounting for the polynomial part.
            let poly_part = (law.poly_degree as f64) * (*n as f64).ln() / *n as f64;
            prop_assert!(per_step <= law.rate.ln() + poly_part + 0.5);
            prop_assert!(per_step >= law.rate.ln() / 2.0 - 0.5);
        }
    }

    /// The combinatorial histogram equals the engine histogram for every
    /// random system.
    #[test]
    fn histograms_agree_on_random_systems(spec in spec_strategy()) {
        let mass = mass_matrix(&spec);
        let mass_form = condensation(&mass);
        let degree_m = degree_matrix(&spec);
        let types = birth_types(&spec, &mass_form, &mass);
        let iota = spec.initial_colour.index();
        for n in 0..=3u32 {
            let graph = iterate(&spec, n, 1_000_000).expect("fits");
            let engine: Vec<(BigUint, BigUint)> = eigs_core::engine::degree_histogram(&graph)
                .into_iter()
                .map(|(d, c)| (BigUint::from(d), BigUint::from(c)))
                .collect();
            let exact: Vec<(BigUint, BigUint)> =
                combinatorial_histogram(&types, &mass, &degree_m, iota, n)
                    .levels
                    .into_iter()
                    .map(|l| (l.degree, l.count))
                    .collect();
            prop_assert_eq!(&engine, &exact, "histogram mismatch at n={}", n);
        }
    }
}

#[test]
fn seeded_generation_is_deterministic() {
    let params = RandomSpecParams::default();
    for seed in [0u64, 1, 17, u64::MAX] {
        let a = random_spec(&params, seed);
        let b = random_spec(&params, seed);
        assert_eq!(a, b);
        assert_eq!(serialize_spec(&a), serialize_spec(&b));
    }
}
