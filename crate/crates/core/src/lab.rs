//! Empirical side: scaled degree levels, branch regression, growth fits,
//! seeded random systems, and CSV/SVG export.
//!
//! The scaled level of a degree bucket is its degree divided by the maximum
//! degree of the same iterate, kept as an exact (degree, maximum) pair so
//! distinct levels never collide through rounding. Each bucket is attributed
//! to the degree class that contributed the most vertices to it, known
//! exactly from the histogram's constituent counts; buckets with no class
//! constituent are suppressed (shown, never regressed).
//!
//! A branch's power-law exponent is fitted on its geometric head: levels are
//! walked in descending degree order and kept while consecutive degree
//! ratios stay near the degree growth rate, which trims exactly the young
//! levels whose degrees have not yet converged onto the lattice.

use crate::degree::{CombinatorialHistogram, DegreeAnalysis};
use crate::matrix::{ln_biguint, row_norm1, row_times_matrix, unit_row, IntMatrix};
use crate::model::{ColourId, Edge, IgsSpec, RuleGraph};
use crate::spectral::ChoiceFamily;
use crate::tolerances::{BRANCH_MIN_POINTS, BRANCH_RATIO_TOL};
use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Scaled levels and branch regression
// ---------------------------------------------------------------------------

/// One degree bucket with exact class attribution.
#[derive(Clone, Debug)]
pub struct ScaledLevel {
    pub degree: BigUint,
    /// Total vertices in the bucket.
    pub count: BigUint,
    /// Vertices contributed by each degree class.
    pub class_counts: Vec<BigUint>,
    /// Class with the largest contribution; `None` marks a suppressed level
    /// (no class constituents). Ties go to the lowest class index.
    pub assigned: Option<usize>,
}

/// All levels of one iterate, descending by degree.
#[derive(Clone, Debug)]
pub struct ScaledLevels {
    pub generation: u32,
    /// Maximum degree; the denominator of every scaled level.
    pub delta: BigUint,
    pub class_count: usize,
    pub levels: Vec<ScaledLevel>,
}

/// Attributes every histogram level to a degree class by its exact
/// constituent counts.
pub fn scaled_levels(
    analysis: &DegreeAnalysis,
    histogram: &CombinatorialHistogram,
) -> ScaledLevels {
    let class_of_type: Vec<Option<usize>> = {
        let mut map = vec![None; analysis.types.len()];
        for (k, class) in analysis.classes.iter().enumerate() {
            for &t in &class.members {
                map[t] = Some(k);
            }
        }
        map
    };

    let mut levels: Vec<ScaledLevel> = histogram
        .levels
        .iter()
        .map(|level| {
            let mut class_counts =
                vec![BigUint::from(0u32); analysis.classes.len()];
            for (t, _, count) in &level.parts {
                if let Some(k) = class_of_type[*t] {
                    class_counts[k] += count;
                }
            }
            let assigned = class_counts
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > BigUint::from(0u32))
                .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
                .map(|(k, _)| k);
            ScaledLevel {
                degree: level.degree.clone(),
                count: level.count.clone(),
                class_counts,
                assigned,
            }
        })
        .collect();
    levels.reverse();

    ScaledLevels {
        generation: histogram.generation,
        delta: histogram.max_degree(),
        class_count: analysis.classes.len(),
        levels,
    }
}

/// Ordinary least squares line with its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `y = intercept + slope x`. At least two points required; a perfect
/// fit (zero residual or zero spread) reports `r_squared = 1`.
pub fn least_squares(points: &[(f64, f64)]) -> LineFit {
    assert!(points.len() >= 2, "least squares needs at least two points");
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = syy - slope * sxy;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Regression result for one degree class at one generation.
#[derive(Clone, Debug)]
pub struct BranchFit {
    pub class_index: usize,
    /// Levels attributed to the class.
    pub levels_total: usize,
    /// Levels in the geometric head run actually fitted.
    pub levels_used: usize,
    /// `None` when the head run is shorter than the minimum point count.
    pub fit: Option<LineFit>,
    /// `(degree, attributed count)` of the fitted run, descending degree.
    pub used: Vec<(BigUint, BigUint)>,
}

/// Fits every branch on its geometric head run: per class, walk the
/// attributed levels in descending degree order and keep the maximal prefix
/// whose consecutive degree ratios stay within [`BRANCH_RATIO_TOL`] relative
/// of `rate`; regress `ln(attributed count)` on `ln(delta) - ln(degree)`.
pub fn branch_regression(levels: &ScaledLevels, rate: f64) -> Vec<BranchFit> {
    let ln_delta = ln_biguint(&levels.delta);
    (0..levels.class_count)
        .map(|k| {
            let branch: Vec<&ScaledLevel> = levels
                .levels
                .iter()
                .filter(|l| l.assigned == Some(k))
                .collect();
            let mut run = 0usize;
            while run < branch.len() {
                if run + 1 == branch.len() {
                    run += 1;
                    break;
                }
                let ratio =
                    (ln_biguint(&branch[run].degree) - ln_biguint(&branch[run + 1].degree)).exp();
                if (ratio - rate).abs() <= BRANCH_RATIO_TOL * rate {
                    run += 1;
                } else {
                    run += 1;
                    break;
                }
            }
            let used: Vec<(BigUint, BigUint)> = branch[..run]
                .iter()
                .map(|l| (l.degree.clone(), l.class_counts[k].clone()))
                .collect();
            let fit = if run >= BRANCH_MIN_POINTS {
                let points: Vec<(f64, f64)> = used
                    .iter()
                    .map(|(degree, count)| {
                        (ln_delta - ln_biguint(degree), ln_biguint(count))
                    })
                    .collect();
                Some(least_squares(&points))
            } else {
                None
            };
            BranchFit {
                class_index: k,
                levels_total: branch.len(),
                levels_used: run,
                fit,
                used,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Growth series and fits
// ---------------------------------------------------------------------------

/// Exact planted distances `(n, d_n)` for `n = 0..=n_max` from the
/// minimizing recursion; no graph is materialized.
pub fn distance_series(family: &ChoiceFamily, iota: usize, n_max: u32) -> Vec<(u32, BigUint)> {
    (0..=n_max)
        .map(|n| (n, crate::distance::min_product_value(family, iota, n)))
        .collect()
}

/// Exact edge counts `(n, |E_n|)` for `n = 0..=n_max` from mass powers.
pub fn edge_series(mass: &IntMatrix, iota: usize, n_max: u32) -> Vec<(u32, BigUint)> {
    let mut row = unit_row(mass.side(), iota);
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push((0, row_norm1(&row)));
    for n in 1..=n_max {
        row = row_times_matrix(&row, mass);
        out.push((n, row_norm1(&row)));
    }
    out
}

/// A geometric growth fit: regression of `ln value` on `n`.
#[derive(Clone, Copy, Debug)]
pub struct GrowthFit {
    pub fit: LineFit,
    /// `exp(slope)`: the fitted per-generation factor.
    pub rate: f64,
}

/// Fits a geometric law through an exact positive series.
pub fn geometric_fit(series: &[(u32, BigUint)]) -> GrowthFit {
    let points: Vec<(f64, f64)> = series
        .iter()
        .map(|(n, v)| (*n as f64, ln_biguint(v)))
        .collect();
    let fit = least_squares(&points);
    GrowthFit {
        fit,
        rate: fit.slope.exp(),
    }
}

// ---------------------------------------------------------------------------
// Random systems
// ---------------------------------------------------------------------------

/// Shape parameters for seeded random systems.
#[derive(Clone, Copy, Debug)]
pub struct RandomSpecParams {
    pub colours: u16,
    /// Interior vertices per rule, uniform in `1..=max_interior`.
    pub max_interior: u32,
    /// Extra edges per rule, uniform in `0..=max_extra_edges`.
    pub max_extra_edges: u32,
    /// Probability that an edge of rule `i` draws its colour from `i..=K`
    /// instead of `1..=K`, which biases systems towards reducibility.
    pub forward_bias: f64,
}

impl Default for RandomSpecParams {
    fn default() -> Self {
        RandomSpecParams {
            colours: 3,
            max_interior: 3,
            max_extra_edges: 2,
            forward_bias: 0.7,
        }
    }
}

/// Generates a valid system deterministically from a seed.
///
/// Every rule is a planted path `in -> w1 -> out` (planted distance exactly
/// 2) with further interior vertices attached to earlier ones and a few
/// extra edges that never connect the planting pair directly.
pub fn random_spec(params: &RandomSpecParams, seed: u64) -> IgsSpec {
    assert!(params.colours >= 1, "need at least one colour");
    assert!(params.max_interior >= 1, "need at least one interior vertex");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = params.colours;

    let mut rules = Vec::with_capacity(k as usize);
    for colour in 1..=k {
        let pick_colour = |rng: &mut ChaCha8Rng| -> ColourId {
            let lo = if rng.gen_bool(params.forward_bias) {
                colour
            } else {
                1
            };
            ColourId::new(rng.gen_range(lo..=k)).expect("colour range starts at 1")
        };

        let interior = rng.gen_range(1..=params.max_interior);
        let mut vertex_names = vec!["in".to_owned()];
        for w in 1..=interior {
            vertex_names.push(format!("w{w}"));
        }
        vertex_names.push("out".to_owned());
        let beta_plus = 0u32;
        let beta_minus = interior + 1;

        let mut edges = vec![
            Edge {
                tail: beta_plus,
                head: 1,
                colour: pick_colour(&mut rng),
            },
            Edge {
                tail: 1,
                head: beta_minus,
                colour: pick_colour(&mut rng),
            },
        ];
        // Later interiors hook onto any earlier vertex.
        for w in 2..=interior {
            let earlier: Vec<u32> = (0..=interior + 1)
                .filter(|&v| v < w || v == beta_minus)
                .collect();
            let partner = earlier[rng.gen_range(0..earlier.len())];
            let colour = pick_colour(&mut rng);
            if rng.gen_bool(0.5) {
                edges.push(Edge {
                    tail: w,
                    head: partner,
                    colour,
                });
            } else {
                edges.push(Edge {
                    tail: partner,
                    head: w,
                    colour,
                });
            }
        }
        // Extra edges: any pair except a planting shortcut or a loop.
        let extras = rng.gen_range(0..=params.max_extra_edges);
        for _ in 0..extras {
            for _attempt in 0..20 {
                let u = rng.gen_range(0..=interior + 1);
                let v = rng.gen_range(0..=interior + 1);
                let is_planting_pair = (u == beta_plus && v == beta_minus)
                    || (u == beta_minus && v == beta_plus);
                if u == v || is_planting_pair {
                    continue;
                }
                edges.push(Edge {
                    tail: u,
                    head: v,
                    colour: pick_colour(&mut rng),
                });
                break;
            }
        }

        rules.push(RuleGraph {
            colour: ColourId::new(colour).expect("rule colours start at 1"),
            vertex_names,
            beta_plus,
            beta_minus,
            edges,
        });
    }

    IgsSpec {
        colour_count: k,
        initial_colour: ColourId::new(1).expect("1 is a valid colour"),
        initial: None,
        rules,
    }
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

fn branch_label(assigned: Option<usize>) -> String {
    match assigned {
        Some(k) => format!("class{k}"),
        None => "suppressed".to_owned(),
    }
}

/// One row per level: branch label, `-ln(degree / max degree)`, and the natural
/// log of the count the branch owns at that level (total count on suppressed
/// levels). Exact integers and fit membership are embedded in the plot output.
pub fn levels_csv(levels: &ScaledLevels) -> String {
    let ln_delta = ln_biguint(&levels.delta);
    let mut out = String::from("branch,neg_log_l,log_count\n");
    for level in &levels.levels {
        let attributed = match level.assigned {
            Some(k) => &level.class_counts[k],
            None => &level.count,
        };
        out.push_str(&format!(
            "{},{:.6},{:.6}\n",
            branch_label(level.assigned),
            ln_delta - ln_biguint(&level.degree),
            ln_biguint(attributed),
        ));
    }
    out
}

/// One row per branch fit.
pub fn fits_csv(fits: &[BranchFit]) -> String {
    let mut out = String::from("branch,levels_total,levels_used,slope,intercept,r_squared,sparse\n");
    for fit in fits {
        match &fit.fit {
            Some(line) => out.push_str(&format!(
                "class{},{},{},{:.6},{:.6},{:.6},false\n",
                fit.class_index, fit.levels_total, fit.levels_used, line.slope, line.intercept, line.r_squared
            )),
            None => out.push_str(&format!(
                "class{},{},{},,,,true\n",
                fit.class_index, fit.levels_total, fit.levels_used
            )),
        }
    }
    out
}

const PALETTE: [&str; 6] = [
    "#2563eb", "#dc2626", "#16a34a", "#9333ea", "#d97706", "#0891b2",
];

/// Deterministic scatter plot of `ln(attributed count)` against
/// `ln(delta) - ln(degree)` with branch fit lines.
pub fn scatter_svg(levels: &ScaledLevels, fits: &[BranchFit]) -> String {
    let ln_delta = ln_biguint(&levels.delta);
    let mut used_degrees: Vec<std::collections::BTreeSet<BigUint>> =
        vec![std::collections::BTreeSet::new(); levels.class_count];
    for fit in fits {
        for (degree, _) in &fit.used {
            used_degrees[fit.class_index].insert(degree.clone());
        }
    }
    // (x, y, class) for every level; suppressed levels use the total count.
    let points: Vec<(f64, f64, Option<usize>)> = levels
        .levels
        .iter()
        .map(|level| {
            let attributed = match level.assigned {
                Some(k) => &level.class_counts[k],
                None => &level.count,
            };
            (
                ln_delta - ln_biguint(&level.degree),
                ln_biguint(attributed),
                level.assigned,
            )
        })
        .collect();

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, _) in &points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_min > x_max {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = (*hi - *lo).max(1e-9);
        *lo -= 0.05 * span;
        *hi += 0.05 * span;
    };
    pad(&mut x_min, &mut x_max);
    pad(&mut y_min, &mut y_max);

    let (width, height) = (720.0, 480.0);
    let (left, right, top, bottom) = (64.0, 24.0, 24.0, 48.0);
    let sx = |x: f64| left + (x - x_min) / (x_max - x_min) * (width - left - right);
    let sy = |y: f64| height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Embedded source data so the figure is self-describing: one comment row
    // per level with the exact integers behind the plotted logs.
    svg.push_str(&format!(
        "<!-- generation={} delta={} -->\n",
        levels.generation, levels.delta
    ));
    svg.push_str("<!-- data: branch,degree,count,attributed,neg_log_l,log_count,used_in_fit -->\n");
    for level in &levels.levels {
        let attributed = match level.assigned {
            Some(k) => &level.class_counts[k],
            None => &level.count,
        };
        let used = level
            .assigned
            .map(|k| used_degrees[k].contains(&level.degree))
            .unwrap_or(false);
        svg.push_str(&format!(
            "<!-- data: {},{},{},{},{:.6},{:.6},{} -->\n",
            branch_label(level.assigned),
            level.degree,
            level.count,
            attributed,
            ln_delta - ln_biguint(&level.degree),
            ln_biguint(attributed),
            used
        ));
    }
    for fit in fits {
        match &fit.fit {
            Some(line) => svg.push_str(&format!(
                "<!-- fit: class{} slope={:.6} intercept={:.6} r_squared={:.6} levels_used={} -->\n",
                fit.class_index, line.slope, line.intercept, line.r_squared, fit.levels_used
            )),
            None => svg.push_str(&format!(
                "<!-- fit: class{} sparse levels_used={} -->\n",
                fit.class_index, fit.levels_used
            )),
        }
    }

    // Axes with five ticks each.
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        height - bottom,
        width - right,
        height - bottom
    ));
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        height - bottom
    ));
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * i as f64 / 4.0;
        let fy = y_min + (y_max - y_min) * i as f64 / 4.0;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            sx(fx),
            height - bottom,
            sx(fx),
            height - bottom + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{:.1}</text>\n",
            sx(fx),
            height - bottom + 18.0,
            fx
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{left}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            left - 5.0,
            sy(fy),
            sy(fy)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{:.1}</text>\n",
            left - 8.0,
            sy(fy) + 4.0,
            fy
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">-ln(scaled level)</text>\n",
        left + (width - left - right) / 2.0,
        height - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">ln(count)</text>\n",
        top + (height - top - bottom) / 2.0,
        top + (height - top - bottom) / 2.0
    ));

    // Fit lines behind the points.
    for fit in fits {
        let Some(line) = &fit.fit else { continue };
        if fit.used.is_empty() {
            continue;
        }
        let x0 = ln_delta - ln_biguint(&fit.used[0].0);
        let x1 = ln_delta - ln_biguint(&fit.used[fit.used.len() - 1].0);
        let colour = PALETTE[fit.class_index % PALETTE.len()];
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-dasharray=\"6 3\"/>\n",
            sx(x0),
            sy(line.intercept + line.slope * x0),
            sx(x1),
            sy(line.intercept + line.slope * x1),
            colour
        ));
    }

    for &(x, y, assigned) in &points {
        match assigned {
            Some(k) => svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\" fill-opacity=\"0.85\"/>\n",
                sx(x),
                sy(y),
                PALETTE[k % PALETTE.len()]
            )),
            None => {
                let (cx, cy) = (sx(x), sy(y));
                svg.push_str(&format!(
                    "<path d=\"M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}\" stroke=\"#9ca3af\" stroke-width=\"1.5\"/>\n",
                    cx - 3.5, cy - 3.5, cx + 3.5, cy + 3.5, cx - 3.5, cy + 3.5, cx + 3.5, cy - 3.5
                ));
            }
        }
    }

    // Legend.
    let mut line_y = top + 14.0;
    for fit in fits {
        let colour = PALETTE[fit.class_index % PALETTE.len()];
        let label = match &fit.fit {
            Some(line) => format!(
                "class {}: slope {:.4} (r2 {:.4}, {} levels)",
                fit.class_index, line.slope, line.r_squared, fit.levels_used
            ),
            None => format!(
                "class {}: sparse ({} levels)",
                fit.class_index, fit.levels_used
            ),
        };
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\"/>\n",
            width - right - 240.0,
            line_y - 4.0,
            colour
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>\n",
            width - right - 230.0,
            line_y,
            label
        ));
        line_y += 16.0;
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" fill=\"#4b5563\">slopes shown positive: ln(count) regressed against -ln(level)</text>\n",
        width - right - 240.0,
        line_y
    ));

    svg.push_str("</svg>\n");
    svg
}
