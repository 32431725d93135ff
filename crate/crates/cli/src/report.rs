//! Typed, byte-deterministic analysis report.
//!
//! The report is the single machine-readable artifact of `analyze` and
//! `simulate`: schema-versioned, self-identifying (input digest + tool
//! version), with every section either fully populated or replaced by an
//! error object. Serialization is plain `serde_json` with struct field
//! order, so identical inputs and options produce identical bytes.

use eigs_core::degree::TypeOrigin;
use eigs_core::distance::StabilityFailure;
use eigs_core::{
    BranchFit, ColourDistance, DegreeAnalysis, FractalAnalysis, FrobeniusForm, GrowthFit, IgsSpec,
    IntMatrix, ScaledLevels,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Bumped whenever a field changes meaning, moves, or disappears.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool: Tool,
    pub input: Input,
    pub validation: Validation,
    pub matrices: Matrices,
    pub distance: Section<Distance>,
    pub degree: Section<Degree>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<Empirical>,
    /// Aggregated assumption flags from every section; annotations, never
    /// gates.
    pub flags: Vec<String>,
}

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Serialize)]
pub struct Input {
    /// File name only, so the report does not depend on where the file sat.
    pub file: String,
    /// SHA-256 of the raw input bytes.
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Validation {
    pub valid: bool,
    pub violations: Vec<String>,
}

/// A section either carries its payload or a single error string.
#[derive(Serialize)]
#[serde(untagged)]
pub enum Section<T: Serialize> {
    Ok(T),
    Err { error: String },
}

impl<T: Serialize> Section<T> {
    pub fn is_err(&self) -> bool {
        matches!(self, Section::Err { .. })
    }
}

#[derive(Serialize)]
pub struct Matrices {
    pub mass: MatrixDump,
    pub incidence: MatrixDump,
}

#[derive(Serialize)]
pub struct MatrixDump {
    pub rows: Vec<Vec<u64>>,
    pub blocks: BlocksDump,
}

#[derive(Serialize)]
pub struct BlocksDump {
    pub count: usize,
    pub blocks: Vec<BlockDump>,
}

#[derive(Serialize)]
pub struct BlockDump {
    /// 1-based colour ids for mass-side matrices; 1-based incidence
    /// positions (2i-1 outgoing, 2i incoming of colour i) for the incidence
    /// matrix.
    pub members: Vec<usize>,
    pub rho: f64,
    pub cyclic: bool,
    pub period: u64,
    pub primitive: bool,
}

#[derive(Serialize)]
pub struct Distance {
    pub per_colour: Vec<ColourReport>,
    pub spectrum: Vec<f64>,
    pub surviving_rates: Vec<f64>,
    pub multifractal: bool,
    pub bddm: bool,
}

#[derive(Serialize)]
pub struct ColourReport {
    pub colour: u16,
    #[serde(rename = "lambda_D")]
    pub lambda_d: f64,
    pub recursion: Recursion,
    /// 1-based colours the choice family reaches from this one.
    pub trim: Vec<u16>,
    pub minimizers: u64,
    pub stable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(rename = "I_dist")]
    pub i_dist: Vec<u16>,
    #[serde(rename = "M_dist")]
    pub m_dist: BlocksDump,
    #[serde(rename = "lambda_M_surv")]
    pub lambda_m_surv: f64,
    #[serde(rename = "dim_H")]
    pub dim_h: f64,
}

#[derive(Serialize)]
pub struct Recursion {
    pub iterations: u32,
    pub converged: bool,
}

#[derive(Serialize)]
pub struct Certificate {
    pub choice: Vec<usize>,
    pub rows: Vec<Vec<u64>>,
    pub fixed_point: Vec<f64>,
    pub residual: f64,
}

#[derive(Serialize)]
pub struct Degree {
    pub applicable: bool,
    #[serde(rename = "lambda_U")]
    pub lambda_u: f64,
    pub tau_deg: usize,
    #[serde(rename = "C_deg")]
    pub c_deg: f64,
    pub types: Vec<TypeReport>,
    pub classes: Vec<ClassReport>,
    pub dimension: Option<f64>,
    pub scale_free: bool,
    pub bedm: bool,
    pub multiscale_free: bool,
    pub spectrum: Vec<f64>,
}

#[derive(Serialize)]
pub struct TypeReport {
    pub kappa: Vec<u64>,
    pub origins: Vec<String>,
    pub initial_count: u64,
    pub interior_count: Vec<u64>,
    pub mu: u32,
    pub lambda: f64,
    pub tau: usize,
    pub c_deg: f64,
    pub c_converged: bool,
    pub dominant: bool,
    pub surviving: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Serialize)]
pub struct ClassReport {
    /// Indices into `types`.
    pub members: Vec<usize>,
    pub alpha: f64,
    pub eff_rate: f64,
    /// Number of rate-attaining blocks behind the effective growth: the
    /// polynomial factor is `age^(q-1)`.
    pub q: usize,
    pub exponent: f64,
}

#[derive(Serialize)]
pub struct Empirical {
    pub generation: u32,
    /// Exact edge count of the generation, decimal.
    pub edges: String,
    /// Exact maximum degree of the generation, decimal.
    pub delta: String,
    pub levels: Vec<LevelReport>,
    pub fits: Vec<FitReport>,
    pub distance_fit: GrowthReport,
    pub edge_fit: GrowthReport,
}

#[derive(Serialize)]
pub struct LevelReport {
    pub branch: String,
    pub degree: String,
    pub count: String,
    pub attributed: String,
    pub neg_log_l: f64,
    pub log_count: f64,
}

#[derive(Serialize)]
pub struct FitReport {
    pub branch: String,
    pub levels_total: usize,
    pub levels_used: usize,
    pub sparse: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
}

#[derive(Serialize)]
pub struct GrowthReport {
    pub points: usize,
    pub slope: f64,
    pub rate: f64,
    /// Matrix-side rate the fit is compared against.
    pub reference: f64,
    /// `|rate - reference| / reference`.
    pub rel_gap: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

fn blocks_dump(form: &FrobeniusForm, relabel: impl Fn(usize) -> usize) -> BlocksDump {
    BlocksDump {
        count: form.block_count(),
        blocks: form
            .blocks
            .iter()
            .map(|b| BlockDump {
                members: b.members.iter().map(|&m| relabel(m)).collect(),
                rho: b.rho,
                cyclic: b.has_cycle,
                period: b.period,
                primitive: b.primitive,
            })
            .collect(),
    }
}

fn matrix_rows(m: &IntMatrix) -> Vec<Vec<u64>> {
    m.rows().map(|r| r.to_vec()).collect()
}

/// Plain-text dump: one row per line, space-separated integers.
pub fn matrix_text(m: &IntMatrix) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn matrices_section(
    mass: &IntMatrix,
    mass_form: &FrobeniusForm,
    incidence: &IntMatrix,
    incidence_form: &FrobeniusForm,
) -> Matrices {
    Matrices {
        mass: MatrixDump {
            rows: matrix_rows(mass),
            blocks: blocks_dump(mass_form, |i| i + 1),
        },
        incidence: MatrixDump {
            rows: matrix_rows(incidence),
            blocks: blocks_dump(incidence_form, |a| a + 1),
        },
    }
}

fn colour_report(c: &ColourDistance, mass: &IntMatrix) -> ColourReport {
    let restricted = mass.restrict(&c.i_dist);
    let restricted_form = eigs_core::condensation(&restricted);
    ColourReport {
        colour: c.colour.get(),
        lambda_d: c.lambda,
        recursion: Recursion {
            iterations: c.bellman.iterations,
            converged: c.bellman.converged,
        },
        trim: c.trim.iter().map(|&i| i as u16 + 1).collect(),
        minimizers: c.stability.minimizer_count,
        stable: c.stability.stable,
        failure: c.stability.failure.map(|f| match f {
            StabilityFailure::NoPrimitiveMinimizer => {
                "no minimizing choice is primitive with full reach".to_owned()
            }
            StabilityFailure::ReplacementBreaks { colour } => format!(
                "single-row replacement at colour {} breaks primitivity",
                c.trim[colour] + 1
            ),
        }),
        certificate: c.stability.certificate.as_ref().map(|cert| Certificate {
            choice: cert.choice.clone(),
            rows: cert.rows.iter().map(|r| r.0.clone()).collect(),
            fixed_point: cert.fixed_point.clone(),
            residual: cert.residual,
        }),
        i_dist: c.i_dist.iter().map(|&i| i as u16 + 1).collect(),
        m_dist: blocks_dump(&restricted_form, |i| c.i_dist[i] + 1),
        lambda_m_surv: c.lambda_surv,
        dim_h: c.dim_h,
    }
}

pub fn distance_section(fractal: &FractalAnalysis, mass: &IntMatrix) -> Distance {
    Distance {
        per_colour: fractal
            .per_colour
            .iter()
            .map(|c| colour_report(c, mass))
            .collect(),
        spectrum: fractal.spectrum.clone(),
        surviving_rates: fractal.surviving_rates.clone(),
        multifractal: fractal.multifractal,
        bddm: fractal.bddm,
    }
}

fn origin_label(spec: &IgsSpec, origin: &TypeOrigin) -> String {
    match origin {
        TypeOrigin::Initial { vertex } => format!(
            "initial:{}",
            spec.effective_initial().vertex_names[*vertex as usize]
        ),
        TypeOrigin::Interior { rule, vertex } => {
            format!("rule{}:{}", rule.get(), spec.rule(*rule).name(*vertex))
        }
    }
}

pub fn degree_section(spec: &IgsSpec, deg: &DegreeAnalysis) -> Degree {
    Degree {
        applicable: deg.applicable,
        lambda_u: deg.lambda_u,
        tau_deg: deg.tau_deg,
        c_deg: deg.c_deg_max,
        types: deg
            .types
            .iter()
            .map(|t| TypeReport {
                kappa: t.kappa.0.clone(),
                origins: t.origins.iter().map(|o| origin_label(spec, o)).collect(),
                initial_count: t.initial_count,
                interior_count: t.interior_count.clone(),
                mu: t.mu,
                lambda: t.lambda,
                tau: t.tau,
                c_deg: t.c_deg,
                c_converged: t.c_converged,
                dominant: t.dominant,
                surviving: t.surviving,
                alpha: t.alpha,
            })
            .collect(),
        classes: deg
            .classes
            .iter()
            .map(|c| ClassReport {
                members: c.members.clone(),
                alpha: c.alpha,
                eff_rate: c.eff_law.rate,
                q: c.eff_law.poly_degree + 1,
                exponent: c.dimension_exponent,
            })
            .collect(),
        dimension: deg.dimension,
        scale_free: deg.scale_free,
        bedm: deg.bedm,
        multiscale_free: deg.multiscale_free,
        spectrum: deg.spectrum.clone(),
    }
}

pub fn empirical_section(
    levels: &ScaledLevels,
    fits: &[BranchFit],
    edges: &num_bigint::BigUint,
    distance_fit: GrowthReport,
    edge_fit: GrowthReport,
) -> Empirical {
    let ln_delta = eigs_core::matrix::ln_biguint(&levels.delta);
    Empirical {
        generation: levels.generation,
        edges: edges.to_string(),
        delta: levels.delta.to_string(),
        levels: levels
            .levels
            .iter()
            .map(|l| {
                let attributed = match l.assigned {
                    Some(k) => &l.class_counts[k],
                    None => &l.count,
                };
                LevelReport {
                    branch: match l.assigned {
                        Some(k) => format!("class{k}"),
                        None => "suppressed".to_owned(),
                    },
                    degree: l.degree.to_string(),
                    count: l.count.to_string(),
                    attributed: attributed.to_string(),
                    neg_log_l: ln_delta - eigs_core::matrix::ln_biguint(&l.degree),
                    log_count: eigs_core::matrix::ln_biguint(attributed),
                }
            })
            .collect(),
        fits: fits
            .iter()
            .map(|f| FitReport {
                branch: format!("class{}", f.class_index),
                levels_total: f.levels_total,
                levels_used: f.levels_used,
                sparse: f.fit.is_none(),
                slope: f.fit.map(|l| l.slope),
                intercept: f.fit.map(|l| l.intercept),
                r_squared: f.fit.map(|l| l.r_squared),
            })
            .collect(),
        distance_fit,
        edge_fit,
    }
}

pub fn growth_report(points: usize, fit: &GrowthFit, reference: f64) -> GrowthReport {
    GrowthReport {
        points,
        slope: fit.fit.slope,
        rate: fit.rate,
        reference,
        rel_gap: (fit.rate - reference).abs() / reference,
    }
}

/// Assumption flags gathered from both sections; empty means every formal
/// hypothesis held.
pub fn collect_flags(
    fractal: Option<&FractalAnalysis>,
    degree: Option<&DegreeAnalysis>,
) -> Vec<String> {
    let mut flags = Vec::new();
    if let Some(fractal) = fractal {
        for c in &fractal.per_colour {
            if !c.bellman.converged {
                flags.push(format!(
                    "colour {}: distance recursion ratios oscillate; rate is a window mean",
                    c.colour.get()
                ));
            }
            if !c.stability.stable {
                flags.push(format!(
                    "colour {}: local primitive stability violated ({} minimizers); \
                     rates reported past the violated hypothesis",
                    c.colour.get(),
                    c.stability.minimizer_count
                ));
            }
        }
    }
    if let Some(deg) = degree {
        if !deg.applicable {
            flags.push(
                "degree growth rate is 1: degrees stay bounded and the degree-side \
                 quantities past the types are vacuous"
                    .to_owned(),
            );
        }
        for t in &deg.types {
            if !t.c_converged {
                flags.push(format!(
                    "birth type {:?}: growth constant did not converge",
                    t.kappa.0
                ));
            }
        }
    }
    flags
}

/// Pretty JSON with a trailing newline; the byte-deterministic form.
pub fn render(report: &Report) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

pub fn tool() -> Tool {
    Tool {
        name: "eigs",
        version: env!("CARGO_PKG_VERSION"),
    }
}
