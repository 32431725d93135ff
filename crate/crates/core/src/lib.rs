//! Analysis toolkit for edge iterated graph systems.
//!
//! An edge iterated graph system replaces every coloured edge of a directed
//! multigraph by a copy of a rule graph of the same colour, gluing the rule's
//! two planting vertices onto the edge's endpoints, and repeats. The limit
//! objects carry a fractal (Hausdorff) spectrum and a degree spectrum, both of
//! which are computable from three matrices read off the rules: the mass
//! matrix of per-colour edge counts, the degree matrix of planting-vertex
//! incidence counts, and the family of choice matrices built from planted
//! paths. This crate computes those spectra exactly where possible and
//! cross-validates every matrix-side quantity against brute-force simulation
//! of the finite iterates.
//!
//! Module map:
//! - [`model`]: system description, file format, validation, count vectors.
//! - [`engine`]: exact substitution of finite iterates and measurements on them.
//! - [`matrix`]: dense non-negative integer matrices and exact big-integer rows.
//! - [`spectral`]: condensation into irreducible blocks, spectral radii, growth laws.
//! - [`distance`]: planted-distance growth, stability of minimizing choices,
//!   Hausdorff dimensions and the fractal spectrum.
//! - [`degree`]: birth types, dominance, surviving degree classes and the
//!   degree spectrum.
//! - [`lab`]: scaled degree levels, branch regression, growth fits, random
//!   systems, CSV/SVG export.

#![forbid(unsafe_code)]

pub mod degree;
pub mod distance;
pub mod engine;
pub mod lab;
pub mod matrix;
pub mod model;
pub mod spectral;
pub mod tolerances;

pub use degree::{
    birth_types, combinatorial_histogram, degree_analysis, BirthType, CombinatorialHistogram,
    DegreeAnalysis, DegreeClass, DegreeError, HistogramLevel,
};
pub use distance::{
    bellman_run, fractal_analysis, ColourDistance, DistanceError, FractalAnalysis,
    StabilityReport,
};
pub use engine::{
    initial_graph, iterate, EngineError, GeneratedGraph, Origin, VertexRecord,
};
pub use lab::{
    branch_regression, distance_series, edge_series, fits_csv, geometric_fit, least_squares,
    levels_csv, random_spec, scaled_levels, scatter_svg, BranchFit, GrowthFit, LineFit,
    RandomSpecParams, ScaledLevel, ScaledLevels,
};
pub use matrix::IntMatrix;
pub use model::{
    chi, kappa, parse_spec, serialize_spec, validate, ChiVector, ColourId, Edge, IgsSpec,
    InitialGraph, KappaVector, ParseError, RuleGraph, ValidationErrors, Violation,
};
pub use spectral::{
    assemble_choice, block_refinement_defects, choice_family, condensation, degree_matrix,
    for_each_choice, growth_descriptor, index_growth, mass_matrix, project_position, Block,
    ChoiceFamily, FrobeniusForm, GrowthDescriptor, GrowthLaw, RefinementDefect, SpectralError,
};
