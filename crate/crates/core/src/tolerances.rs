//! Every numeric tolerance used by the analysis, in one place.
//!
//! Each constant documents what it guards and why the value is safe for the
//! quantities involved. Integer data is exact everywhere; tolerances only
//! enter where a spectral radius, a logarithm, or a numeric limit does.

/// Relative width of the Collatz-Wielandt bracket at which power iteration
/// for a spectral radius stops. Block sides are at most twice the colour
/// count and entries are small integer counts, so the iteration reaches this
/// bracket in well under the iteration cap; the returned midpoint is then
/// accurate to better than 1e-12 relative, three orders tighter than any
/// comparison made with it.
pub const RHO_BRACKET_REL_TOL: f64 = 1e-13;

/// Iteration cap for the power iteration. The shifted matrix is primitive,
/// so convergence is geometric; the cap exists to turn a logic error into a
/// loud failure instead of a hang.
pub const RHO_ITER_CAP: u32 = 200_000;

/// Two spectral radii (or growth rates) within this relative distance are
/// treated as equal: when deciding which blocks attain a maximum, when
/// deduplicating spectra, and when comparing dimensions. Radii are either
/// exact small integers or power-iteration results good to ~1e-12, so 1e-9
/// separates genuinely distinct algebraic values while absorbing float noise.
pub const RATE_EQ_REL_TOL: f64 = 1e-9;

/// Relative step size at which the numeric limit of a growth constant
/// (`norm / (n^p rate^n)`) is accepted as converged.
pub const CONSTANT_REL_TOL: f64 = 1e-9;

/// Iteration cap for numeric growth constants. The slowest contamination in
/// any system here decays like `(rate'/rate)^n` with a rate gap of at least
/// a factor 3/2, which reaches 1e-9 long before 400 steps.
pub const CONSTANT_ITER_CAP: u32 = 400;

/// Consecutive exact value ratios of the minimizing distance recursion must
/// stay within this relative distance of each other for
/// [`BELLMAN_STABLE_WINDOW`] steps before the shared value is reported as
/// the growth rate.
pub const BELLMAN_RATIO_REL_TOL: f64 = 1e-9;

/// Number of consecutive stable ratios required from the distance recursion.
pub const BELLMAN_STABLE_WINDOW: u32 = 10;

/// Iteration cap for the distance recursion. Values stay exact integers, so
/// the only cost of a high cap is big-integer arithmetic on a few hundred
/// digits.
pub const BELLMAN_ITER_CAP: u32 = 400;

/// Residual bound certifying the minimizing fixed-point equation: with the
/// eigenvector normalized to unit maximum, the worst row defect of
/// `min-product(v) = rate * v` must fall below this.
pub const FIXED_POINT_RESIDUAL_TOL: f64 = 1e-9;

/// Two degree-class amplitudes belong to the same lattice class when the
/// base-rate logarithm of their ratio is within this distance of an integer.
/// Amplitudes are ratios of numeric constants good to ~1e-9, so a true
/// lattice relation lands within 1e-7 even after division; 1e-6 keeps a
/// safety factor of ten.
pub const CLASS_LATTICE_TOL: f64 = 1e-6;

/// Lattice distances between [`CLASS_LATTICE_TOL`] and this bound are
/// refused as ambiguous instead of being silently classified: a distance in
/// this band is too large to be float noise and too small to be a clear
/// separation, which indicates the constants were not computed precisely
/// enough to classify at all.
pub const CLASS_DEAD_ZONE: f64 = 1e-3;

/// Relative tolerance of the geometric-run test in branch regression:
/// consecutive level degrees whose ratio deviates from the degree growth
/// rate by more than this fraction mark the start of the unconverged tail.
pub const BRANCH_RATIO_TOL: f64 = 0.10;

/// Minimum number of levels for a non-sparse branch fit. Three points give
/// one degree of freedom for the residual, the least that still produces a
/// meaningful r-squared.
pub const BRANCH_MIN_POINTS: usize = 3;
