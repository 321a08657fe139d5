//! Real trees built from piecewise-linear functions, exact tree embeddings,
//! and numeric certification that those trees sit inside the hyperbolic plane
//! as asymptotic subcones.
//!
//! The central space is the set of continuous functions `f : [0, rho] -> R`
//! with `f(0) = 0`, metrized by the segregation distance
//!
//! ```text
//! d(f1, f2) = (rho1 - s) + (rho2 - s),
//! s = sup { t : f1 and f2 agree on [0, t) }
//! ```
//!
//! i.e. the distance walked back along `f1` to the last common point plus the
//! distance walked forward along `f2`. Restricted to piecewise-linear
//! functions with rational breakpoints everything is exact: [`PlFunction`]
//! keeps a normalized breakpoint list over an arbitrary ordered field, so
//! equality of functions is equality of representations and segregation
//! moments come out as rationals, not approximations.
//!
//! What lives where:
//!
//! * [`tree`]: the function space itself. Distances, segregation moments,
//!   geodesics, the four-point condition, plus the discrete variant
//!   ([`DiscreteFunction`]) whose points are finite assignments on `[0,
//!   rho)`.
//! * [`embedding`]: isometric embedding of finite tree metrics into the
//!   function space (brushing), and the piecewise-linear embedding of the
//!   discrete space into the continuous one.
//! * [`homogeneity`]: an isometry of the function space that moves any
//!   chosen base point onto the ray of constant-zero functions, witnessing
//!   homogeneity of the space.
//! * [`hyperbolic`]: Poincare-disk distances in polar coordinates, a
//!   log-domain evaluation path that survives `rho` in the thousands, and
//!   the witness points that realize discrete trees as rescaled limits of
//!   hyperbolic configurations.
//! * [`verification`]: staged certification runs. Sample plans, epsilon
//!   schedules, error envelopes, Cauchy chains and their completion
//!   witnesses.
//! * [`io`]: JSON and CSV interchange with rationals serialized as reduced
//!   `p/q` strings.
//!
//! Scalars default to [`Rational`] (arbitrary-precision `BigRational`); the
//! geometric core is generic over [`Scalar`] so `f64` works where exactness
//! is not required.

pub mod embedding;
pub mod homogeneity;
pub mod hyperbolic;
pub mod io;
pub mod logdomain;
pub mod sampling;
pub mod scalar;
pub mod selftest;
pub mod tree;
pub mod verification;

pub use embedding::{
    branch_abscissa, brush, embed_discrete, verify_embedding, MetricError, SlopeSchedule,
    TreeMetric,
};
pub use homogeneity::{g_function, g_slope, homogenize, homogenize_pairwise_check};
pub use io::{
    brush_report_json, completion_csv, convergence_csv, discrete_from_json, discrete_to_json,
    float_cell, format_rational, parse_polar, parse_rational, pl_from_json, pl_to_json, stage_csv,
    tree_metric_from_csv, tree_metric_to_csv, ParseError,
};
pub use hyperbolic::{
    asymptotic_error, disk_distance, polar_distance, polar_distance_logdomain,
    polar_distance_logdomain_with_gap, rho_to_r, witness_angle_gap, witness_point,
    ConvergenceReport, ConvergenceRow, EpsilonSchedule, HyperbolicError, HyperbolicTerms,
    PolarPoint, DIRECT_RHO_SUM_LIMIT,
};
pub use logdomain::SignedLog;
pub use scalar::Scalar;
pub use tree::{
    four_point_defect, geodesic_point, DiscreteFunction, FunctionError, Knot, PlFunction,
    SegRelation, Segregation,
};
pub use verification::{
    completion_stages, completion_witness, discretize, make_sample_plan, run_all_stages,
    run_stage, CauchyChain, CompletionPair, CompletionRecord, PairOutcome, PairSample,
    SamplePlan, StageError, StageRecord,
};

/// Exact rational scalar used by default throughout the crate.
pub type Rational = num_rational::BigRational;

/// Shorthand for building a [`Rational`] from small integers.
///
/// Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Nearest f64 to an exact rational, for handing exact results to the
/// floating-point layers.
pub(crate) fn rat_f64(x: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rat_reduces() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(-3, -6), rat(1, 2));
    }

    #[test]
    #[should_panic]
    fn rat_rejects_zero_denominator() {
        let _ = rat(1, 0);
    }

    #[test]
    fn rational_display_is_reduced_fraction() {
        // The `p/q` interchange format relies on Display printing a bare
        // integer when the denominator is 1 and `p/q` otherwise.
        assert_eq!(rat(9, 8).to_string(), "9/8");
        assert_eq!(rat(4, 2).to_string(), "2");
        assert_eq!(rat(-1, 3).to_string(), "-1/3");
        assert_eq!(rat(0, 5).to_string(), "0");
    }
}
