//! Sampled checks for X-convex sets and functions.
//!
//! A set `M` is X-convex for a map `g` when `δ(r − t) + g(t)` stays in `M`
//! for all `r, t ∈ M` and `δ ∈ [0, 1]`; the function classes compare
//! `φ(δ(r − t) + g(t))` against the convex combination or the maximum of
//! `φ(r)` and `φ(t)`. Every positive verdict means "no counterexample on the
//! sample plan"; every negative verdict carries a witness that
//! [`verify_witness`] can re-check.
//!
//! ```
//! use xconvex::{classify, ConvexityClass, DomainSet, GMap, ScalarFn, SamplePlan, Setting, Status};
//!
//! let domain = DomainSet::closed_intervals(&[(1.0, 2.0), (3.0, f64::INFINITY)]).unwrap();
//! let setting = Setting::new(domain, GMap::parse(&["r + 3"], &[]).unwrap())
//!     .unwrap()
//!     .with_plan(SamplePlan { grid_per_axis: 21, delta_grid: 21, ..SamplePlan::default() });
//! let phi = ScalarFn::parse("1.5", 1, &[]).unwrap();
//! let c = classify(&phi, &setting).unwrap();
//! assert_eq!(c.status(ConvexityClass::XConvex), Status::NoCounterexampleFound);
//! ```

pub mod error;
pub mod geometry;
pub mod lang;
pub mod checker;
pub mod harness;
pub mod algebra;
pub mod sets;
pub mod optimize;
pub mod cli;

pub use checker::{
    check_concave_variants, check_quasi_x_convex, check_semistrictly_quasi_x_convex, check_strictly_quasi_x_convex,
    check_strictly_x_convex, check_x_convex, check_x_convex_set, classify, combination_point, evaluate_triple,
    refine_witness, verify_witness, Checker, ClassVerdict, Classification, ConvexityClass, EscapePolicy, Setting,
    Status, Tolerances, Witness, WitnessKind,
};
pub use error::{Error, Result};
pub use geometry::{DomainBox, DomainSet, Interval, Point, SamplePlan};
pub use harness::{HarnessReport, HarnessStatus, TheoremId};
pub use lang::{catalog, parse, GMap, ScalarFn};
