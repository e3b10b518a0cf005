//! Extended-precision numerics for the hyperbolic splitting of a
//! Blaschke-deformed Arnold cat map.

pub mod error;
pub mod manifold;
pub mod map;
pub mod real;
pub mod regularity;
pub mod splitting;
pub mod verify;

pub use error::{Error, Result};
pub use map::{BlaschkeMap, ConeReport, Inverted, MapParams, TorusMap, TorusPoint};
pub use real::{mod1, normalize, torus_delta, Mat2, Precision, Real, Vec2};
pub use splitting::{
    expansion_rate, lyapunov_exponent_orbit, splitting_residual, stable_data, unstable_data,
    SplittingSample, DEFAULT_ORBIT_LEN,
};
pub use manifold::{
    eigen_directions_at_fixed_point, trace_manifold, unwrap_curve, Branch, FixedPointEigen,
    ManifoldCurve, ManifoldPoint, SeedSegment,
};
pub use regularity::{
    diff1, diff2, expansion_grid, grid_points, h_scan, h_scan_points, highlight_points, DiffRecord,
    Direction, GridSpec, OffsetMode, PointScan, ScanResult, ScanSettings, SlopeFit,
};
pub use verify::{verify, CheckResult, VerifyReport, VerifySettings};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/precision.md")]
    mod precision {}
    #[doc = include_str!("../../../book/src/map.md")]
    mod map {}
    #[doc = include_str!("../../../book/src/splitting.md")]
    mod splitting {}
    #[doc = include_str!("../../../book/src/manifolds.md")]
    mod manifolds {}
    #[doc = include_str!("../../../book/src/regularity.md")]
    mod regularity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
