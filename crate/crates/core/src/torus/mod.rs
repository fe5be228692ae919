//! Base geometry: a conformally flat torus in global isothermal coordinates.

pub mod frame;
pub mod geodesic;
pub mod grid;
pub mod interp;
pub mod metric;

pub use frame::{frame_apply, FrameField, SampledField};
pub use geodesic::{integrate_geodesic, unit_speed_residual, GeodesicPath, SMPoint};
pub use grid::{Grid, Symbol};
pub use interp::{PeriodicInterpolant, TrigEvaluator};
pub use metric::{build_metric, Harmonic, LambdaSpec, TorusMetric};
