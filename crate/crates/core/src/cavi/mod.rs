//! Coordinate-ascent variational inference engine.

pub mod config;
pub mod fit;
pub mod objective;
pub mod updates;
pub mod walpha;

pub use config::{FitConfig, FitDiagnostics, Mode, Termination};
pub use fit::{fit, fit_with_observer, sweep_once, SweepInfo};
pub use objective::surrogate_objective;
pub use walpha::{WeightShapeFactor, WeightShapeMoments};
