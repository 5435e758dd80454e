//! P2/P0 (and P1/P0) finite elements on triangulated polygons.

mod infsup;
mod mesh;
mod pressure;
mod projection;
mod space;
mod stress;
mod study;

pub use infsup::{compute_infsup, l2_infsup, l2_infsup_oracle, l2_infsup_with_mode, orlicz_infsup_ascent, AscentOptions, InfSupMethod, InfSupReport};
pub use mesh::Triangulation;
pub use pressure::{assemble_pressure_system, reconstruct_pressure, PressureSolution, PressureSystem, SolveMode, RANK_TOLERANCE};
pub use space::{FESpacePair, Mat2, PairLabel};
pub use projection::{check_orlicz_projection_stability, divergence_defect, local_stability, BubbleTrigField, FeField, FnField, Projection, VectorField};
pub use stress::{stress_eval, StressKind, StressLaw};
pub use study::{band_deviation, exact_recovery, infsup_study, pressure_error_study, projection_study, square_levels, InfSupRow, InfSupStudy, PressureRow, PressureStudy, ProjectionRow, ProjectionStudy};
