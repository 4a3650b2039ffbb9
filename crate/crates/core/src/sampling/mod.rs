//! Random generators: Hit-and-Run over compatible capacities, interval
//! evaluation matrices and common scales.

pub mod evaluations;
pub mod polytope;

pub use evaluations::{
    assign_scale, distinct_levels, distinct_uniform, sample_common_scale, sample_eval_matrix, sample_scale_column,
    CommonScale, Direction, EvalSampling, Interval, IntervalMatrix, ScaleColumn,
};
pub use polytope::{freeze_epsilon, seed_point, HitAndRun, Polytope, SeedPoint};
