//! Benchmark harness: the two random instance families, reference optima
//! and experiment runs writing CSV traces plus a JSON summary.
//!
//! Trace CSVs have the header `solver,seed,iter,cost_units,wall_ms,f_value,gap`
//! with `gap = max(f_value − f*, 1e-15)`. `f*` is the reference value lowered
//! to the best objective any run of the experiment recorded.

mod experiment;
mod generate;
mod io;
mod reference;

pub use experiment::{
    csv_name, read_trace_csv, run_experiment, run_sweep, run_with_reference, DecadeEntry,
    ExperimentSpec, FStar, Mode, RunSummary, Summary, TraceRow, GAP_FLOOR, SUMMARY_FILE,
};
pub use generate::{gen_nonuniform, gen_uniform, simplex_b};
pub use io::{
    read_instance, read_vector, write_instance, write_vector, InstanceMeta, B_FILE, MATRIX_FILE,
    META_FILE,
};
pub use reference::{reference_solution, ReferenceSolution, REFERENCE_ENGINE};
