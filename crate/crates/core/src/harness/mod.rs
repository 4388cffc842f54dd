//! Benchmark problems, convergence studies, output formats and the
//! property suite used by the command-line tool.

pub mod config;
pub mod output;
pub mod props;
pub mod reference;
pub mod registry;
pub mod study;

pub use config::RunConfig;
pub use output::{from_csv, to_csv, to_vtk, write_csv, write_vtk};
pub use props::{run_properties, PropertyResult};
pub use reference::{build_reference, NestedMap, ReferenceErrorObserver, ReferenceSolution};
pub use registry::{lookup, registry, PROBLEM_NAMES};
pub use study::{run_study, solve, GridRun, SchemeStudy, SolveOutcome, StudyOptions};
