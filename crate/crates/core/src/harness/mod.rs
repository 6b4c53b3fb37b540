//! Instance files, the built-in catalog, random instances and reports.

pub mod catalog;
pub mod io;
pub mod random;
pub mod report;

pub use catalog::{catalog, CATALOG_NAMES};
pub use io::{load_instance, parse_instance, save_instance, InstanceFile};
pub use random::{random_instance, RandomSpec};
pub use report::{reproduce, run_report, Reproduction, RunReport};
