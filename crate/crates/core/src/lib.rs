//! Truck and multi-drone routing toolkit.

pub mod bounds;
pub mod forge;
pub mod gantt;
pub mod heuristics;
pub mod milp;
pub mod model;
pub mod schedule;
pub mod solver;
pub mod sortie;
pub mod transform;

pub use model::{build_instance, Instance, InstanceFile, Matrix, ModelError};
pub use schedule::{evaluate, validate, DroneOperation, Schedule, Solution, SolutionFile};
pub use solver::{solve, Mode, SolveConfig, SolveResult, Status};
pub use sortie::{enumerate_sorties, Sortie, SortieCatalog};
