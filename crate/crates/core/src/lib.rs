//! Graph coloring with qudit product states.
//!
//! Every node of the graph is a real unit vector over `c` colors,
//! parameterized by hyperspherical angles. Two drivers minimize a smooth
//! surrogate of the Potts energy over those angles with Adam:
//!
//! * **QdLQA** anneals from the ground state of `-Lx` towards the coloring
//!   cost, `E(t) = (1 - t) E_I + t (E_F + E_W)`.
//! * **QdGD** starts from random states and descends `E_F + E_W` directly.
//!
//! At every step the most probable color of each node gives a classical
//! coloring; the best one seen is the result of a run.

pub mod energy;
pub mod gradient;
pub mod graph;
pub mod harness;
pub mod optimizer;
pub mod solver;
pub mod state;

pub use energy::{extract_coloring, potts_energy, ColorAssignment, CostParams};
pub use graph::{load_graph, FixStrategy, Graph, GraphError, GraphFormat};
pub use harness::{run_batch, sweep_colors, BatchOptions, BatchStats, SweepResult};
pub use solver::{AlphaSchedule, Hyperparameters, Method, RunRecord, RunSpec, SolverError};
