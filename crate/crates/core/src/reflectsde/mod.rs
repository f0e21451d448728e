//! Skorokhod maps and Euler simulation of reflected particle systems:
//! two-level processes, Gelfand–Tsetlin patterns and edge systems.

mod rng;
mod sim;
mod skorokhod;
mod systems;

pub use rng::RngStreams;
pub use sim::{simulate, EdgeSide, LevelPath, LevelSpec, PathBundle, Record, Relation, SimConfig, StopEvent, System};
pub use skorokhod::{project, skorokhod_map, SkorokhodSolution, Step};
pub use systems::{
    edge_system, gt_ladder, run_paths, sample_fiber, simulate_edge, simulate_gt, simulate_two_level, yw_check, GtInit, GtSim,
    TwoLevelInit, TwoLevelSim, YwStatus,
};
