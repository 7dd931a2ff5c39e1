//! Lévy triplets, Lévy measures and pathwise simulation.

mod jumpset;
mod measure;
mod path;

pub use jumpset::{Interval, JumpSet};
pub use measure::{Atom, FiniteDensity, InfiniteFamily, LevyMeasure};
pub use path::{
    count_jumps, evaluate_x, restrict_jumps, simulate_path, JumpRecord, LevyPath, LevyTriplet,
    PathRecord,
};
