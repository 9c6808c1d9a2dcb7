//! Planning under ambiguity with belief functions.
//!
//! * [`belief`]: belief functions, interval-to-mass conversion, Choquet
//!   expectations and the accuracy/confidence sample relation.
//! * [`amdp`]: generative-model contract and empirical transition models.
//! * [`aags`]: ambiguity attitude graph search.
//! * [`uct`]: UCT baseline.
//! * [`envs`]: grid, sailing and tunnel benchmark worlds.

pub mod aags;
pub mod amdp;
pub mod belief;
pub mod planner;
pub mod uct;
pub mod envs;
