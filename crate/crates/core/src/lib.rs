//! Combinatorial search and surgery calculus for toroidal Dehn fillings at
//! distance five.

pub mod canon;
pub mod cases;
pub mod fatgraph;
pub mod filters;
pub mod graph;
pub mod identify;
pub mod pair;
pub mod rules;
pub mod search;
pub mod slope;
pub mod surgery;
pub mod template;
pub mod trace;
pub mod tree;
pub mod weights;
