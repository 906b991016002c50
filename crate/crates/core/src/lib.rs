pub mod expr;
pub mod lang;
pub mod semantics;
pub mod planner;
pub mod coordination;
pub mod supervisor;
pub mod agent;
pub mod engine;
pub mod load;
pub mod trace;
pub mod render;
