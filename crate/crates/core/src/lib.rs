pub mod cli;
pub mod export;
pub mod models;
pub mod net;
pub mod pnml;
pub mod reachability;
pub mod simulate;
