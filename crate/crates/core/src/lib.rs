pub mod config;
pub mod dataset;
pub mod detectors;
pub mod drfm;
pub mod flow;
pub mod harness;
pub mod fsutil;
pub mod linalg;
pub mod scenario;
pub mod streams;
