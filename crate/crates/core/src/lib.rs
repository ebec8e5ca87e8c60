pub mod jsonl;
pub mod latex;
pub mod markup;
pub mod miner;
pub mod normalize;
pub mod edit;
pub mod render;
pub mod visual;
pub mod metrics;
pub mod service;
pub mod cli;
