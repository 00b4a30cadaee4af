pub mod error;
pub mod geometry;
pub mod mapping;
pub mod model;
pub mod nudging;
pub mod reality;

pub use error::{EngineError, Result};
pub mod autolayout;
pub mod layout;
pub mod sync;
pub mod persist;
pub mod command;
pub mod engine;
pub mod bench;
pub mod service;
pub mod cli;
