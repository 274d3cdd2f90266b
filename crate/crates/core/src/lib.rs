mod binio;
pub mod cli;
pub mod data;
pub mod error;
pub mod memory;
pub mod metrics;
pub mod nn;
pub mod seeding;
pub mod topo;
pub mod trainer;
pub mod verify;

pub use error::{Error, Result};
