//! Metamorphic transformations of buggy Java methods, an offline-capable
//! repair-experiment harness, and the statistics used to diagnose
//! memorization from original-vs-transformed success rates.

pub mod config;
pub mod harness;
mod http;
pub mod interpreter;
pub mod naming;
pub mod stats;
pub mod syntax;
pub mod transforms;

pub use http::{ChatMessage, EndpointConfig, HttpError};
