//! Actor-based web service composition: terms, the AB-WSCL language, a
//! rewriting engine, an interaction checker and XML skeleton exporters.

pub mod corpus;
pub mod dsl;
pub mod engine;
pub mod export;
pub mod interaction;
pub mod scenario;
pub mod term;
