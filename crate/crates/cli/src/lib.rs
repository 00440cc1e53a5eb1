//! Command line and local session service for the round elimination
//! library.

pub mod cli;
pub mod ops;
pub mod service;
pub mod session;

pub use cli::dispatch;
