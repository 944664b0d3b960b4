//! HTTP API and command-line front end for the commit-message service.

pub mod api;
pub mod auth;
pub mod blind;
pub mod cli;
pub mod config;
pub mod error;
pub mod session;
pub mod shuffle;

pub use api::{router, AppState, SharedState};
pub use cli::{cmd_generate, cmd_score, cmd_serve, Cli, Command};
pub use error::ApiError;
