//! Service around `domcity-core`: snapshot ingestion, session state, scene
//! publication over HTTP and websockets, file watching and scene export.

pub mod cli;
pub mod engine;
pub mod server;
pub mod session;
pub mod watch;
pub mod wire;

pub use engine::Engine;
pub use session::{Origin, Screenshot, SessionError, SessionState, Snapshot, UpdateMode};
