//! Session server around the tumor-growth model: create, drive, inspect and
//! replay simulations over HTTP or in-process.

pub mod error;
pub mod http;
mod session;

pub use error::{ServiceError, ServiceResult};
pub use http::{router, serve};
pub use session::{
    replay, Command, CreateSession, GrowSummary, LoggedCommand, ReplayManifest, SessionService,
    SessionStatus, SessionSummary, SwitchAck, DEFAULT_STEM_CELLS, DEFAULT_TTL,
};
