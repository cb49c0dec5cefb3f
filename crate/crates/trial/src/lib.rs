//! Session engine for the human test game: staged training exhibits, four
//! 20-item test rounds, retraining on any mistake, and an append-only event
//! log per session that is enough to rebuild it.
//!
//! [`session`] holds the protocol and is usable without the HTTP layer in
//! [`service`].

pub mod error;
pub mod event;
pub mod service;
pub mod session;
pub mod sets;

pub use error::{Error, Result};
pub use event::{Event, EventLog, Shown, TestItem};
pub use service::{router, serve, AppState};
pub use session::{AnswerOutcome, ItemView, Phase, Report, TrialSession};
pub use sets::{TrialLayout, TrialSets};
