//! Live play: one game per websocket connection, with Model 2 predicting
//! every human move before it is applied.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{ClientFrame, HeadingName, InitFrame, ServerFrame, StateFrame, Tallies};
pub use server::{serve, serve_connection, Clock, ServerOptions};
pub use session::Session;
