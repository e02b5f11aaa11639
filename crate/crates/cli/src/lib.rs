//! Command line and HTTP/WebSocket service for the novikov engine.

pub mod commands;
pub mod server;
