//! Location-aware power control for a cognitive radio (CR) link that shares
//! spectrum with a TV broadcast network, plus an event-driven simulator that
//! measures packet delivery under receiver mobility.
//!
//! The TV base station sits at the origin. A static CR transmitter (CTx)
//! serves a mobile CR receiver (CRx) while a fixed TV receiver must keep its
//! SIR above threshold.

pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod mobility;
pub mod powerctl;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{CartesianPoint, PolarPoint};
pub use powerctl::{Deployment, PowerDecision};
