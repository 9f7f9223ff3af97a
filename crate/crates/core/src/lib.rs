//! Chaos shift keying over a decode-and-forward relay network with maximum
//! ratio combining at the destination: Monte Carlo simulation, statistics of
//! the received bit energy and the analytic bit error rate.

pub mod analytic;
pub mod channel;
pub mod chaos;
pub mod energy;
pub mod error;
pub mod harness;
pub mod modem;
pub mod numeric;
pub mod relay;

pub use error::{Error, ErrorKind, Result};
