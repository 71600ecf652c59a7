//! Hybrid elasticity control for cloud-based software systems.
//!
//! Three cooperating auto-scaling loops drive a trace-fed simulation:
//!
//! - **PIC** (proactive infrastructure control) forecasts the next hour's
//!   workload and provisions cost-optimal capacity ahead of time.
//! - **RSC** (responsive software control) splits each second's requests
//!   into fully served, partially served (optional content disabled), and
//!   dropped, absorbing transient deviations at the software layer.
//! - **RIC** (reactive infrastructure control) watches for sustained
//!   threshold breaches and adds or removes capacity reactively.
//!
//! A static coordinator wires the loops from one configuration file, and a
//! discrete-time engine replays per-second traces through them, producing
//! per-hour and aggregate accounting (cost, under/over-allocation counts,
//! request splits, recovery rates).

pub mod catalog;
pub mod coordinator;
pub mod dco;
pub mod error;
pub mod forecast;
pub mod loops;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
