//! Maximum-entropy reference states, open-system dynamics, and the
//! information-cost bounds built on them.

pub mod bounds;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod maxent;
pub mod plot;
pub mod qcore;
pub mod report;
pub mod scenarios;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
