//! Certified lower bounds for DC optimal power flow.

pub mod canonical;
pub mod dual;
pub mod case;
pub mod fixtures;
mod fmt;
pub mod optim;
pub mod oracle;
pub mod ptdf;
pub mod report;
pub mod synthetic;
