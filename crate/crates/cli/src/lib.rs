//! Command-line front end for the `whindex` library: problem-file parsing,
//! reports, and the verification battery.

pub mod json;
pub mod output;
pub mod problem;
pub mod report;
pub mod verify;
