//! Batch driver around `lzdeph`: sweep configuration, concurrent grid
//! execution, CSV/JSON output and expansion tables.

pub mod config;
pub mod error;
pub mod expansion;
pub mod output;
pub mod sweep;
