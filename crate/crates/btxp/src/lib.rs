//! Files, bundled scenarios, the HTTP model backend and the command line
//! around `btxp-core`.

pub mod format;
pub mod library;
pub mod remote;
pub mod backends;
pub mod bench;
pub mod cli;
