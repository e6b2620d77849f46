pub mod config;
pub mod error;
pub mod fplinalg;
pub mod gf;
pub mod groups;
pub mod kummer;
pub mod moduli;
pub mod localmod;
pub mod pfrac;
pub mod report;
pub mod restrict;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use gf::{FieldCtx, Fel};
