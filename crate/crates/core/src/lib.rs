//! Symbolic engine for families of complete theories viewed as points of
//! Cantor space.

pub mod blocks;
pub mod boolean;
pub mod closure;
pub mod dsl;
pub mod error;
pub mod gallery;
pub mod lattice;
pub mod oracle;
pub mod session;
pub mod stone;
pub mod verify;
pub mod word;

pub use blocks::{Block, Cell, Fan, FanArray, Family, Mask, PosSet};
pub use error::{Error, Result};
pub use stone::{SentenceExpr, TheoryPoint, Trichotomy};
