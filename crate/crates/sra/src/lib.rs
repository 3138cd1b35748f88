//! Synchronous rely/guarantee algebra: step algebra, command terms, trace
//! semantics and bounded decision procedures.
#![no_std]

extern crate alloc;

pub mod decide;
pub mod kernel;
pub mod laws;
pub mod procalg;
pub mod semantics;
pub mod stepalg;
pub mod syntax;
