//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

pub mod brute;
pub mod dense;
