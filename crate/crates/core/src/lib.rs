//! Deformation-space toolkit for free products of finite groups.
//!
//! The library works with marked graphs of groups over a factor system
//! `G = A_1 * ... * A_n` of finite groups: normal-form word arithmetic,
//! the conjugating generator automorphisms and their outer classes,
//! collapse/expand moves with canonical equivalence testing, breadth-first
//! exploration of the spine complex, Bass-Serre balls with minimal subtrees
//! and axes, and the counting/retraction machinery behind subgroup
//! distortion experiments.

pub mod autos;
pub mod config;
pub mod gog;
pub mod groups;
pub mod io;
pub mod metrics;
pub mod spine;
pub mod verify;
pub mod words;
