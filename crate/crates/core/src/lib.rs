//! Certified partial MaxSAT: a CDCL SAT engine with DRUP proof logging,
//! SAT-based optimisation algorithms that emit per-iteration certificates,
//! and an independent checker for the resulting bundles.

pub mod cardenc;
pub mod certs;
pub mod drup;
pub mod formula;
pub mod satcore;
pub mod checker;
pub mod optalgs;
