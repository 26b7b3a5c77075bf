//! Amortised resource analysis for the innermost runtime complexity of
//! (relative) term rewrite systems.

pub mod annotation;
pub mod constraint;
pub mod inference;
pub mod report;
pub mod trs;
pub mod validator;
