//! Curvature of general (α,β)-metrics with a closed conformal one-form:
//! dual-route tensors, metric-class verdicts and Berwald family construction.

pub mod classify;
pub mod cli;
pub mod curvature;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod phi;
pub mod quadrature;
pub mod report;
pub mod sampling;
