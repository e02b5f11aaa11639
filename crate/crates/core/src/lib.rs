//! Exact cobar complexes, Ext groups and algebraic Novikov spectral sequences
//! over the Brown-Peterson Hopf algebroid and the dual Steenrod algebra.

pub mod bp_hopf;
pub mod chart;
pub mod cobar_ext;
pub mod comodules;
pub mod graded_poly;
pub mod novikov_ss;
pub mod pipeline;
pub mod scalar_linalg;
