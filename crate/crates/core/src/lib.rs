//! Exact combinatorics for counting curves through tropical correspondence.

pub mod exactla;
pub mod tropgraph;
pub mod paramcurve;
pub mod complexes;
pub mod curvefile;
pub mod fanmodel;
pub mod stacky;
pub mod counting;
