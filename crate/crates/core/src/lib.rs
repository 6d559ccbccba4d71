pub mod algebra;
pub mod construction;
pub mod geometry;
pub mod graphs;
pub mod lattice;
pub mod report;
pub mod sweep;
pub mod tamari;
