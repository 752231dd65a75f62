pub mod deficiency;
pub mod factor;
pub mod graph;
pub mod graph6;
pub mod bipartite;
pub mod reduction;
pub mod extremal;
