//! Tabulation of uncolored bonded knots up to seven singularities:
//! diagram model and PD codes, Yamada polynomial, generalized
//! Reidemeister move search, shadow generation, and the classification
//! pipeline producing the final tables.

pub mod canon;
pub mod diagram;
pub mod multigraph;
pub mod pd;
pub mod poly;
mod flype;
pub mod moves;
mod rewrite;
pub mod yamada;
