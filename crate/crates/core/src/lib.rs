// Negated float comparisons are deliberate: they reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod chebyshev;
pub mod config;
pub mod expr;
pub mod green;
pub mod hypotheses;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod problem;
pub mod quadrature;
pub mod reduction;
pub mod solver;
pub mod spectral;
