pub mod arith;
pub mod quadfield;
pub mod ellcurve;
pub mod localred;
pub mod heckechar;
pub mod cocycle;
pub mod descent;
pub mod eliminate;
pub mod search;
pub mod tables;
pub mod report;
