pub mod krylov;
pub mod linalg;
pub mod modal;
pub mod scenarios;
pub mod selftest;
pub mod specfun;
pub mod symbols;
