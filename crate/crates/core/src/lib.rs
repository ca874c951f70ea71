pub mod analytic_example;
pub mod error;
pub mod floquet_solver;
pub mod fockspace;
pub mod harness;
pub mod linalg;
pub mod magnus;
pub mod ncft;
pub mod quadrature;
pub mod specfun;
