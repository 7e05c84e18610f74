//! Numerical building blocks: adaptive quadrature, cubic splines,
//! scalar minimisation/root finding and symmetric tridiagonal eigensolvers.

pub mod optimize;
pub mod quadrature;
pub mod spline;
pub mod tridiag;
