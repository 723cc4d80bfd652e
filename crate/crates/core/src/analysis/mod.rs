//! Quadrature, special functions and Mellin transforms.

pub mod quadrature;
pub mod mellin;
pub mod special;
