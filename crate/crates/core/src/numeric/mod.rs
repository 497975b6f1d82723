pub mod halton;
pub mod logspace;
pub mod quadrature;
pub mod roots;

pub use logspace::LogScalar;
