//! Computations with balanced piecewise-linear functions on genus-0 tropical
//! curves and with the cone complexes that parametrize tropical maps to the
//! tropicalized logarithmic torus.
//!
//! The crate is organized bottom-up:
//!
//! * [`tropical_curve`]: metric trees with labeled legs, validation,
//!   canonical forms, enumeration of combinatorial types, edge contraction.
//! * [`pl_function`]: integer-sloped piecewise-linear functions on trees,
//!   multidegree, balancing, and reconstruction from leg slopes.
//! * [`moduli`]: cone complexes of curves and of maps, product decomposition
//!   certificates, stabilization, self-maps of the logarithmic torus.
//! * [`subdivision`]: complete rational fans, an exact Fourier–Motzkin
//!   feasibility kernel, and fan-induced subdivisions of map moduli cones.
//!
//! All arithmetic is exact ([`Rational`] is an arbitrary-precision fraction).

pub mod affine;
pub mod error;
pub mod moduli;
pub mod pl_function;
pub mod rational;
pub mod subdivision;
pub mod tropical_curve;

pub use affine::AffineExpr;
pub use error::{Error, Result};
pub use rational::Rational;
