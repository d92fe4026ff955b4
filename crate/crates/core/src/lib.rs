//! Singular-eigenfunction machinery for two model kinetic equations, the
//! canonical function of the associated homogeneous Riemann boundary
//! problem, numerically verified half-space orthogonality relations, and the
//! analytic solutions of the isothermal-slip and binary-diffusion half-space
//! problems together with an independent discrete-ordinates solver.

pub mod dispersion;
pub mod eigen;
pub mod halfspace;
pub mod oracle;
pub mod report;
pub mod verify;
pub mod interp;
pub mod quadrature;
pub mod xfunction;

pub use dispersion::{KineticModel, ModelKind, ThetaTable};
pub use eigen::{ContinuumCoefficient, EigenPairing};
pub use halfspace::{DiffusionProblem, HalfSpaceSolution, KramersProblem, Problem};
pub use oracle::{OracleConfig, OracleSolution};
pub use quadrature::{Interval, QuadratureConfig};
pub use xfunction::{CanonicalX, GammaWeight, Normalization};
