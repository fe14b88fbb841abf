//! Free boundary Fisher-KPP problem with an eroding left end `x = ct` and a
//! Stefan front `h'(t) = -mu u_x(t, h(t))`.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod dynamics;
pub mod error;
pub mod interp;
pub mod ode;
pub mod profiles;
pub mod roots;
pub mod solver;
pub mod threshold;
pub mod tridiag;

pub use error::{Error, Result};
pub use interp::Profile;
pub use profiles::{CompactWave, EllipticProfile, SemiWave};
pub use solver::{
    Controls, DtPolicy, FrontFixedState, InitialData, Nonlinearity, ProblemSpec, TerminalEvent,
    Trace,
};
