//! Time integration in front-fixed coordinates.
//!
//! With `H(t) = h(t) - ct`, `y = (x - ct) / H` and `v(t, y) = u(t, ct + yH)`:
//!
//! ```text
//! u_t = v_t - v_y (c + y H') / H,   u_x = v_y / H,   u_xx = v_yy / H^2
//! ```
//!
//! so `u_t = u_xx + f(u)` on `ct < x < h(t)` becomes
//!
//! ```text
//! v_t = v_yy / H^2 + (c + y H') v_y / H + f(v),   0 < y < 1,
//! v(t, 0) = v(t, 1) = 0,
//! H' = h' - c = -mu v_y(t, 1) / H - c.
//! ```
//!
//! [`simulate`] advances this system with implicit diffusion and advection
//! (central differences, width frozen at an explicit predictor), explicit
//! reaction and a trapezoidal update of `H`. [`reference_simulate`] is a
//! separate fully explicit scheme kept as an oracle.

mod bounds;
mod data;
mod nonlinearity;
mod record;
mod reference;
mod scheme;
mod state;

pub use bounds::{BoundMonitor, Violation, ViolationKind};
pub use data::{InitialData, SampledData};
pub use nonlinearity::Nonlinearity;
pub use reference::reference_simulate;
pub use scheme::{
    boundary_flux, init_state, simulate, simulate_from, simulate_observed, step, step_with_source,
    Source,
};
pub use state::{
    default_floor, Controls, DtPolicy, FrontFixedState, ProblemSpec, TerminalEvent, Trace,
    TraceSample,
};
