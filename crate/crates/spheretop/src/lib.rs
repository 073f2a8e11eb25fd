//! Integrable Hamiltonian dynamics on the sphere with a cubic-in-momenta
//! first integral.
//!
//! The library implements a two-parameter-plus-coupling family of natural
//! Hamiltonian systems on T*S² (couplings `A`, `c`, shape `s > 1`) whose
//! second integral F is cubic in the momenta, together with:
//!
//! * three charts (spherical, pole, global/Lie-Poisson) with exact canonical
//!   gluing and evaluators for H, K, F in each ([`charts`]);
//! * a forward-mode dual-number bracket engine: gradients, canonical and
//!   Lie-Poisson brackets, Hamiltonian vector fields, and the degree-wise
//!   decomposition of {H, F} in the momenta ([`bracket`], [`mompoly`]);
//! * symplectic time integration (implicit midpoint) with pole-chart
//!   switching, conservation monitoring, and Poincaré sections ([`dynamics`]);
//! * kinetic-metric curvature profiles, positivity verification, and the
//!   Maupertuis geodesic family with sign-resolved cubic integral
//!   ([`geometry`]);
//! * the reduced Goryachev-Chaplygin family and comparison diagnostics
//!   ([`gc`]);
//! * a machine-readable verification battery ([`verify`]) and CSV/JSON
//!   export ([`io`]).
//!
//! All scalar math is generic over [`scalar::Real`], so the same formulas run
//! at `f64`, `f32`, and (nested) dual numbers.

// Validation guards use `!(x > bound)` so NaN fails closed; index loops over
// paired fixed-size arrays stay as indices for symmetry with the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bracket;
pub mod charts;
pub mod dual;
pub mod dynamics;
pub mod gc;
pub mod geometry;
pub mod io;
pub mod model;
pub mod mompoly;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use charts::{GlobalState, Hemisphere, PoleChartState, SphericalState, State};
pub use dual::Dual;
pub use model::Params;
pub use scalar::Real;

/// Default working scalar.
pub type Scalar = f64;
/// Single-direction dual over the working scalar (d/dz-style derivatives).
pub type Dual1 = Dual<f64, 1>;
/// Position-gradient dual (θ, φ).
pub type Dual2 = Dual<f64, 2>;
/// Canonical-chart gradient dual (θ, φ, p_θ, p_φ).
pub type Dual4 = Dual<f64, 4>;
/// Global-chart gradient dual (x, y, z, L_x, L_y, L_z).
pub type Dual6 = Dual<f64, 6>;
/// Nested dual for exact second derivatives in one direction.
pub type Jet2 = Dual<Dual<f64, 1>, 1>;

/// Worker-thread cap for seed-parallel computations, from `SPHERETOP_THREADS`
/// (defaults to the machine's available parallelism).
pub fn worker_cap() -> usize {
    std::env::var("SPHERETOP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}
