//! Poisson brackets, gradients, and Hamiltonian vector fields.
//!
//! Differentiation is forward-mode through [`Dual`] (exact to roundoff);
//! finite differences appear only in tests as the independent oracle. The
//! sign convention throughout is ḟ = {f, H}, equivalently dθ/dt = +∂H/∂p_θ.
//!
//! In the global chart the bracket is the Lie-Poisson structure with
//! {L_x, L_y} = L_z, {x, L_y} = z, {z, L_y} = −x and cyclic permutations;
//! its two Casimirs x² + y² + z² and x·L commute with everything.

use crate::charts::{self, GlobalState, Hemisphere};
use crate::dual::Dual;
use crate::model::{self, Params};
use crate::scalar::Real;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BracketError {
    #[error(transparent)]
    Model(#[from] model::ModelError),
}

/// A scalar phase-space observable over `N` coordinates, evaluable at any
/// [`Real`] scalar so the engine can differentiate it with (nested) duals.
/// Implementations must be pure (side-effect-free).
///
/// Canonical charts use `N = 4` with coordinate order `[q1, q2, p1, p2]`;
/// the global chart uses `N = 6` with `[x, y, z, L_x, L_y, L_z]`.
pub trait Observable<const N: usize> {
    fn eval<T: Real>(&self, x: [T; N]) -> T;
}

/// Lifts `[T; N]` to dual coordinates with every slot seeded as a variable.
#[inline]
fn seed<T: Real, const N: usize>(x: [T; N]) -> [Dual<T, N>; N] {
    std::array::from_fn(|i| Dual::variable(x[i], i))
}

/// Gradient of `f` with respect to all `N` coordinates, generic in the
/// underlying scalar (so gradients can themselves be differentiated).
pub fn gradient_in<T: Real, const N: usize>(f: &impl Observable<N>, x: [T; N]) -> [T; N] {
    f.eval(seed(x)).eps
}

/// Gradient at `f64` coordinates.
pub fn gradient<const N: usize>(f: &impl Observable<N>, x: [f64; N]) -> [f64; N] {
    gradient_in(f, x)
}

/// Canonical bracket {f, g} = Σ_q (∂f/∂q ∂g/∂p_q − ∂f/∂p_q ∂g/∂q) on a
/// 4-coordinate canonical chart, generic in the scalar.
pub fn canonical_bracket_in<T: Real>(
    f: &impl Observable<4>,
    g: &impl Observable<4>,
    x: [T; 4],
) -> T {
    let df = gradient_in(f, x);
    let dg = gradient_in(g, x);
    df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1]
}

pub fn canonical_bracket(f: &impl Observable<4>, g: &impl Observable<4>, x: [f64; 4]) -> f64 {
    canonical_bracket_in(f, g, x)
}

/// The 6×6 Lie-Poisson structure matrix B(u) with blocks
/// `B[x_i, L_j] = B[L_i, x_j] = ε_ijk x_k` and `B[L_i, L_j] = ε_ijk L_k`.
pub fn lie_poisson_structure<T: Real>(u: [T; 6]) -> [[T; 6]; 6] {
    let zero = T::zero();
    let mut b = [[zero; 6]; 6];
    let pos = [u[0], u[1], u[2]];
    let ell = [u[3], u[4], u[5]];
    // hat(v)[i][j] = ε_ijk v_k
    let hat = |v: [T; 3]| -> [[T; 3]; 3] {
        [
            [zero, v[2], -v[1]],
            [-v[2], zero, v[0]],
            [v[1], -v[0], zero],
        ]
    };
    let hx = hat(pos);
    let hl = hat(ell);
    for i in 0..3 {
        for j in 0..3 {
            b[i][3 + j] = hx[i][j];
            b[3 + i][j] = hx[i][j];
            b[3 + i][3 + j] = hl[i][j];
        }
    }
    b
}

/// Lie-Poisson bracket {f, g} = ∇fᵀ B(u) ∇g, generic in the scalar.
pub fn lie_poisson_bracket_in<T: Real>(
    f: &impl Observable<6>,
    g: &impl Observable<6>,
    u: [T; 6],
) -> T {
    let df = gradient_in(f, u);
    let dg = gradient_in(g, u);
    let b = lie_poisson_structure(u);
    let mut acc = T::zero();
    for i in 0..6 {
        for j in 0..6 {
            acc = acc + df[i] * b[i][j] * dg[j];
        }
    }
    acc
}

pub fn lie_poisson_bracket(f: &impl Observable<6>, g: &impl Observable<6>, u: [f64; 6]) -> f64 {
    lie_poisson_bracket_in(f, g, u)
}

/// A bracket as an observable, so brackets can be nested (Jacobi tests).
pub struct LiePoissonBracketObs<'a, F, G> {
    pub f: &'a F,
    pub g: &'a G,
}

impl<F: Observable<6>, G: Observable<6>> Observable<6> for LiePoissonBracketObs<'_, F, G> {
    fn eval<T: Real>(&self, u: [T; 6]) -> T {
        lie_poisson_bracket_in(self.f, self.g, u)
    }
}

/// Canonical Hamiltonian vector field (dq/dt, dp/dt) = (∂H/∂p, −∂H/∂q).
pub fn canonical_field(h: &impl Observable<4>, x: [f64; 4]) -> [f64; 4] {
    let dh = gradient(h, x);
    [dh[2], dh[3], -dh[0], -dh[1]]
}

/// Lie-Poisson vector field u̇ = B(u) ∇H. Tangent to both Casimir level sets.
pub fn lie_poisson_field(h: &impl Observable<6>, u: [f64; 6]) -> [f64; 6] {
    let dh = gradient(h, u);
    let b = lie_poisson_structure(u);
    std::array::from_fn(|i| (0..6).map(|j| b[i][j] * dh[j]).sum())
}

/// Time derivative of a state's coordinates under the system's own H, in
/// the state's chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldVector {
    Canonical([f64; 4]),
    LiePoisson([f64; 6]),
}

/// Hamiltonian vector field of H at a state in any chart (ḟ = {f, H}, so
/// dθ/dt = +∂H/∂p_θ in the canonical charts).
pub fn hamiltonian_vector_field(state: &charts::State<f64>, params: &Params) -> FieldVector {
    match state {
        charts::State::Spherical(s) => {
            FieldVector::Canonical(canonical_field(&SphericalHamiltonian(*params), s.coords()))
        }
        charts::State::Pole(p) => FieldVector::Canonical(canonical_field(
            &PoleHamiltonian(*params, p.hemisphere),
            p.coords(),
        )),
        charts::State::Global(g) => {
            FieldVector::LiePoisson(lie_poisson_field(&GlobalHamiltonian(*params), g.coords()))
        }
    }
}

// ---------------------------------------------------------------------------
// Built-in observables
// ---------------------------------------------------------------------------

/// The coordinate function `x[I]`.
pub struct Coordinate<const N: usize>(pub usize);

impl<const N: usize> Observable<N> for Coordinate<N> {
    fn eval<T: Real>(&self, x: [T; N]) -> T {
        x[self.0]
    }
}

macro_rules! chart_observable {
    ($name:ident, $n:literal, $fun:path) => {
        pub struct $name(pub Params);
        impl Observable<$n> for $name {
            fn eval<T: Real>(&self, x: [T; $n]) -> T {
                $fun(x, &self.0)
            }
        }
    };
}

chart_observable!(SphericalHamiltonian, 4, charts::hamiltonian_spherical_coords);
chart_observable!(SphericalIntegralF, 4, charts::integral_f_spherical_coords);
chart_observable!(GlobalHamiltonian, 6, charts::hamiltonian_global_coords);
chart_observable!(GlobalIntegralF, 6, charts::integral_f_global_coords);

/// Hamiltonian on a pole chart.
pub struct PoleHamiltonian(pub Params, pub Hemisphere);
impl Observable<4> for PoleHamiltonian {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        charts::hamiltonian_pole_coords(x, self.1, &self.0)
    }
}

/// Cubic integral on a pole chart.
pub struct PoleIntegralF(pub Params, pub Hemisphere);
impl Observable<4> for PoleIntegralF {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        charts::integral_f_pole_coords(x, self.1, &self.0)
    }
}

// ---------------------------------------------------------------------------
// Closed-form complex equations of motion (c = 0) vs the bracket field
// ---------------------------------------------------------------------------

/// Residuals of the bracket-derived field against the closed-form template
/// of the complex equations of motion in ξ = x + iy, η = L_x + iL_y (with
/// V = xU), evaluated at both time orientations:
///
/// ```text
/// −i ξ̇ = −L_z(1+G)ξ + zη
/// −i η̇ = −½G′L_z²ξ − L_zGη + zU − ½U′(ξ² + ξξ̄)
///    ż = xL_y − yL_x          L̇_z = −yU
/// ```
///
/// The template's overall time orientation is convention-dependent;
/// `resolved_sign` records which orientation the ḟ = {f,H} field matches
/// (+1 as written above, −1 time-reversed). Componentwise residuals cover
/// ξ̇, η̇ and the two real completions ż and L̇_z.
#[derive(Debug, Clone)]
pub struct EomOrientationReport {
    /// max-norm residual of (ξ̇, η̇, ż, L̇_z) against the template as written.
    pub residual_direct: f64,
    /// Same against the time-reversed (negated) right-hand sides.
    pub residual_reversed: f64,
    /// Orientation with the smaller residual: +1.0 direct, −1.0 reversed.
    pub resolved_sign: f64,
    /// Residual at the resolved orientation.
    pub residual_resolved: f64,
}

/// Compares the Lie-Poisson field of H (c = 0) with the closed-form ξ, η
/// equations and the ż, L̇_z completions.
pub fn eom_complex_residual(
    state: &GlobalState<f64>,
    params: &Params,
) -> Result<EomOrientationReport, BracketError> {
    if params.c != 0.0 {
        return Err(model::ModelError::RequiresZeroC(params.c).into());
    }
    let u = state.coords();
    let field = lie_poisson_field(&GlobalHamiltonian(*params), u);

    let view = charts::ComplexView::from(state);
    let (xi, eta) = (view.xi, view.eta);
    let xi_dot = Complex64::new(field[0], field[1]);
    let eta_dot = Complex64::new(field[3], field[4]);
    let z_dot = field[2];
    let lz_dot = field[5];

    let z = state.z;
    let lz = state.l_z;
    let g = model::g(z, params.s);
    let g_prime = model::g(Dual::<f64, 1>::variable(z, 0), Dual::constant(params.s)).eps[0];
    let u_val = model::potential_u(z, params)?;
    let u_prime = model::potential_u_prime(z, params)?;

    // Template: −i ξ̇ = −L_z(1+G)ξ + zη
    //           −i η̇ = −½G′L_z²ξ − L_zGη + zU − ½U′(ξ² + ξξ̄)
    // so ξ̇ = i·RHS_ξ, η̇ = i·RHS_η.
    let i = Complex64::new(0.0, 1.0);
    let rhs_xi = i * (-lz * (1.0 + g) * xi + z * eta);
    let rhs_eta = i * (Complex64::new(-0.5 * g_prime * lz * lz, 0.0) * xi - lz * g * eta
        + Complex64::new(z * u_val, 0.0)
        - 0.5 * u_prime * (xi * xi + xi * xi.conj()));
    // Completion template: ż = xL_y − yL_x and L̇_z = −yU.
    let rhs_z = state.x * state.l_y - state.y * state.l_x;
    let rhs_lz = -state.y * u_val;

    let residual_for = |sign: f64| -> f64 {
        let mut m: f64 = 0.0;
        m = m.max((xi_dot - sign * rhs_xi).norm());
        m = m.max((eta_dot - sign * rhs_eta).norm());
        m = m.max((z_dot - sign * rhs_z).abs());
        m = m.max((lz_dot - sign * rhs_lz).abs());
        m
    };
    let residual_direct = residual_for(1.0);
    let residual_reversed = residual_for(-1.0);
    let resolved_sign = if residual_direct <= residual_reversed {
        1.0
    } else {
        -1.0
    };
    Ok(EomOrientationReport {
        residual_direct,
        residual_reversed,
        resolved_sign,
        residual_resolved: residual_direct.min(residual_reversed),
    })
}

/// Scaled commutation residual |{f, g}| / (1 + ‖∇f‖‖∇g‖) on a canonical chart.
pub fn scaled_canonical_residual(
    f: &impl Observable<4>,
    g: &impl Observable<4>,
    x: [f64; 4],
) -> f64 {
    let df = gradient(f, x);
    let dg = gradient(g, x);
    let norm = |v: [f64; 4]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let bracket = df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1];
    bracket.abs() / (1.0 + norm(df) * norm(dg))
}

/// Scaled commutation residual in the Lie-Poisson chart.
pub fn scaled_lie_poisson_residual(
    f: &impl Observable<6>,
    g: &impl Observable<6>,
    u: [f64; 6],
) -> f64 {
    let df = gradient(f, u);
    let dg = gradient(g, u);
    let norm = |v: [f64; 6]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    lie_poisson_bracket(f, g, u).abs() / (1.0 + norm(df) * norm(dg))
}
