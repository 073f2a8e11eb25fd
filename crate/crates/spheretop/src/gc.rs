//! The reduced Goryachev-Chaplygin family: reference Hamiltonian H₁ with its
//! cubic integral F₁, the Maupertuis geodesic pair (H₂, F₂), and comparison
//! diagnostics against the cubic-integral family.
//!
//! Closed forms are implemented verbatim:
//! K₁ = ½(cos²θ/sin²θ + 4)p_φ² + ½p_θ², V₁ = A₁ sinθ sinφ,
//! F₁ = H₁p_φ − 2p_φ³ − (A₁/2)p_θ cosφ cosθ + (A₁/2) sinφ(3cos²θ−2)/sinθ · p_φ.
//! F₂ goes through the same sign-resolution protocol as the primary family's
//! geodesic integral (its standard form wins unchanged).

use crate::bracket::Observable;
use crate::charts::SphericalState;
use crate::geometry::{
    resolve_sign_variants, GeometryError, MetricProfile, ResolutionRecord, VariantKey,
    DERIVED_VARIANT, VARIANT_RESOLUTION_STATES, VARIANT_RESOLUTION_TOL,
};
use crate::model::{ModelError, Params};
use crate::scalar::Real;
use serde::Serialize;

/// Couplings of the reduced Goryachev-Chaplygin family: potential strength
/// `a1` and, for the geodesic family only, the energy parameter `h1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GCParams {
    pub a1: f64,
    pub h1: f64,
}

impl GCParams {
    pub fn new(a1: f64, h1: f64) -> Result<Self, ModelError> {
        for (name, value) in [("A1", a1), ("h1", h1)] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name, value });
            }
        }
        Ok(GCParams { a1, h1 })
    }
}

/// K₁ on spherical coordinates.
pub fn gc_kinetic<T: Real>(theta: T, p_theta: T, p_phi: T) -> T {
    let cot2 = {
        let c = theta.cos() / theta.sin();
        c * c
    };
    T::from_f64(0.5) * (cot2 + T::from_f64(4.0)) * p_phi * p_phi
        + T::from_f64(0.5) * p_theta * p_theta
}

/// H₁ = K₁ + V₁ on spherical coordinates `[θ, φ, p_θ, p_φ]`.
pub fn gc_hamiltonian_coords<T: Real>(x: [T; 4], gc: &GCParams) -> T {
    let [theta, phi, p_theta, p_phi] = x;
    gc_kinetic(theta, p_theta, p_phi) + T::from_f64(gc.a1) * theta.sin() * phi.sin()
}

/// F₁ on spherical coordinates.
pub fn gc_integral_coords<T: Real>(x: [T; 4], gc: &GCParams) -> T {
    let [theta, phi, p_theta, p_phi] = x;
    let a1 = T::from_f64(gc.a1);
    let half = T::from_f64(0.5);
    let cos_t = theta.cos();
    let h1 = gc_hamiltonian_coords(x, gc);
    h1 * p_phi - T::from_f64(2.0) * p_phi * p_phi * p_phi
        - half * a1 * p_theta * phi.cos() * cos_t
        + half * a1 * phi.sin() * (T::from_f64(3.0) * cos_t * cos_t - T::from_f64(2.0))
            / theta.sin()
            * p_phi
}

/// H₁ and F₁ of a spherical-chart state.
pub fn gc_hamiltonian(state: &SphericalState<f64>, gc: &GCParams) -> f64 {
    gc_hamiltonian_coords(state.coords(), gc)
}

pub fn gc_integral(state: &SphericalState<f64>, gc: &GCParams) -> f64 {
    gc_integral_coords(state.coords(), gc)
}

pub struct GcHamiltonian(pub GCParams);
impl Observable<4> for GcHamiltonian {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        gc_hamiltonian_coords(x, &self.0)
    }
}

pub struct GcIntegral(pub GCParams);
impl Observable<4> for GcIntegral {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        gc_integral_coords(x, &self.0)
    }
}

/// H₂ = K₁/(h₁ − V₁) on spherical coordinates.
pub fn gc_h2_coords<T: Real>(x: [T; 4], gc: &GCParams) -> T {
    let [theta, phi, p_theta, p_phi] = x;
    let v1 = T::from_f64(gc.a1) * theta.sin() * phi.sin();
    gc_kinetic(theta, p_theta, p_phi) / (T::from_f64(gc.h1) - v1)
}

/// One sign variant of F₂, mirroring the primary family's protocol:
/// lead·p_φ + σ₁·2p_φ³-term + σ₂·(−V₁p_φ + V₁p_φH₂) + H₂·(A₁-terms).
pub fn gc_f2_coords<T: Real>(x: [T; 4], gc: &GCParams, variant: VariantKey) -> T {
    let [theta, phi, p_theta, p_phi] = x;
    let a1 = T::from_f64(gc.a1);
    let half = T::from_f64(0.5);
    let cos_t = theta.cos();
    let v1 = a1 * theta.sin() * phi.sin();
    let k1 = gc_kinetic(theta, p_theta, p_phi);
    let h2 = k1 / (T::from_f64(gc.h1) - v1);
    let lead = if variant.lead_geodesic { h2 } else { k1 + v1 };
    let a_terms = -half * a1 * p_theta * phi.cos() * cos_t
        + half * a1 * phi.sin() * (T::from_f64(3.0) * cos_t * cos_t - T::from_f64(2.0))
            / theta.sin()
            * p_phi;
    lead * p_phi
        + T::from_f64(variant.cubic_sign as f64) * T::from_f64(2.0) * p_phi * p_phi * p_phi
        + T::from_f64(variant.v_terms_sign as f64) * (v1 * p_phi * (h2 - T::one()))
        + h2 * a_terms
}

pub struct GcGeodesicHamiltonian(pub GCParams);
impl Observable<4> for GcGeodesicHamiltonian {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        gc_h2_coords(x, &self.0)
    }
}

pub struct GcGeodesicIntegralVariant {
    pub gc: GCParams,
    pub variant: VariantKey,
}
impl Observable<4> for GcGeodesicIntegralVariant {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        gc_f2_coords(x, &self.gc, self.variant)
    }
}

/// The Goryachev-Chaplygin geodesic family with its sign-resolution record.
#[derive(Debug, Clone, Serialize)]
pub struct GcGeodesicSystem {
    pub gc: GCParams,
    pub resolution: ResolutionRecord,
}

impl GcGeodesicSystem {
    pub fn h2(&self, state: &SphericalState<f64>) -> f64 {
        gc_h2_coords(state.coords(), &self.gc)
    }

    pub fn f2(&self, state: &SphericalState<f64>) -> f64 {
        gc_f2_coords(state.coords(), &self.gc, self.resolution.resolved)
    }

    pub fn metric(&self) -> MetricProfile {
        MetricProfile::GcGeodesic { gc: self.gc }
    }
}

/// Builds (H₂, F₂): requires h₁ > max V₁ = |A₁| and resolves F₂'s signs.
pub fn gc_geodesic_system(gc: &GCParams, seed: u64) -> Result<GcGeodesicSystem, GeometryError> {
    let max_v1 = gc.a1.abs();
    if !(gc.h1 > max_v1) {
        return Err(GeometryError::HBelowPotentialMax {
            h: gc.h1,
            max_v: max_v1,
        });
    }
    let h_obs = GcGeodesicHamiltonian(*gc);
    let variants: Vec<(VariantKey, GcGeodesicIntegralVariant)> = VariantKey::all()
        .into_iter()
        .map(|variant| (variant, GcGeodesicIntegralVariant { gc: *gc, variant }))
        .collect();
    let states = crate::geometry::resolution_states(seed, VARIANT_RESOLUTION_STATES);
    let resolution = resolve_sign_variants(
        &h_obs,
        &variants,
        &states,
        VARIANT_RESOLUTION_TOL,
        DERIVED_VARIANT,
    )?;
    Ok(GcGeodesicSystem {
        gc: *gc,
        resolution,
    })
}

// ---------------------------------------------------------------------------
// Curvature comparison
// ---------------------------------------------------------------------------

/// Curvature and kinetic-profile comparison between the two families.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub theta_grid: Vec<f64>,
    pub kappa_new: Vec<f64>,
    pub kappa_gc: Vec<f64>,
    pub kappa_new_range: (f64, f64),
    pub kappa_gc_range: (f64, f64),
    /// max − min over the grid of G(cosθ) = C_new − 1/sin²θ (nonconstancy of
    /// the profile difference; G constant would force a double root of P).
    pub g_nonconstancy: f64,
    /// min over α > 0 of max_θ |C_new(θ) − α·C_GC(θ)|.
    pub nonproportionality_margin: f64,
}

fn range(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

/// Compares the curvature and azimuthal kinetic profiles of the two
/// families on an interior θ-grid.
pub fn curvature_comparison(
    params: &Params,
    n_theta: usize,
) -> Result<ComparisonReport, GeometryError> {
    let n = n_theta.max(16);
    let theta_grid: Vec<f64> = (1..n)
        .map(|i| std::f64::consts::PI * i as f64 / n as f64)
        .collect();
    let kappa_new =
        crate::geometry::curvature_profile(&MetricProfile::NewSystem { s: params.s }, &theta_grid)?;
    let kappa_gc =
        crate::geometry::curvature_profile(&MetricProfile::GoryachevChaplygin, &theta_grid)?;

    let c_new: Vec<f64> = theta_grid
        .iter()
        .map(|&t| crate::model::kinetic_c(t.cos(), params.s))
        .collect();
    let c_gc: Vec<f64> = theta_grid
        .iter()
        .map(|&t| 1.0 / t.sin().powi(2) + 3.0)
        .collect();
    let g_vals: Vec<f64> = theta_grid
        .iter()
        .map(|&t| crate::model::g(t.cos(), params.s))
        .collect();
    let (g_lo, g_hi) = range(&g_vals);

    // sup-norm distance to the ray {α·C_GC}: convex in α, golden search.
    let sup_dist = |alpha: f64| -> f64 {
        c_new
            .iter()
            .zip(&c_gc)
            .map(|(a, b)| (a - alpha * b).abs())
            .fold(0.0, f64::max)
    };
    let inv_phi = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (1e-6, 10.0);
    for _ in 0..200 {
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        if sup_dist(c) < sup_dist(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let margin = sup_dist(0.5 * (a + b));

    Ok(ComparisonReport {
        kappa_new_range: range(&kappa_new),
        kappa_gc_range: range(&kappa_gc),
        theta_grid,
        kappa_new,
        kappa_gc,
        g_nonconstancy: g_hi - g_lo,
        nonproportionality_margin: margin,
    })
}
