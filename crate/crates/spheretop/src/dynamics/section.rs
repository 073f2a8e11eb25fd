//! Poincaré sections of the flow on a fixed energy level.
//!
//! The section is the plane φ ≡ φ* (mod 2π) crossed in a fixed direction
//! (dφ/dt > 0 by default; since dφ/dt = C(cosθ)·p_φ with C > 0, the crossing
//! direction is exactly the sign of p_φ). Crossings are detected by a sign
//! change of the principal angle φ − φ* and refined by secant iteration on
//! the crossing time, re-stepping from the bracketing sample until
//! |φ − φ*| ≤ the refinement tolerance.

use super::{step_implicit_midpoint, reseat_chart, ChartPoint, IntegratorConfig};
use crate::charts::{self, SphericalState, State};
use crate::model::Params;
use serde::Serialize;
use std::sync::Mutex;

/// Which way the orbit must pierce the section plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossingDirection {
    /// dφ/dt > 0 (the default).
    Positive,
    /// dφ/dt < 0 (used by time-reversal diagnostics).
    Negative,
}

/// Section plane, energy level, and refinement tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct SectionConfig {
    pub phi_star: f64,
    pub direction: CrossingDirection,
    pub energy: f64,
    pub refine_tol: f64,
    /// Stop after this many crossings per seed (None: run to t_end).
    pub max_crossings: Option<usize>,
}

impl SectionConfig {
    pub fn new(energy: f64) -> Self {
        SectionConfig {
            phi_star: 0.0,
            direction: CrossingDirection::Positive,
            energy,
            refine_tol: 1e-12,
            max_crossings: None,
        }
    }
}

/// One refined section crossing.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossingPoint {
    pub index: usize,
    pub t: f64,
    pub theta: f64,
    pub p_theta: f64,
    /// |H − E| at the refined crossing.
    pub energy_residual: f64,
}

/// All crossings of one seed; `flagged_empty` marks seeds that were
/// infeasible or never crossed within t_end.
#[derive(Debug, Clone, Serialize)]
pub struct SeedSection {
    pub seed_index: usize,
    pub points: Vec<CrossingPoint>,
    pub flagged_empty: bool,
}

/// Principal angle in (−π, π].
fn principal(angle: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = angle.rem_euclid(two_pi);
    if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

fn phi_of(point: &ChartPoint) -> f64 {
    match point {
        ChartPoint::Spherical(s) => s.phi,
        ChartPoint::Pole(p) => (-p.y).atan2(-p.x),
    }
}

/// sin²θ at the point; φ degenerates where this vanishes.
fn sin2_theta_of(point: &ChartPoint) -> f64 {
    let z = point.z();
    1.0 - z * z
}

fn p_phi_of(point: &ChartPoint) -> f64 {
    match point {
        ChartPoint::Spherical(s) => s.p_phi,
        ChartPoint::Pole(p) => p.x * p.p_y - p.y * p.p_x,
    }
}

/// (θ, p_θ) of a chart point; `None` exactly at a pole.
fn theta_p_theta_of(point: &ChartPoint) -> Option<(f64, f64)> {
    match point {
        ChartPoint::Spherical(s) => Some((s.theta, s.p_theta)),
        ChartPoint::Pole(p) => {
            let sph = charts::pole_to_spherical(p).ok()?;
            Some((sph.theta, sph.p_theta))
        }
    }
}

fn direction_matches(point: &ChartPoint, direction: CrossingDirection) -> bool {
    let p_phi = p_phi_of(point);
    match direction {
        CrossingDirection::Positive => p_phi > 0.0,
        CrossingDirection::Negative => p_phi < 0.0,
    }
}

/// Secant refinement of the crossing time within one bracketing step.
/// Returns the refined point and its sub-step time, or `None` if refinement
/// cannot reach the tolerance (degenerate tangency).
fn refine_crossing(
    from: &ChartPoint,
    dt: f64,
    phi_star: f64,
    tol: f64,
    params: &Params,
    integ: &IntegratorConfig,
) -> Option<(ChartPoint, f64)> {
    let g = |tau: f64| -> Option<(f64, ChartPoint)> {
        let pt = if tau == 0.0 {
            *from
        } else {
            step_implicit_midpoint(from, tau, params, integ.fixed_point_tol, integ.max_fixed_point_iters).ok()?
        };
        Some((principal(phi_of(&pt) - phi_star), pt))
    };
    let (mut g_lo, _) = g(0.0)?;
    let (mut g_hi, _) = g(dt)?;
    let (mut lo, mut hi) = (0.0_f64, dt);
    // Secant with bisection safeguard on the bracket [lo, hi].
    let mut tau = lo - g_lo * (hi - lo) / (g_hi - g_lo);
    for _ in 0..60 {
        if !(tau > lo.min(hi) && tau < lo.max(hi)) {
            tau = 0.5 * (lo + hi);
        }
        let (g_tau, pt) = g(tau)?;
        if g_tau.abs() <= tol {
            return Some((pt, tau));
        }
        if (g_tau < 0.0) == (g_lo < 0.0) {
            lo = tau;
            g_lo = g_tau;
        } else {
            hi = tau;
            g_hi = g_tau;
        }
        tau = lo - g_lo * (hi - lo) / (g_hi - g_lo);
    }
    None
}

fn section_for_seed(
    seed_index: usize,
    seed: &SphericalState<f64>,
    params: &Params,
    section: &SectionConfig,
    integ: &IntegratorConfig,
) -> SeedSection {
    let empty = |flag: bool| SeedSection {
        seed_index,
        points: Vec::new(),
        flagged_empty: flag,
    };

    let h_seed = charts::hamiltonian(&State::Spherical(*seed), params);
    if (h_seed - section.energy).abs() > 1e-8 * (1.0 + section.energy.abs()) {
        return empty(true);
    }

    let dt = if integ.t_end >= 0.0 { integ.dt } else { -integ.dt };
    let n_steps = (integ.t_end / dt).round().max(0.0) as u64;

    let mut point = ChartPoint::Spherical(*seed);
    let mut delta_prev = principal(phi_of(&point) - section.phi_star);
    let mut points = Vec::new();

    for k in 0..n_steps {
        let next = match step_implicit_midpoint(
            &point,
            dt,
            params,
            integ.fixed_point_tol,
            integ.max_fixed_point_iters,
        ) {
            Ok(p) => p,
            Err(_) => return empty(points.is_empty()),
        };
        let delta_next = principal(phi_of(&next) - section.phi_star);
        // A genuine section passage: small principal angles on both sides of
        // zero (the cut at ±π is the antipodal plane, not a crossing), the
        // zero crossed left-to-right or right-to-left, correct direction,
        // and both endpoints away from the poles where φ degenerates.
        let small = delta_prev.abs() < 1.5 && delta_next.abs() < 1.5;
        let crossed = delta_prev <= 0.0 && delta_next > 0.0 || delta_prev >= 0.0 && delta_next < 0.0;
        let away_from_poles = sin2_theta_of(&point) > 1e-4 && sin2_theta_of(&next) > 1e-4;
        if small && crossed && away_from_poles && delta_prev != delta_next {
            if let Some((refined, tau)) =
                refine_crossing(&point, dt, section.phi_star, section.refine_tol, params, integ)
            {
                if direction_matches(&refined, section.direction) {
                    if let Some((theta, p_theta)) = theta_p_theta_of(&refined) {
                        let h = charts::hamiltonian(&refined.to_state(), params);
                        points.push(CrossingPoint {
                            index: points.len(),
                            t: k as f64 * dt + tau,
                            theta,
                            p_theta,
                            energy_residual: (h - section.energy).abs(),
                        });
                        if let Some(max) = section.max_crossings {
                            if points.len() >= max {
                                break;
                            }
                        }
                    }
                }
            }
        }
        point = match reseat_chart(next, integ.switch_band) {
            Ok(p) => p,
            Err(_) => return empty(points.is_empty()),
        };
        delta_prev = principal(phi_of(&point) - section.phi_star);
    }

    let flagged = points.is_empty();
    SeedSection {
        seed_index,
        points,
        flagged_empty: flagged,
    }
}

/// Sections for a batch of seeds. Seeds are independent and run on up to
/// [`crate::worker_cap`] worker threads; output order follows seed order.
pub fn poincare_section(
    seeds: &[SphericalState<f64>],
    params: &Params,
    section: &SectionConfig,
    integ: &IntegratorConfig,
) -> Vec<SeedSection> {
    let workers = crate::worker_cap().min(seeds.len().max(1));
    let results: Mutex<Vec<Option<SeedSection>>> = Mutex::new(vec![None; seeds.len()]);
    let next: Mutex<usize> = Mutex::new(0);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    let idx = *guard;
                    if idx >= seeds.len() {
                        return;
                    }
                    *guard += 1;
                    idx
                };
                let result = section_for_seed(idx, &seeds[idx], params, section, integ);
                results.lock().unwrap()[idx] = Some(result);
            });
        }
    });

    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every seed processed"))
        .collect()
}

/// Estimated distance of each point to the energy level curve
/// {½p_θ² + ½C p_φ₀² + V(θ, φ*) = E} in the (θ, p_θ) plane: the implicit
/// residual divided by the gradient norm. For A = 0 runs this is the
/// section's "curve thickness".
pub fn level_curve_distance(
    points: &[CrossingPoint],
    p_phi: f64,
    phi_star: f64,
    energy: f64,
    params: &Params,
) -> f64 {
    points
        .iter()
        .map(|pt| {
            let st = SphericalState::new(pt.theta, phi_star, pt.p_theta, p_phi)
                .expect("crossing points are interior");
            let h = charts::hamiltonian(&State::Spherical(st), params);
            let grad = crate::bracket::gradient(
                &crate::bracket::SphericalHamiltonian(*params),
                st.coords(),
            );
            let gnorm = (grad[0] * grad[0] + grad[2] * grad[2]).sqrt().max(1e-12);
            (h - energy).abs() / gnorm
        })
        .fold(0.0, f64::max)
}
