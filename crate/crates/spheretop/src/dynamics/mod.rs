//! Symplectic time integration with pole-chart switching and conservation
//! monitoring.
//!
//! Evolution happens in the canonical charts (spherical away from the poles,
//! pole charts near them) with the implicit midpoint rule, solved per step by
//! fixed-point iteration. The global chart is used only for recording and
//! comparison: recorded states are projected onto the Casimir level set and
//! the pre-projection residual is logged, so integrator defects remain
//! visible. Chart switches happen inside the |z| band [0.8, 0.9] with
//! hysteresis (spherical → pole above 0.88, pole → spherical below 0.82).

pub mod section;

use crate::bracket::{self, PoleHamiltonian, SphericalHamiltonian};
use crate::charts::{
    self, pole_to_spherical, spherical_to_pole, GlobalState, Hemisphere, PoleChartState,
    SphericalState, State,
};
use crate::model::Params;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum DynamicsError {
    #[error("dt must be positive and finite (got {0})")]
    BadStep(f64),
    #[error("fixed-point tolerance must be positive (got {0})")]
    BadTolerance(f64),
    #[error("chart-switch band {0:?} must satisfy 0 < lo < hi < 1")]
    BadBand((f64, f64)),
    #[error(
        "implicit midpoint fixed-point iteration did not converge: residual {residual:e} after {iters} iterations (reduce dt)"
    )]
    FixedPointDiverged { residual: f64, iters: u32 },
    #[error("chart switch failed: {0}")]
    ChartSwitch(#[from] charts::ChartError),
    #[error("state left the feasible region: {0}")]
    Infeasible(String),
}

/// Step-size, solver, and recording configuration.
#[derive(Debug, Clone, Serialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Max-norm tolerance of the fixed-point solve for the midpoint state.
    pub fixed_point_tol: f64,
    pub max_fixed_point_iters: u32,
    /// |z| band inside which chart switches happen.
    pub switch_band: (f64, f64),
    /// Record every `record_stride`-th step (the endpoints always record).
    pub record_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            t_end: 10.0,
            fixed_point_tol: 1e-14,
            max_fixed_point_iters: 50,
            switch_band: (0.8, 0.9),
            record_stride: 100,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(DynamicsError::BadStep(self.dt));
        }
        if !(self.fixed_point_tol > 0.0) {
            return Err(DynamicsError::BadTolerance(self.fixed_point_tol));
        }
        let (lo, hi) = self.switch_band;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(DynamicsError::BadBand(self.switch_band));
        }
        Ok(())
    }
}

/// A phase point in one of the two canonical evolution charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPoint {
    Spherical(SphericalState<f64>),
    Pole(PoleChartState<f64>),
}

impl ChartPoint {
    pub fn z(&self) -> f64 {
        match self {
            ChartPoint::Spherical(s) => s.theta.cos(),
            ChartPoint::Pole(p) => p.z(),
        }
    }

    pub fn to_state(self) -> State<f64> {
        match self {
            ChartPoint::Spherical(s) => State::Spherical(s),
            ChartPoint::Pole(p) => State::Pole(p),
        }
    }

    fn coords(&self) -> [f64; 4] {
        match self {
            ChartPoint::Spherical(s) => s.coords(),
            ChartPoint::Pole(p) => p.coords(),
        }
    }

    fn with_coords(&self, c: [f64; 4]) -> Result<ChartPoint, charts::ChartError> {
        Ok(match self {
            ChartPoint::Spherical(_) => {
                ChartPoint::Spherical(SphericalState::new(c[0], c[1], c[2], c[3])?)
            }
            ChartPoint::Pole(p) => {
                ChartPoint::Pole(PoleChartState::new(p.hemisphere, c[0], c[1], c[2], c[3])?)
            }
        })
    }
}

fn field_in_chart(point: &ChartPoint, coords: [f64; 4], params: &Params) -> [f64; 4] {
    match point {
        ChartPoint::Spherical(_) => {
            bracket::canonical_field(&SphericalHamiltonian(*params), coords)
        }
        ChartPoint::Pole(p) => {
            bracket::canonical_field(&PoleHamiltonian(*params, p.hemisphere), coords)
        }
    }
}

/// One implicit-midpoint step `y' = y + dt·f((y+y')/2)` in the point's own
/// chart. `dt` may be negative; the scheme is time-symmetric, so stepping
/// +dt then −dt reproduces the input to solver tolerance.
pub fn step_implicit_midpoint(
    point: &ChartPoint,
    dt: f64,
    params: &Params,
    tol: f64,
    max_iters: u32,
) -> Result<ChartPoint, DynamicsError> {
    if dt == 0.0 {
        return Ok(*point);
    }
    if !dt.is_finite() {
        return Err(DynamicsError::BadStep(dt));
    }
    let y = point.coords();
    let half = 0.5 * dt;
    // Fixed point m = y + (dt/2) f(m), started from an explicit half step.
    let mut m = {
        let f = field_in_chart(point, y, params);
        std::array::from_fn(|i| y[i] + half * f[i])
    };
    let mut converged = false;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        let f = field_in_chart(point, m, params);
        let next: [f64; 4] = std::array::from_fn(|i| y[i] + half * f[i]);
        residual = (0..4)
            .map(|i| (next[i] - m[i]).abs())
            .fold(0.0, f64::max);
        let scale = 1.0 + (0..4).map(|i| m[i].abs()).fold(0.0, f64::max);
        m = next;
        if residual <= tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(DynamicsError::FixedPointDiverged {
            residual,
            iters: max_iters,
        });
    }
    let out: [f64; 4] = std::array::from_fn(|i| 2.0 * m[i] - y[i]);
    point.with_coords(out).map_err(DynamicsError::from)
}

/// Switches chart when |z| leaves the hysteresis thresholds inside the band.
/// Continuity across a switch is exact composition of the canonical maps.
pub fn reseat_chart(point: ChartPoint, band: (f64, f64)) -> Result<ChartPoint, DynamicsError> {
    let (lo, hi) = band;
    let to_pole_at = lo + 0.8 * (hi - lo);
    let to_spherical_at = lo + 0.2 * (hi - lo);
    let z = point.z();
    match point {
        ChartPoint::Spherical(s) if z.abs() > to_pole_at => {
            let pole = spherical_to_pole(&s, Hemisphere::of_z(z))?;
            Ok(ChartPoint::Pole(pole))
        }
        ChartPoint::Pole(p) if z.abs() < to_spherical_at => {
            Ok(ChartPoint::Spherical(pole_to_spherical(&p)?))
        }
        other => Ok(other),
    }
}

/// One recorded trajectory sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sample {
    pub t: f64,
    pub state: GlobalState<f64>,
    pub h: f64,
    pub f: f64,
    /// Casimir residual of the raw recorded state before projection.
    pub projection_residual: f64,
}

/// Max relative drifts and fitted secular slopes of H and F over a run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DriftSummary {
    pub max_rel_h_drift: f64,
    pub max_rel_f_drift: f64,
    pub h_slope: f64,
    pub h_slope_stderr: f64,
    pub f_slope: f64,
    pub f_slope_stderr: f64,
}

/// Time series of recorded states with per-sample H and F values.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub drift: DriftSummary,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectory is never empty")
    }
}

/// Integration failure carrying the partial trajectory up to the failure.
#[derive(Debug)]
pub struct IntegrateFailure {
    pub error: DynamicsError,
    pub partial: Trajectory,
    pub t_failed: f64,
}

impl std::fmt::Display for IntegrateFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "integration failed at t = {}: {}", self.t_failed, self.error)
    }
}

impl std::error::Error for IntegrateFailure {}

fn chart_point_of(initial: &State<f64>, band: (f64, f64)) -> Result<ChartPoint, DynamicsError> {
    let mid = 0.5 * (band.0 + band.1);
    let point = match initial {
        State::Spherical(s) => {
            if s.theta.cos().abs() > mid {
                ChartPoint::Pole(spherical_to_pole(s, Hemisphere::of_z(s.theta.cos()))?)
            } else {
                ChartPoint::Spherical(*s)
            }
        }
        State::Pole(p) => {
            if p.z().abs() > mid {
                ChartPoint::Pole(*p)
            } else {
                ChartPoint::Spherical(pole_to_spherical(p)?)
            }
        }
        State::Global(g) => {
            if g.z.abs() > mid {
                ChartPoint::Pole(charts::global_to_pole(g, Hemisphere::of_z(g.z))?)
            } else {
                ChartPoint::Spherical(charts::global_to_spherical(g)?)
            }
        }
    };
    Ok(point)
}

fn record(point: &ChartPoint, t: f64, params: &Params) -> Sample {
    let state = point.to_state();
    let h = charts::hamiltonian(&state, params);
    let f = charts::integral_f(&state, params);
    let raw = charts::to_global(&state);
    let (projected, projection_residual) = GlobalState::project(raw.coords());
    Sample {
        t,
        state: projected,
        h,
        f,
        projection_residual,
    }
}

/// Integrates the flow of H from `initial` with implicit midpoint and chart
/// switching. `config.t_end` may be negative for a backward run.
pub fn integrate(
    initial: &State<f64>,
    params: &Params,
    config: &IntegratorConfig,
) -> Result<Trajectory, Box<IntegrateFailure>> {
    let fail = |error: DynamicsError, samples: Vec<Sample>, t: f64| {
        Box::new(IntegrateFailure {
            error,
            partial: Trajectory {
                drift: drift_report(&samples),
                samples,
            },
            t_failed: t,
        })
    };
    if let Err(e) = config.validate() {
        return Err(fail(e, Vec::new(), 0.0));
    }

    let dt = if config.t_end >= 0.0 { config.dt } else { -config.dt };
    let n_steps = (config.t_end / dt).round().max(0.0) as u64;
    let stride = config.record_stride.max(1) as u64;

    let mut point = match chart_point_of(initial, config.switch_band) {
        Ok(p) => p,
        Err(e) => return Err(fail(e, Vec::new(), 0.0)),
    };
    let mut samples = Vec::with_capacity((n_steps / stride + 2) as usize);
    samples.push(record(&point, 0.0, params));

    for k in 0..n_steps {
        let t = k as f64 * dt;
        point = match step_implicit_midpoint(
            &point,
            dt,
            params,
            config.fixed_point_tol,
            config.max_fixed_point_iters,
        ) {
            Ok(p) => p,
            Err(e) => return Err(fail(e, samples, t)),
        };
        point = match reseat_chart(point, config.switch_band) {
            Ok(p) => p,
            Err(e) => return Err(fail(e, samples, t + dt)),
        };
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            samples.push(record(&point, (k + 1) as f64 * dt, params));
        }
    }

    Ok(Trajectory {
        drift: drift_report(&samples),
        samples,
    })
}

/// Least-squares slope of y against t with its standard error.
fn fit_slope(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = ts.len();
    if n < 3 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let t_mean = ts.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let stt: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    if stt == 0.0 {
        return (0.0, 0.0);
    }
    let sty: f64 = ts
        .iter()
        .zip(ys)
        .map(|(t, y)| (t - t_mean) * (y - y_mean))
        .sum();
    let slope = sty / stt;
    let ss_res: f64 = ts
        .iter()
        .zip(ys)
        .map(|(t, y)| {
            let fit = y_mean + slope * (t - t_mean);
            (y - fit).powi(2)
        })
        .sum();
    let var = ss_res / (nf - 2.0);
    (slope, (var / stt).sqrt())
}

/// Computes max relative drifts and fitted secular slopes of H and F.
pub fn drift_report(samples: &[Sample]) -> DriftSummary {
    if samples.is_empty() {
        return DriftSummary {
            max_rel_h_drift: 0.0,
            max_rel_f_drift: 0.0,
            h_slope: 0.0,
            h_slope_stderr: 0.0,
            f_slope: 0.0,
            f_slope_stderr: 0.0,
        };
    }
    let h0 = samples[0].h;
    let f0 = samples[0].f;
    let h_scale = h0.abs().max(1e-300);
    let f_scale = f0.abs().max(1.0);
    let max_rel_h_drift = samples
        .iter()
        .map(|s| (s.h - h0).abs() / h_scale)
        .fold(0.0, f64::max);
    let max_rel_f_drift = samples
        .iter()
        .map(|s| (s.f - f0).abs() / f_scale)
        .fold(0.0, f64::max);
    let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let hs: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let fs: Vec<f64> = samples.iter().map(|s| s.f).collect();
    let (h_slope, h_slope_stderr) = fit_slope(&ts, &hs);
    let (f_slope, f_slope_stderr) = fit_slope(&ts, &fs);
    DriftSummary {
        max_rel_h_drift,
        max_rel_f_drift,
        h_slope,
        h_slope_stderr,
        f_slope,
        f_slope_stderr,
    }
}

/// Real p_φ roots of H(θ, φ, p_θ, p_φ) = E at fixed (θ, φ, p_θ):
/// the quadratic ½C p_φ² + (½p_θ² + V − E) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MomentumRoots {
    /// Two distinct roots (−√d, +√d).
    Pair(f64, f64),
    /// Double root at 0 (E exactly at the pointwise minimum).
    Double(f64),
    /// E below the pointwise minimum of H over p_φ.
    NoRealRoot,
}

impl MomentumRoots {
    pub fn roots(self) -> Vec<f64> {
        match self {
            MomentumRoots::Pair(a, b) => vec![a, b],
            MomentumRoots::Double(a) => vec![a],
            MomentumRoots::NoRealRoot => vec![],
        }
    }
}

pub fn solve_momentum_on_energy(
    theta: f64,
    p_theta: f64,
    phi: f64,
    energy: f64,
    params: &Params,
) -> MomentumRoots {
    let c = crate::model::kinetic_c(theta.cos(), params.s);
    let v = crate::model::potential_spherical(theta, phi, params)
        .expect("theta interior checked by caller");
    let rhs = energy - 0.5 * p_theta * p_theta - v;
    if rhs < 0.0 {
        return MomentumRoots::NoRealRoot;
    }
    if rhs == 0.0 {
        return MomentumRoots::Double(0.0);
    }
    let root = (2.0 * rhs / c).sqrt();
    MomentumRoots::Pair(-root, root)
}

/// Classical RK4 on a canonical chart (non-symplectic control integrator).
pub fn rk4_step_canonical(point: &ChartPoint, dt: f64, params: &Params) -> Result<ChartPoint, DynamicsError> {
    let y = point.coords();
    let f = |c: [f64; 4]| field_in_chart(point, c, params);
    let add = |x: [f64; 4], k: [f64; 4], s: f64| -> [f64; 4] {
        std::array::from_fn(|i| x[i] + s * k[i])
    };
    let k1 = f(y);
    let k2 = f(add(y, k1, dt / 2.0));
    let k3 = f(add(y, k2, dt / 2.0));
    let k4 = f(add(y, k3, dt));
    let out: [f64; 4] =
        std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    point.with_coords(out).map_err(DynamicsError::from)
}

/// Classical RK4 directly on the Lie-Poisson field in the global chart
/// (chartless control for chart-switch invisibility tests).
pub fn rk4_step_global(u: [f64; 6], dt: f64, params: &Params) -> [f64; 6] {
    let h = bracket::GlobalHamiltonian(*params);
    let f = |c: [f64; 6]| bracket::lie_poisson_field(&h, c);
    let add = |x: [f64; 6], k: [f64; 6], s: f64| -> [f64; 6] {
        std::array::from_fn(|i| x[i] + s * k[i])
    };
    let k1 = f(u);
    let k2 = f(add(u, k1, dt / 2.0));
    let k3 = f(add(u, k2, dt / 2.0));
    let k4 = f(add(u, k3, dt));
    std::array::from_fn(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}
