//! The verification battery: every analytic property of the system family,
//! run as a machine-readable pass/fail report.
//!
//! Each check pins its tolerance in code. The battery is what `spheretop
//! verify` executes; the acceptance test suite drives the same checks plus
//! the long dynamics runs.

use crate::bracket::{
    self, eom_complex_residual, gradient, GlobalHamiltonian, GlobalIntegralF, Observable,
    SphericalHamiltonian, SphericalIntegralF,
};
use crate::charts::{self, Hemisphere, State};
use crate::gc::{self, GCParams};
use crate::geometry::{self, MetricProfile};
use crate::model::{self, Params};
use crate::mompoly::{bracket_degree_decomposition, MomentumPolynomial};
use crate::sampling;
use rand::Rng;
use serde::Serialize;

/// Tolerances used by the battery (and mirrored by the acceptance suite).
pub mod tol {
    /// Absolute bound on the Q/P identity residuals over random samples.
    pub const IDENTITY_ABS: f64 = 1e-14;
    /// Scaled bound |{f,g}|/(1+‖∇f‖‖∇g‖) for commutation checks.
    pub const BRACKET_SCALED: f64 = 1e-9;
    /// Bound on degree-decomposition coefficients at a basepoint.
    pub const DEGREE_COEFF: f64 = 1e-10;
    /// Cross-chart agreement of H and F at overlap points.
    pub const CHART_AGREEMENT: f64 = 1e-11;
    /// Endpoint identity R(−1) = (s−1)².
    pub const R_ENDPOINT: f64 = 1e-12;
    /// Round-sphere curvature defect.
    pub const CURVATURE_ROUND: f64 = 1e-8;
    /// Curvature vs independent stencil oracle.
    pub const CURVATURE_ORACLE: f64 = 1e-6;
    /// Bracket-field agreement with the closed-form equations of motion at
    /// the resolved orientation.
    pub const EOM_RESOLVED: f64 = 1e-10;
    /// Non-proportionality margin of the two kinetic profiles.
    pub const NONPROPORTIONALITY: f64 = 0.01;
}

/// One named check with its worst residual.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            note: None,
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

/// Battery configuration: the fixed parameter point for the parametric
/// checks plus the sampling seed.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub params: Params,
    pub gc: GCParams,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            params: Params::new(1.0, 0.0, 2.0).expect("default params valid"),
            gc: GCParams::new(1.0, 2.5).expect("default GC params valid"),
            seed: sampling::DEFAULT_SEED,
        }
    }
}

/// Full battery outcome.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl VerifyReport {
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{}: {} (residual {:.3e}, tolerance {:.1e}){}",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.residual,
                    c.tolerance,
                    c.note
                        .as_ref()
                        .map(|n| format!(" [{n}]"))
                        .unwrap_or_default()
                )
            })
            .collect()
    }
}

fn check_identities(seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (z, s) = sampling::random_z_s(&mut rng);
        let (rq, rp) = model::check_identities(z, s);
        worst = worst.max(rq.abs()).max(rp.abs());
    }
    CheckResult::new("structure-identities", worst, tol::IDENTITY_ABS)
}

fn check_canonical_commutation(seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = sampling::random_params(&mut rng);
        let st = sampling::random_spherical_state(&mut rng, 0.1, 2.0);
        let res = bracket::scaled_canonical_residual(
            &SphericalHamiltonian(p),
            &SphericalIntegralF(p),
            st.coords(),
        );
        worst = worst.max(res);
    }
    CheckResult::new("canonical-commutation", worst, tol::BRACKET_SCALED)
}

fn check_lie_poisson_commutation(seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed.wrapping_add(1));
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = sampling::random_params(&mut rng);
        let g = sampling::random_global_state(&mut rng, 0.1, 2.0);
        let res = bracket::scaled_lie_poisson_residual(
            &GlobalHamiltonian(p),
            &GlobalIntegralF(p),
            g.coords(),
        );
        worst = worst.max(res);
    }
    CheckResult::new("lie-poisson-commutation", worst, tol::BRACKET_SCALED)
}

fn check_pole_commutation(seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed.wrapping_add(7));
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 500 {
        let p = sampling::random_params(&mut rng);
        let st = sampling::random_spherical_state(&mut rng, 0.1, 2.0);
        let z = st.theta.cos();
        if z.abs() < 0.2 {
            continue;
        }
        n += 1;
        let hemi = Hemisphere::of_z(z);
        let pole = charts::spherical_to_pole(&st, hemi).expect("hemisphere matches");
        let res = bracket::scaled_canonical_residual(
            &bracket::PoleHamiltonian(p, hemi),
            &bracket::PoleIntegralF(p, hemi),
            pole.coords(),
        );
        worst = worst.max(res);
    }
    CheckResult::new("pole-chart-commutation", worst, tol::BRACKET_SCALED)
}

fn check_degree_decomposition(params: &Params, seed: u64) -> CheckResult {
    let h = MomentumPolynomial::hamiltonian(params);
    let f = MomentumPolynomial::integral_f(params);
    let mut rng = sampling::rng(seed.wrapping_add(2));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let theta = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
        let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let coeffs = bracket_degree_decomposition(&h, &f, (theta, phi))
            .expect("degrees within bounds");
        for &v in coeffs.values() {
            worst = worst.max(v.abs());
        }
    }
    let result = CheckResult::new("degree-decomposition", worst, tol::DEGREE_COEFF);
    if params.a == 0.0 {
        result.with_note("trivially zero (A = 0): p_phi is a momentum-map integral".to_string())
    } else {
        result
    }
}

fn check_positivity() -> CheckResult {
    // min R over 50 values of s in (1, 10] on a 10^4 z-grid, the R(−1)
    // endpoint identity, and kinetic-form eigenvalues including an (s, z)
    // with 1 + G < 0. Residual reported as max(0, −margins) plus endpoint
    // defect, so 0 means everything holds strictly.
    let mut worst: f64 = 0.0;
    for k in 1..=50 {
        let s = 1.0 + 9.0 * k as f64 / 50.0;
        let report = geometry::positivity_check(s, 10_000).expect("s > 1");
        worst = worst.max(-report.min_r.min(0.0));
        worst = worst.max(-report.min_kinetic_eigenvalue.min(0.0));
        worst = worst.max(
            ((report.r_at_minus_one - report.r_endpoint_expected).abs() - tol::R_ENDPOINT)
                .max(0.0),
        );
    }
    // Witness that the check covers a region with 1 + G < 0.
    let witness = 1.0 + model::g(-0.9, 1.5);
    let mut result = CheckResult::new("positivity", worst, 0.0);
    result.passed = worst == 0.0 && witness < 0.0;
    result.with_note(format!("includes 1+G(z) = {witness:.3} < 0 at s=1.5, z=-0.9"))
}

fn check_chart_consistency(seed: u64) -> CheckResult {
    let p = Params::new(0.7, -0.3, 1.5).expect("valid");
    let mut rng = sampling::rng(seed.wrapping_add(3));
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let st = sampling::random_spherical_state(&mut rng, 0.05, 2.0);
        let z = st.theta.cos();
        if z.abs() > 0.95 {
            continue;
        }
        n += 1;
        let h_sph = charts::hamiltonian(&State::Spherical(st), &p);
        let f_sph = charts::integral_f(&State::Spherical(st), &p);
        let g = charts::spherical_to_global(&st);
        let h_glob = charts::hamiltonian(&State::Global(g), &p);
        let f_glob = charts::integral_f(&State::Global(g), &p);
        worst = worst.max((h_sph - h_glob).abs() / (1.0 + h_sph.abs()));
        worst = worst.max((f_sph - f_glob).abs() / (1.0 + f_sph.abs()));
        if z.abs() >= 0.8 {
            let pole = charts::spherical_to_pole(&st, Hemisphere::of_z(z)).expect("in band");
            let h_pole = charts::hamiltonian(&State::Pole(pole), &p);
            let f_pole = charts::integral_f(&State::Pole(pole), &p);
            worst = worst.max((h_sph - h_pole).abs() / (1.0 + h_sph.abs()));
            worst = worst.max((f_sph - f_pole).abs() / (1.0 + f_sph.abs()));
        }
    }
    CheckResult::new("chart-consistency", worst, tol::CHART_AGREEMENT)
}

fn check_curvature_round() -> CheckResult {
    let grid: Vec<f64> = (1..500)
        .map(|i| std::f64::consts::PI * i as f64 / 500.0)
        .collect();
    let kappa = geometry::curvature_profile(&MetricProfile::Round, &grid).expect("interior grid");
    let worst = kappa
        .iter()
        .map(|k| (k - 1.0).abs())
        .fold(0.0, f64::max);
    CheckResult::new("curvature-round", worst, tol::CURVATURE_ROUND)
}

fn check_curvature_gc_oracle() -> CheckResult {
    // Independent 5-point stencil on the profile function.
    let f = |t: f64| (1.0 / (t.sin().powi(-2) + 3.0)).sqrt();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for i in 2..198 {
        let t = std::f64::consts::PI * i as f64 / 200.0;
        let second = (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h)
            - f(t - 2.0 * h))
            / (12.0 * h * h);
        let oracle = -second / f(t);
        let kappa = geometry::curvature_at(&MetricProfile::GoryachevChaplygin, t, 0.0);
        worst = worst.max((kappa - oracle).abs());
    }
    CheckResult::new("curvature-gc-oracle", worst, tol::CURVATURE_ORACLE)
}

fn check_gc_commutation(gc: &GCParams, seed: u64) -> CheckResult {
    let mut rng = sampling::rng(seed.wrapping_add(4));
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let st = sampling::random_spherical_state(&mut rng, 0.1, 2.0);
        let res = bracket::scaled_canonical_residual(
            &gc::GcHamiltonian(*gc),
            &gc::GcIntegral(*gc),
            st.coords(),
        );
        worst = worst.max(res);
    }
    CheckResult::new("gc-commutation", worst, tol::BRACKET_SCALED)
}

fn check_gc_geodesic_resolution(gc: &GCParams, seed: u64) -> CheckResult {
    match gc::gc_geodesic_system(gc, seed) {
        Ok(system) => {
            let resolved = system
                .resolution
                .table
                .iter()
                .find(|v| v.variant == system.resolution.resolved)
                .expect("resolved variant is in the table");
            let unique = system.resolution.passing == 1 || gc.a1 == 0.0;
            let mut result = CheckResult::new(
                "gc-geodesic-resolution",
                resolved.max_scaled_residual,
                tol::BRACKET_SCALED,
            );
            result.passed &= unique;
            result.with_note(format!(
                "{} variant(s) pass; resolved {:?}",
                system.resolution.passing, system.resolution.resolved
            ))
        }
        Err(e) => CheckResult::new("gc-geodesic-resolution", f64::INFINITY, tol::BRACKET_SCALED)
            .with_note(e.to_string()),
    }
}

fn check_maupertuis_resolution(params: &Params, seed: u64) -> CheckResult {
    let max_v = geometry::max_potential(params).value;
    // Twice the potential maximum when that is positive; a unit margin
    // otherwise (A = 0 with c ≤ 0 pushes max V to 0 or below).
    let h = if max_v > 0.0 { 2.0 * max_v } else { max_v + 1.0 };
    match geometry::maupertuis_system(params, h, seed) {
        Ok(system) => {
            let resolved = system
                .resolution
                .table
                .iter()
                .find(|v| v.variant == system.resolution.resolved)
                .expect("resolved variant is in the table");
            let unique = system.resolution.passing == 1 || params.a == 0.0;
            let mut result = CheckResult::new(
                "maupertuis-resolution",
                resolved.max_scaled_residual,
                tol::BRACKET_SCALED,
            );
            result.passed &= unique;
            result.with_note(format!(
                "{} variant(s) pass at h = {h:.6}; resolved {:?}",
                system.resolution.passing, system.resolution.resolved
            ))
        }
        Err(e) => CheckResult::new("maupertuis-resolution", f64::INFINITY, tol::BRACKET_SCALED)
            .with_note(e.to_string()),
    }
}

fn check_eom_orientation(params: &Params, seed: u64) -> CheckResult {
    let c0 = Params::new(params.a, 0.0, params.s).expect("c = 0 variant");
    let mut rng = sampling::rng(seed.wrapping_add(5));
    let mut worst: f64 = 0.0;
    let mut sign = 1.0;
    for _ in 0..100 {
        let g = sampling::random_global_state(&mut rng, 0.1, 2.0);
        let report = eom_complex_residual(&g, &c0).expect("c = 0");
        worst = worst.max(report.residual_resolved);
        sign = report.resolved_sign;
    }
    let result = CheckResult::new("eom-orientation", worst, tol::EOM_RESOLVED);
    if sign < 0.0 {
        result.with_note(
            "closed-form equations of motion match the bracket field only after time reversal \
             (documented discrepancy; bracket-derived field is ground truth)"
                .to_string(),
        )
    } else {
        result
    }
}

fn check_gradient_convergence(params: &Params, seed: u64) -> CheckResult {
    // Central finite differences at steps {1e-2, 3e-3, 1e-3} against the
    // dual gradient; the fitted log-log slope of the defect must be ~2.
    let mut rng = sampling::rng(seed.wrapping_add(6));
    let h_obs = SphericalHamiltonian(*params);
    let f_obs = SphericalIntegralF(*params);
    let steps = [1e-2, 3e-3, 1e-3];
    let mut worst_defect: f64 = 0.0;
    for _ in 0..20 {
        let st = sampling::random_spherical_state(&mut rng, 0.35, 1.2);
        let x = st.coords();
        for pick in 0..2 {
            let eval = |x: [f64; 4]| {
                if pick == 0 {
                    h_obs.eval(x)
                } else {
                    f_obs.eval(x)
                }
            };
            let exact = if pick == 0 {
                gradient(&h_obs, x)
            } else {
                gradient(&f_obs, x)
            };
            let errs: Vec<f64> = steps
                .iter()
                .map(|&h| {
                    let mut e: f64 = 0.0;
                    for i in 0..4 {
                        let mut xp = x;
                        let mut xm = x;
                        xp[i] += h;
                        xm[i] -= h;
                        let fd = (eval(xp) - eval(xm)) / (2.0 * h);
                        e = e.max((fd - exact[i]).abs());
                    }
                    e.max(1e-300)
                })
                .collect();
            let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
            let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
            let n = xs.len() as f64;
            let xm = xs.iter().sum::<f64>() / n;
            let ym = ys.iter().sum::<f64>() / n;
            let slope = xs
                .iter()
                .zip(&ys)
                .map(|(a, b)| (a - xm) * (b - ym))
                .sum::<f64>()
                / xs.iter().map(|a| (a - xm) * (a - xm)).sum::<f64>();
            worst_defect = worst_defect.max((slope - 2.0).abs());
        }
    }
    CheckResult::new("gradient-convergence", worst_defect, 0.1)
        .with_note("|fitted FD slope - 2| over 20 states, H and F".to_string())
}

/// Runs the full battery.
pub fn run_battery(config: &VerifyConfig) -> VerifyReport {
    let checks = vec![
        check_identities(config.seed),
        check_canonical_commutation(config.seed),
        check_lie_poisson_commutation(config.seed),
        check_pole_commutation(config.seed),
        check_degree_decomposition(&config.params, config.seed),
        check_positivity(),
        check_chart_consistency(config.seed),
        check_curvature_round(),
        check_curvature_gc_oracle(),
        check_gc_commutation(&config.gc, config.seed),
        check_gc_geodesic_resolution(&config.gc, config.seed),
        check_maupertuis_resolution(&config.params, config.seed),
        check_eom_orientation(&config.params, config.seed),
        check_gradient_convergence(&config.params, config.seed),
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    let first_failure = checks.iter().find(|c| !c.passed).map(|c| c.name.clone());
    VerifyReport {
        config: config.clone(),
        checks,
        all_passed,
        first_failure,
    }
}
