//! Acceptance suite: every exit criterion at its pinned tolerance, one
//! pass/fail line per criterion (run with `cargo test --test acceptance --
//! --nocapture` to see the lines).

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use spheretop::bracket::{
    self, eom_complex_residual, gradient, GlobalHamiltonian, GlobalIntegralF, Observable,
    SphericalHamiltonian, SphericalIntegralF,
};
use spheretop::charts::{self, Hemisphere, SphericalState, State};
use spheretop::dynamics::{self, IntegratorConfig, Trajectory};
use spheretop::gc::{self, GCParams};
use spheretop::geometry;
use spheretop::model::{self, Params};
use spheretop::mompoly::{bracket_degree_decomposition, MomentumPolynomial};
use spheretop::sampling;
use std::time::Instant;

struct Criterion {
    name: &'static str,
    details: Vec<String>,
    failed: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion {
            name,
            details: Vec::new(),
            failed: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        if ok {
            self.details.push(what);
        } else {
            self.failed.push(what);
        }
    }

    fn finish(self) {
        let status = if self.failed.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {status} ({})",
            self.name,
            self.details
                .iter()
                .chain(self.failed.iter())
                .cloned()
                .collect::<Vec<_>>()
                .join("; ")
        );
        assert!(
            self.failed.is_empty(),
            "criterion {} failed: {:?}",
            self.name,
            self.failed
        );
    }
}

fn demo_params() -> Params {
    Params::new(1.0, 0.0, 2.0).unwrap()
}

#[test]
fn criterion_1_identity_suite() {
    let start = Instant::now();
    let mut c = Criterion::new("1 (identity suite)");

    let mut rng = sampling::rng(42);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (z, s) = sampling::random_z_s(&mut rng);
        let (rq, rp) = model::check_identities(z, s);
        worst = worst.max(rq.abs()).max(rp.abs());
    }
    c.require(
        worst <= 1e-14,
        format!("max |rQ|,|rP| = {worst:.3e} <= 1e-14 over 1e4 samples"),
    );

    // Exact-rational route: identical vanishing, no roundoff involved.
    let rat = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let int = |n: i64| BigRational::from(BigInt::from(n));
    let mut exact_ok = true;
    for (zn, zd, sn, sd) in [
        (37, 100, 19, 10),
        (-99, 100, 101, 100),
        (1, 1, 3, 1),
        (-1, 1, 7, 2),
        (0, 1, 2, 1),
        (73, 91, 1234, 567),
    ] {
        let z = rat(zn, zd);
        let s = rat(sn, sd);
        let w = &z + &s;
        let q = int(3) * &z * &z + int(2) * &s * &z - int(1);
        let p = int(3) * &z * &z + int(4) * &s * &z + int(1);
        let rq = &q - (int(2) * &z * &w + &z * &z - int(1));
        let rp = &p - (int(4) * &z * &w + int(1) - &z * &z);
        exact_ok &= rq == int(0) && rp == int(0);
    }
    c.require(exact_ok, "exact-rational identities vanish identically".into());

    let elapsed = start.elapsed().as_secs_f64();
    c.require(elapsed < 1.0, format!("runtime {elapsed:.3}s < 1s"));
    c.finish();
}

#[test]
fn criterion_2_commutation() {
    let start = Instant::now();
    let mut c = Criterion::new("2 (commutation)");

    let mut rng = sampling::rng(42);
    let mut worst_canonical: f64 = 0.0;
    for _ in 0..1000 {
        let p = sampling::random_params(&mut rng);
        let st = sampling::random_spherical_state(&mut rng, 0.1, 2.0);
        worst_canonical = worst_canonical.max(bracket::scaled_canonical_residual(
            &SphericalHamiltonian(p),
            &SphericalIntegralF(p),
            st.coords(),
        ));
    }
    c.require(
        worst_canonical <= 1e-9,
        format!("canonical |{{H,F}}| scaled = {worst_canonical:.3e} <= 1e-9 at 1000 states"),
    );

    let mut worst_lp: f64 = 0.0;
    for _ in 0..1000 {
        let p = sampling::random_params(&mut rng);
        let g = sampling::random_global_state(&mut rng, 0.1, 2.0);
        worst_lp = worst_lp.max(bracket::scaled_lie_poisson_residual(
            &GlobalHamiltonian(p),
            &GlobalIntegralF(p),
            g.coords(),
        ));
    }
    c.require(
        worst_lp <= 1e-9,
        format!("Lie-Poisson residual = {worst_lp:.3e} <= 1e-9 at Casimir states"),
    );

    let params = demo_params();
    let h = MomentumPolynomial::hamiltonian(&params);
    let f = MomentumPolynomial::integral_f(&params);
    let mut worst_coeff: f64 = 0.0;
    for _ in 0..100 {
        let theta = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
        let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let coeffs = bracket_degree_decomposition(&h, &f, (theta, phi)).unwrap();
        for &v in coeffs.values() {
            worst_coeff = worst_coeff.max(v.abs());
        }
    }
    c.require(
        worst_coeff <= 1e-10,
        format!("degree-decomposition coefficients = {worst_coeff:.3e} <= 1e-10 at 100 basepoints"),
    );

    let elapsed = start.elapsed().as_secs_f64();
    c.require(elapsed < 5.0, format!("runtime {elapsed:.3}s < 5s"));
    c.finish();
}

#[test]
fn criterion_3_positivity() {
    let start = Instant::now();
    let mut c = Criterion::new("3 (positivity)");

    let mut min_r = f64::INFINITY;
    let mut worst_endpoint: f64 = 0.0;
    for k in 1..=50 {
        let s = 1.0 + 9.0 * k as f64 / 50.0;
        let report = geometry::positivity_check(s, 10_000).unwrap();
        min_r = min_r.min(report.min_r);
        worst_endpoint =
            worst_endpoint.max((report.r_at_minus_one - report.r_endpoint_expected).abs());
    }
    c.require(
        min_r > 0.0,
        format!("min R = {min_r:.3e} > 0 over 50 s-values on 1e4-point grids"),
    );
    c.require(
        worst_endpoint <= 1e-12,
        format!("|R(-1) - (s-1)^2| = {worst_endpoint:.3e} <= 1e-12"),
    );

    // 200×200 position grid per chart, for s including one with 1+G < 0.
    // The spherical form depends on θ only, so its grid collapses to the
    // θ axis; the pole charts carry the full two-dimensional grids.
    let witness = 1.0 + model::g(-0.9, 1.5);
    let mut min_eig = f64::INFINITY;
    for s in [1.01, 1.5, 5.0] {
        for i in 1..200 {
            let theta = std::f64::consts::PI * i as f64 / 200.0;
            let m = charts::kinetic_quadratic_form_spherical(theta, s);
            min_eig = min_eig.min(charts::symmetric_eigenvalues(m)[0]);
        }
        for i in 0..200 {
            let radius = 0.6 * i as f64 / 200.0;
            for j in 0..200 {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / 200.0;
                for hemi in [Hemisphere::North, Hemisphere::South] {
                    let m = charts::kinetic_quadratic_form_pole(
                        radius * ang.cos(),
                        radius * ang.sin(),
                        hemi,
                        s,
                    );
                    min_eig = min_eig.min(charts::symmetric_eigenvalues(m)[0]);
                }
            }
        }
    }
    c.require(
        witness < 0.0,
        format!("grid covers 1+G = {witness:.3} < 0 at (s, z) = (1.5, -0.9)"),
    );
    c.require(
        min_eig > 0.0,
        format!("min kinetic eigenvalue = {min_eig:.3e} > 0 over 200x200 grids"),
    );

    let elapsed = start.elapsed().as_secs_f64();
    c.require(elapsed < 5.0, format!("runtime {elapsed:.3}s < 5s"));
    c.finish();
}

#[test]
fn criterion_4_chart_gluing() {
    let mut c = Criterion::new("4 (chart gluing)");
    let p = Params::new(0.7, -0.3, 1.5).unwrap();
    let mut rng = sampling::rng(42);
    let mut worst_h: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    let mut worst_f_forms: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let st = sampling::random_spherical_state(&mut rng, 0.05, 2.0);
        let z = st.theta.cos();
        if !(0.8..=0.9).contains(&z.abs()) {
            continue;
        }
        n += 1;
        let pole = charts::spherical_to_pole(&st, Hemisphere::of_z(z)).unwrap();
        let g = charts::spherical_to_global(&st);
        let h_sph = charts::hamiltonian(&State::Spherical(st), &p);
        let h_pole = charts::hamiltonian(&State::Pole(pole), &p);
        let h_glob = charts::hamiltonian(&State::Global(g), &p);
        worst_h = worst_h.max((h_sph - h_pole).abs() / (1.0 + h_sph.abs()));
        worst_h = worst_h.max((h_sph - h_glob).abs() / (1.0 + h_sph.abs()));
        // Spherical four-term long form against the global short form on the
        // Casimir level set, plus the pole-chart gluing.
        let f_sph = charts::integral_f(&State::Spherical(st), &p);
        let f_pole = charts::integral_f(&State::Pole(pole), &p);
        let f_glob = charts::integral_f(&State::Global(g), &p);
        worst_f = worst_f.max((f_sph - f_pole).abs() / (1.0 + f_sph.abs()));
        worst_f_forms = worst_f_forms.max((f_sph - f_glob).abs() / (1.0 + f_sph.abs()));
    }
    c.require(
        worst_h <= 1e-11,
        format!("H agreement across charts = {worst_h:.3e} <= 1e-11 at 1000 overlap points"),
    );
    c.require(
        worst_f <= 1e-11,
        format!("F agreement spherical/pole = {worst_f:.3e} <= 1e-11"),
    );
    c.require(
        worst_f_forms <= 1e-11,
        format!("F long form vs global short form = {worst_f_forms:.3e} <= 1e-11"),
    );
    c.finish();
}

#[test]
fn criterion_5_dynamics() {
    let start = Instant::now();
    let mut c = Criterion::new("5 (dynamics)");
    let p = demo_params();
    let demo = State::Spherical(SphericalState::new(1.4, 3.0, 0.1, 0.2).unwrap());

    // Main run: s=2, A=1, c=0, dt=1e-3, T=100.
    let config = IntegratorConfig {
        dt: 1e-3,
        t_end: 100.0,
        record_stride: 20,
        ..Default::default()
    };
    let traj = dynamics::integrate(&demo, &p, &config).unwrap();
    c.require(
        traj.drift.max_rel_h_drift <= 1e-8,
        format!(
            "max relative H drift = {:.3e} <= 1e-8 (dt=1e-3, T=100)",
            traj.drift.max_rel_h_drift
        ),
    );
    c.require(
        traj.drift.max_rel_f_drift <= 1e-5,
        format!(
            "max relative F drift = {:.3e} <= 1e-5",
            traj.drift.max_rel_f_drift
        ),
    );
    // Non-secularity: the T=100 window covers less than one slow beat of
    // the torus-deformation oscillation, which aliases into a spurious
    // trend, so the slope is fitted over a 4x window (the F deviation
    // saturates: its max is horizon-independent out to T=1600).
    let long = dynamics::integrate(
        &demo,
        &p,
        &IntegratorConfig {
            dt: 1e-3,
            t_end: 400.0,
            record_stride: 20,
            ..Default::default()
        },
    )
    .unwrap();
    let secular = long.drift.f_slope.abs() * 400.0;
    let secular_bound =
        (2.0 * long.drift.f_slope_stderr * 400.0).max(0.25 * long.drift.max_rel_f_drift);
    c.require(
        secular <= secular_bound,
        format!("F secular component {secular:.3e} consistent with 0 (bound {secular_bound:.3e})"),
    );
    c.require(
        long.drift.max_rel_f_drift <= 1.5 * traj.drift.max_rel_f_drift,
        format!(
            "F deviation saturates: drift(T=400) = {:.3e} vs drift(T=100) = {:.3e}",
            long.drift.max_rel_f_drift, traj.drift.max_rel_f_drift
        ),
    );

    // Order-2 endpoint convergence: halving dt divides the endpoint error by
    // about 4 against a dt/16 reference.
    let endpoint = |dt: f64| -> Trajectory {
        let config = IntegratorConfig {
            dt,
            t_end: 10.0,
            record_stride: usize::MAX,
            ..Default::default()
        };
        dynamics::integrate(&demo, &p, &config).unwrap()
    };
    let reference = endpoint(2.5e-4);
    let err = |t: &Trajectory| -> f64 {
        let a = t.final_sample().state.coords();
        let b = reference.final_sample().state.coords();
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let ratio = err(&endpoint(4e-3)) / err(&endpoint(2e-3));
    c.require(
        (3.5..=4.5).contains(&ratio),
        format!("halving dt error ratio = {ratio:.3} in [3.5, 4.5]"),
    );

    // Forward-backward reversibility of the stepper.
    let pt = dynamics::ChartPoint::Spherical(SphericalState::new(1.4, 3.0, 0.1, 0.2).unwrap());
    let fwd = dynamics::step_implicit_midpoint(&pt, 1e-3, &p, 1e-14, 50).unwrap();
    let back = dynamics::step_implicit_midpoint(&fwd, -1e-3, &p, 1e-14, 50).unwrap();
    let reversibility = match (pt, back) {
        (dynamics::ChartPoint::Spherical(a), dynamics::ChartPoint::Spherical(b)) => a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
        _ => f64::INFINITY,
    };
    c.require(
        reversibility <= 1e-12,
        format!("forward-backward reversibility = {reversibility:.3e} <= 1e-12"),
    );

    let elapsed = start.elapsed().as_secs_f64();
    c.require(elapsed < 30.0, format!("runtime {elapsed:.3}s < 30s"));
    c.finish();
}

#[test]
fn criterion_6_maupertuis() {
    let mut c = Criterion::new("6 (Maupertuis)");
    let p = demo_params();
    let max_v = geometry::max_potential(&p).value;
    let h = 2.0 * max_v;
    let system = geometry::maupertuis_system(&p, h, 42).unwrap();
    c.require(
        system.resolution.passing == 1,
        format!(
            "exactly one commuting F_geod variant at 1000 states (found {}, resolved {:?})",
            system.resolution.passing, system.resolution.resolved
        ),
    );
    let resolved_residual = system
        .resolution
        .table
        .iter()
        .find(|v| v.variant == system.resolution.resolved)
        .unwrap()
        .max_scaled_residual;
    c.require(
        resolved_residual <= 1e-9,
        format!("resolved variant bracket residual = {resolved_residual:.3e} <= 1e-9"),
    );

    // Correspondence along a level-h trajectory.
    let (theta, phi, p_theta) = (1.2, 0.7, 0.3);
    let roots = dynamics::solve_momentum_on_energy(theta, p_theta, phi, h, &p).roots();
    let seed_state = SphericalState::new(theta, phi, p_theta, *roots.last().unwrap()).unwrap();
    let config = IntegratorConfig {
        dt: 2e-4,
        t_end: 20.0,
        record_stride: 100,
        ..Default::default()
    };
    let report = geometry::geodesic_correspondence_check(&system, &seed_state, &config).unwrap();
    c.require(
        report.max_geodesic_residual <= 1e-6,
        format!(
            "reparametrized trajectory satisfies the geodesic equations: residual {:.3e} <= 1e-6",
            report.max_geodesic_residual
        ),
    );
    c.require(
        report.max_f_geod_drift <= 1e-6,
        format!(
            "resolved F_geod conserved along it: drift {:.3e} <= 1e-6",
            report.max_f_geod_drift
        ),
    );
    c.finish();
}

#[test]
fn criterion_7_reference_family() {
    let mut c = Criterion::new("7 (reference family)");
    let gcp = GCParams::new(1.0, 2.5).unwrap();

    let mut rng = sampling::rng(42);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let st = sampling::random_spherical_state(&mut rng, 0.1, 2.0);
        worst = worst.max(bracket::scaled_canonical_residual(
            &gc::GcHamiltonian(gcp),
            &gc::GcIntegral(gcp),
            st.coords(),
        ));
    }
    c.require(
        worst <= 1e-9,
        format!("|{{H1,F1}}| scaled = {worst:.3e} <= 1e-9 at 1000 states (A1=1)"),
    );

    let system = gc::gc_geodesic_system(&gcp, 42).unwrap();
    let resolved_residual = system
        .resolution
        .table
        .iter()
        .find(|v| v.variant == system.resolution.resolved)
        .unwrap()
        .max_scaled_residual;
    c.require(
        system.resolution.passing == 1 && resolved_residual <= 1e-9,
        format!(
            "resolved {{H2,F2}} residual = {resolved_residual:.3e} <= 1e-9 (unique variant)"
        ),
    );

    let report = gc::curvature_comparison(&demo_params(), 400).unwrap();
    let new_range = report.kappa_new_range.1 - report.kappa_new_range.0;
    let gc_range = report.kappa_gc_range.1 - report.kappa_gc_range.0;
    c.require(
        new_range > 0.0 && gc_range > 0.0,
        format!("both curvature profiles nonconstant (ranges {new_range:.3}, {gc_range:.3})"),
    );
    c.require(
        report.nonproportionality_margin > 0.01,
        format!(
            "non-proportionality margin = {:.4} > 0.01 at s=2",
            report.nonproportionality_margin
        ),
    );
    c.finish();
}

#[test]
fn criterion_8_gradient_engine() {
    let mut c = Criterion::new("8 (gradient engine)");
    let p = demo_params();
    let h_obs = SphericalHamiltonian(p);
    let f_obs = SphericalIntegralF(p);
    let steps = [1e-2, 3e-3, 1e-3];
    let mut rng = sampling::rng(42);
    let mut slopes = Vec::new();
    for _ in 0..20 {
        let st = sampling::random_spherical_state(&mut rng, 0.35, 1.2);
        let x = st.coords();
        for pick in 0..2 {
            let eval = |x: [f64; 4]| -> f64 {
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
                        e = e.max(((eval(xp) - eval(xm)) / (2.0 * h) - exact[i]).abs());
                    }
                    e.max(1e-300)
                })
                .collect();
            let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
            let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
            let xm = xs.iter().sum::<f64>() / 3.0;
            let ym = ys.iter().sum::<f64>() / 3.0;
            let slope = xs
                .iter()
                .zip(&ys)
                .map(|(a, b)| (a - xm) * (b - ym))
                .sum::<f64>()
                / xs.iter().map(|a| (a - xm) * (a - xm)).sum::<f64>();
            slopes.push(slope);
        }
    }
    let (lo, hi) = slopes
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    c.require(
        lo >= 1.9 && hi <= 2.1,
        format!("finite-difference convergence slopes in [{lo:.3}, {hi:.3}] ⊂ [1.9, 2.1] on H and F at 20 states"),
    );
    c.finish();
}

#[test]
fn criterion_9_eom_cross_check() {
    let mut c = Criterion::new("9 (EOM cross-check)");
    let p = demo_params(); // c = 0
    let mut rng = sampling::rng(42);
    let mut worst_completions: f64 = 0.0;
    let mut worst_complex: f64 = 0.0;
    let mut direct_best: f64 = f64::INFINITY;
    let mut sign = 0.0;
    for _ in 0..200 {
        let g = sampling::random_global_state(&mut rng, 0.1, 2.0);
        let u = g.coords();
        let field = bracket::lie_poisson_field(&GlobalHamiltonian(p), u);
        let report = eom_complex_residual(&g, &p).unwrap();
        sign = report.resolved_sign;
        worst_complex = worst_complex.max(report.residual_resolved);
        direct_best = direct_best.min(report.residual_direct);

        // The completion template L̇_z = −yU and ż = xL_y − yL_x, at the
        // resolved orientation.
        let u_val = model::potential_u(g.z, &p).unwrap();
        let lz_dot_template = -g.y * u_val;
        let z_dot_template = g.x * g.l_y - g.y * g.l_x;
        worst_completions = worst_completions
            .max((field[5] - sign * lz_dot_template).abs())
            .max((field[2] - sign * z_dot_template).abs());
    }
    c.require(
        worst_completions <= 1e-10,
        format!(
            "bracket field reproduces the completion equations at the resolved orientation \
             (sign {sign:+.0}): residual {worst_completions:.3e} <= 1e-10"
        ),
    );
    c.require(
        worst_complex <= 1e-10,
        format!("complex-equation residual (resolved orientation) = {worst_complex:.3e} <= 1e-10"),
    );
    // The direct orientation does not match; this is reported as a
    // documented discrepancy without failing the suite.
    println!(
        "criterion 9 note: direct-orientation residual >= {direct_best:.3e}; the closed-form \
         equations of motion correspond to the time-reversed flow (documented discrepancy, \
         bracket-derived field is ground truth)"
    );
    c.finish();
}
