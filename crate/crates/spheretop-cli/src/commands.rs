//! Subcommand implementations. Each returns the process exit code semantics
//! through `CmdError`: config errors exit 2, verification failures exit 1,
//! runtime/integrator failures exit 3.

use crate::config::{ConfigError, RunConfig};
use serde::Serialize;
use spheretop::charts::{SphericalState, State};
use spheretop::dynamics::section::{poincare_section, SeedSection};
use spheretop::dynamics::{integrate, solve_momentum_on_energy, MomentumRoots};
use spheretop::geometry::{self, MetricProfile};
use spheretop::io;
use spheretop::model::Params;
use spheretop::verify::{run_battery, VerifyConfig};
use std::path::Path;

#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Verification(String),
    Runtime(String),
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(m) => write!(f, "config error: {m}"),
            CmdError::Verification(m) => write!(f, "verification failure: {m}"),
            CmdError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Verification(_) => 1,
            CmdError::Config(_) => 2,
            CmdError::Runtime(_) => 3,
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e.0)
    }
}

impl From<io::IoError> for CmdError {
    fn from(e: io::IoError) -> Self {
        CmdError::Runtime(e.to_string())
    }
}

/// Prints a line to stdout, quietly tolerating a closed pipe (EPIPE from
/// `spheretop ... | head` must not panic).
fn emit(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CmdError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CmdError::Runtime(format!("serialization: {e}")))?;
    io::write_atomic(&dir.join(name), &text)?;
    Ok(())
}

/// `spheretop verify`: the full battery, JSON report, exit 0 iff all pass.
pub fn cmd_verify(config: &RunConfig) -> Result<(), CmdError> {
    let params = config.validated_params()?;
    let gc = config.validated_gc()?;
    let report = run_battery(&VerifyConfig {
        params,
        gc,
        seed: config.seed,
    });
    for line in report.summary_lines() {
        emit(&line);
    }
    let dir = config.out_dir();
    write_json(&dir, "verify_report.json", &report)?;
    if report.all_passed {
        emit("all checks passed");
        Ok(())
    } else {
        Err(CmdError::Verification(
            report
                .first_failure
                .unwrap_or_else(|| "unknown check".to_string()),
        ))
    }
}

/// `spheretop simulate`: one trajectory, CSV + JSON with drift summary.
pub fn cmd_simulate(config: &RunConfig) -> Result<(), CmdError> {
    let params = config.validated_params()?;
    let init = &config.initial_state;
    let state = SphericalState::new(init.theta, init.phi, init.p_theta, init.p_phi)
        .map_err(|e| CmdError::Config(e.to_string()))?;
    let integ = config.integrator.to_config();
    integ.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    let dir = config.out_dir();
    match integrate(&State::Spherical(state), &params, &integ) {
        Ok(traj) => {
            io::write_atomic(&dir.join("trajectory.csv"), &io::trajectory_to_csv(&traj))?;
            write_json(&dir, "trajectory.json", &traj)?;
            emit(&format!(
                "{} samples; max relative H drift {:.3e}; max relative F drift {:.3e}",
                traj.samples.len(),
                traj.drift.max_rel_h_drift,
                traj.drift.max_rel_f_drift
            ));
            Ok(())
        }
        Err(failure) => {
            // Retain the partial trajectory for post-mortem before failing.
            io::write_atomic(
                &dir.join("trajectory_partial.csv"),
                &io::trajectory_to_csv(&failure.partial),
            )?;
            Err(CmdError::Runtime(failure.to_string()))
        }
    }
}

#[derive(Serialize)]
struct SectionSummary {
    energy: f64,
    phi_star: f64,
    seeds_total: usize,
    seeds_flagged: Vec<usize>,
    crossings_total: usize,
    max_energy_residual: f64,
    /// With A = 0 (p_φ conserved) the section points lie on level curves;
    /// this is the max point-to-curve distance over all seeds.
    #[serde(skip_serializing_if = "Option::is_none")]
    level_curve_distance: Option<f64>,
}

/// `spheretop section`: Poincaré section points, one CSV per seed.
pub fn cmd_section(config: &RunConfig) -> Result<(), CmdError> {
    let params = config.validated_params()?;
    let block = &config.section;
    let dir = config.out_dir();

    let energy = match block.energy {
        Some(e) => e,
        None => {
            let first = block.seeds.first().ok_or_else(|| {
                CmdError::Config("section.energy absent and no seeds to infer it from".into())
            })?;
            let p_phi = first.p_phi.ok_or_else(|| {
                CmdError::Config(
                    "section.energy absent and the first seed carries no p_phi".into(),
                )
            })?;
            let st = SphericalState::new(first.theta, first.phi, first.p_theta, p_phi)
                .map_err(|e| CmdError::Config(e.to_string()))?;
            spheretop::charts::hamiltonian(&State::Spherical(st), &params)
        }
    };

    // Auto-complete seeds through the energy constraint; infeasible seeds
    // become flagged entries without stopping the run.
    let mut seeds: Vec<Option<SphericalState<f64>>> = Vec::new();
    for seed in &block.seeds {
        if !(seed.theta > 0.0 && seed.theta < std::f64::consts::PI) {
            seeds.push(None);
            continue;
        }
        let state = match seed.p_phi {
            Some(p_phi) => SphericalState::new(seed.theta, seed.phi, seed.p_theta, p_phi).ok(),
            None => {
                let roots =
                    solve_momentum_on_energy(seed.theta, seed.p_theta, seed.phi, energy, &params);
                let p_phi = match (roots, seed.branch.as_str()) {
                    (MomentumRoots::Pair(minus, _), "minus") => Some(minus),
                    (MomentumRoots::Pair(_, plus), _) => Some(plus),
                    (MomentumRoots::Double(root), _) => Some(root),
                    (MomentumRoots::NoRealRoot, _) => None,
                };
                p_phi.and_then(|p| SphericalState::new(seed.theta, seed.phi, seed.p_theta, p).ok())
            }
        };
        seeds.push(state);
    }

    let feasible: Vec<SphericalState<f64>> = seeds.iter().filter_map(|s| *s).collect();
    let section_config = block.to_section_config(energy);
    let mut integ = config.integrator.to_config();
    integ.dt = block.dt;
    integ.t_end = block.t_end;
    integ.validate().map_err(|e| CmdError::Config(e.to_string()))?;

    let computed = poincare_section(&feasible, &params, &section_config, &integ);

    // Re-align with the original seed indices (flagged placeholders for
    // infeasible ones).
    let mut sections: Vec<SeedSection> = Vec::with_capacity(seeds.len());
    let mut it = computed.into_iter();
    for (idx, seed) in seeds.iter().enumerate() {
        let section = match seed {
            Some(_) => {
                let mut s = it.next().expect("one result per feasible seed");
                s.seed_index = idx;
                s
            }
            None => SeedSection {
                seed_index: idx,
                points: Vec::new(),
                flagged_empty: true,
            },
        };
        sections.push(section);
    }

    let mut crossings_total = 0;
    let mut max_energy_residual: f64 = 0.0;
    let mut seeds_flagged = Vec::new();
    let mut level_curve_distance: Option<f64> = None;
    for section in &sections {
        io::write_atomic(
            &dir.join(format!("section_seed{}.csv", section.seed_index)),
            &io::section_to_csv(section),
        )?;
        crossings_total += section.points.len();
        if section.flagged_empty {
            seeds_flagged.push(section.seed_index);
        }
        for p in &section.points {
            max_energy_residual = max_energy_residual.max(p.energy_residual);
        }
        // In the integrable A = 0 limit p_φ is conserved, so the crossings
        // must trace a level curve in (θ, p_θ): report the post-hoc fit.
        if params.a == 0.0 && !section.flagged_empty {
            if let Some(seed) = seeds[section.seed_index] {
                let dist = spheretop::dynamics::section::level_curve_distance(
                    &section.points,
                    seed.p_phi,
                    block.phi_star,
                    energy,
                    &params,
                );
                level_curve_distance = Some(level_curve_distance.unwrap_or(0.0).max(dist));
            }
        }
    }
    write_json(
        &dir,
        "section_summary.json",
        &SectionSummary {
            energy,
            phi_star: block.phi_star,
            seeds_total: sections.len(),
            seeds_flagged: seeds_flagged.clone(),
            crossings_total,
            max_energy_residual,
            level_curve_distance,
        },
    )?;
    emit(&format!(
        "{} seeds ({} flagged), {} crossings, max energy residual {:.3e}",
        sections.len(),
        seeds_flagged.len(),
        crossings_total,
        max_energy_residual
    ));
    Ok(())
}

/// `spheretop curvature`: κ(θ) per metric plus positivity columns.
pub fn cmd_curvature(config: &RunConfig) -> Result<(), CmdError> {
    let params = config.validated_params()?;
    let block = &config.curvature;
    let dir = config.out_dir();

    let n = block.theta_points.max(16);
    let grid: Vec<f64> = (1..n)
        .map(|i| std::f64::consts::PI * i as f64 / n as f64)
        .collect();
    let round = geometry::curvature_profile(&MetricProfile::Round, &grid)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;
    let new_sys = geometry::curvature_profile(&MetricProfile::NewSystem { s: params.s }, &grid)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;
    let gc_metric = geometry::curvature_profile(&MetricProfile::GoryachevChaplygin, &grid)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| vec![t, round[i], new_sys[i], gc_metric[i]])
        .collect();
    io::write_atomic(
        &dir.join("curvature.csv"),
        &io::table_to_csv(&["theta", "kappa_round", "kappa_new", "kappa_gc"], &rows),
    )?;

    // Positivity columns at the configured s plus the report sweep.
    let nz = block.z_points.max(16);
    let mut rows = Vec::with_capacity(nz - 1);
    for i in 1..nz {
        let z = -1.0 + 2.0 * i as f64 / nz as f64;
        let r = spheretop::model::r(z, params.s);
        let quotient = spheretop::model::kinetic_c(z, params.s)
            * (1.0 - z * z)
            * spheretop::model::w(z, params.s).powi(2);
        rows.push(vec![z, r, quotient]);
    }
    io::write_atomic(
        &dir.join("positivity.csv"),
        &io::table_to_csv(&["z", "r", "c_quotient"], &rows),
    )?;

    let mut reports = Vec::new();
    for &s in &block.s_values {
        reports.push(
            geometry::positivity_check(s, nz).map_err(|e| CmdError::Config(e.to_string()))?,
        );
    }
    write_json(&dir, "positivity_summary.json", &reports)?;

    // Profile comparison against the reference family (nonconstancy and
    // non-proportionality margins).
    let comparison = spheretop::gc::curvature_comparison(&params, n)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;
    write_json(&dir, "comparison.json", &comparison)?;
    emit(&format!(
        "curvature profiles on {} grid points; positivity verified for s in {:?}; \
         non-proportionality margin {:.4}",
        grid.len(),
        block.s_values,
        comparison.nonproportionality_margin
    ));
    Ok(())
}

#[derive(Serialize)]
struct GeodesicOutput {
    system: geometry::MaupertuisSystem,
    correspondence: geometry::CorrespondenceReport,
    gc_geodesic: spheretop::gc::GcGeodesicSystem,
}

/// `spheretop geodesic`: Maupertuis system with sign-resolution record plus
/// the correspondence check, and the reference GC geodesic family.
pub fn cmd_geodesic(config: &RunConfig) -> Result<(), CmdError> {
    let params = config.validated_params()?;
    let gc = config.validated_gc()?;
    let block = &config.geodesic;
    let dir = config.out_dir();

    let max_v = geometry::max_potential(&params).value;
    let h = block.h.unwrap_or(2.0 * max_v);
    let system = geometry::maupertuis_system(&params, h, config.seed).map_err(|e| match e {
        geometry::GeometryError::HBelowPotentialMax { .. } => CmdError::Config(e.to_string()),
        other => CmdError::Runtime(other.to_string()),
    })?;

    // Seed on the level H = h via the energy completion.
    let roots = solve_momentum_on_energy(block.theta, block.p_theta, block.phi, h, &params);
    let p_phi = roots
        .roots()
        .last()
        .copied()
        .ok_or_else(|| CmdError::Config(format!("geodesic seed infeasible at h = {h}")))?;
    let seed_state = SphericalState::new(block.theta, block.phi, block.p_theta, p_phi)
        .map_err(|e| CmdError::Config(e.to_string()))?;
    let mut integ = config.integrator.to_config();
    integ.dt = block.dt;
    integ.t_end = block.t_end;
    integ.record_stride = 100;
    let correspondence = geometry::geodesic_correspondence_check(&system, &seed_state, &integ)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;

    let gc_geodesic = spheretop::gc::gc_geodesic_system(&gc, config.seed).map_err(|e| match e {
        geometry::GeometryError::HBelowPotentialMax { .. } => CmdError::Config(e.to_string()),
        other => CmdError::Runtime(other.to_string()),
    })?;

    emit(&format!(
        "resolved variant {:?} ({} passing); correspondence residual {:.3e}; F_geod drift {:.3e}",
        system.resolution.resolved,
        system.resolution.passing,
        correspondence.max_geodesic_residual,
        correspondence.max_f_geod_drift
    ));
    write_json(
        &dir,
        "geodesic.json",
        &GeodesicOutput {
            system,
            correspondence,
            gc_geodesic,
        },
    )?;
    Ok(())
}

/// Sanity gate shared by all commands: params must validate.
pub fn preflight(config: &RunConfig) -> Result<Params, CmdError> {
    Ok(config.validated_params()?)
}
