//! Run configuration: one JSON document per run, schema-validated with
//! unknown keys rejected, plus CLI-flag overrides for the top-level scalars.

use serde::{Deserialize, Serialize};
use spheretop::dynamics::section::{CrossingDirection, SectionConfig};
use spheretop::dynamics::IntegratorConfig;
use spheretop::gc::GCParams;
use spheretop::model::Params;
use spheretop::sampling::DEFAULT_SEED;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    #[serde(rename = "A", default = "default_a")]
    pub a: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "default_s")]
    pub s: f64,
}

fn default_a() -> f64 {
    1.0
}
fn default_s() -> f64 {
    2.0
}

impl Default for ParamsBlock {
    fn default() -> Self {
        ParamsBlock {
            a: 1.0,
            c: 0.0,
            s: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcBlock {
    #[serde(rename = "A1", default = "default_a")]
    pub a1: f64,
    #[serde(default = "default_h1")]
    pub h1: f64,
}

fn default_h1() -> f64 {
    2.5
}

impl Default for GcBlock {
    fn default() -> Self {
        GcBlock { a1: 1.0, h1: 2.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_fp_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "default_fp_iters")]
    pub max_fixed_point_iters: u32,
    #[serde(default = "default_band")]
    pub switch_band: (f64, f64),
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_t_end() -> f64 {
    100.0
}
fn default_fp_tol() -> f64 {
    1e-14
}
fn default_fp_iters() -> u32 {
    50
}
fn default_band() -> (f64, f64) {
    (0.8, 0.9)
}
fn default_stride() -> usize {
    100
}

impl Default for IntegratorBlock {
    fn default() -> Self {
        IntegratorBlock {
            dt: default_dt(),
            t_end: default_t_end(),
            fixed_point_tol: default_fp_tol(),
            max_fixed_point_iters: default_fp_iters(),
            switch_band: default_band(),
            record_stride: default_stride(),
        }
    }
}

impl IntegratorBlock {
    pub fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.dt,
            t_end: self.t_end,
            fixed_point_tol: self.fixed_point_tol,
            max_fixed_point_iters: self.max_fixed_point_iters,
            switch_band: self.switch_band,
            record_stride: self.record_stride,
        }
    }
}

/// The documented demo initial state (librating orbit in the potential well).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateBlock {
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "default_p_theta")]
    pub p_theta: f64,
    #[serde(default = "default_p_phi")]
    pub p_phi: f64,
}

fn default_theta() -> f64 {
    1.4
}
fn default_phi() -> f64 {
    3.0
}
fn default_p_theta() -> f64 {
    0.1
}
fn default_p_phi() -> f64 {
    0.2
}

impl Default for InitialStateBlock {
    fn default() -> Self {
        InitialStateBlock {
            theta: 1.4,
            phi: 3.0,
            p_theta: 0.1,
            p_phi: 0.2,
        }
    }
}

/// Section seed: p_phi may be omitted in favor of the energy constraint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedBlock {
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub p_theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_phi: Option<f64>,
    /// Root branch used by the energy completion: "plus" (default) or "minus".
    #[serde(default = "default_branch")]
    pub branch: String,
}

fn default_branch() -> String {
    "plus".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionBlock {
    #[serde(default = "default_phi_star")]
    pub phi_star: f64,
    /// Energy level; when absent it is taken from the first seed's full
    /// state (which must then carry p_phi).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_crossings: Option<usize>,
    #[serde(default = "default_section_dt")]
    pub dt: f64,
    #[serde(default = "default_section_t_end")]
    pub t_end: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<SeedBlock>,
}

fn default_phi_star() -> f64 {
    std::f64::consts::PI
}
fn default_refine_tol() -> f64 {
    1e-12
}
fn default_section_dt() -> f64 {
    5e-4
}
fn default_section_t_end() -> f64 {
    200.0
}
fn default_seeds() -> Vec<SeedBlock> {
    vec![
        SeedBlock {
            theta: 1.4,
            phi: 3.0,
            p_theta: 0.1,
            p_phi: Some(0.2),
            branch: default_branch(),
        },
        SeedBlock {
            theta: 1.5,
            phi: 3.0,
            p_theta: 0.05,
            p_phi: None,
            branch: default_branch(),
        },
    ]
}

impl Default for SectionBlock {
    fn default() -> Self {
        SectionBlock {
            phi_star: default_phi_star(),
            energy: None,
            refine_tol: default_refine_tol(),
            max_crossings: None,
            dt: default_section_dt(),
            t_end: default_section_t_end(),
            seeds: default_seeds(),
        }
    }
}

impl SectionBlock {
    pub fn to_section_config(&self, energy: f64) -> SectionConfig {
        SectionConfig {
            phi_star: self.phi_star,
            direction: CrossingDirection::Positive,
            energy,
            refine_tol: self.refine_tol,
            max_crossings: self.max_crossings,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureBlock {
    #[serde(default = "default_theta_points")]
    pub theta_points: usize,
    #[serde(default = "default_z_points")]
    pub z_points: usize,
    #[serde(default = "default_s_values")]
    pub s_values: Vec<f64>,
}

fn default_theta_points() -> usize {
    400
}
fn default_z_points() -> usize {
    10_000
}
fn default_s_values() -> Vec<f64> {
    vec![1.01, 1.5, 2.0, 5.0]
}

impl Default for CurvatureBlock {
    fn default() -> Self {
        CurvatureBlock {
            theta_points: default_theta_points(),
            z_points: default_z_points(),
            s_values: default_s_values(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicBlock {
    /// Energy parameter; default 2·max V computed from the params.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default = "default_geodesic_dt")]
    pub dt: f64,
    #[serde(default = "default_geodesic_t_end")]
    pub t_end: f64,
    #[serde(default = "default_geo_theta")]
    pub theta: f64,
    #[serde(default = "default_geo_phi")]
    pub phi: f64,
    #[serde(default = "default_geo_p_theta")]
    pub p_theta: f64,
}

fn default_geodesic_dt() -> f64 {
    2e-4
}
fn default_geodesic_t_end() -> f64 {
    20.0
}
fn default_geo_theta() -> f64 {
    1.2
}
fn default_geo_phi() -> f64 {
    0.7
}
fn default_geo_p_theta() -> f64 {
    0.3
}

impl Default for GeodesicBlock {
    fn default() -> Self {
        GeodesicBlock {
            h: None,
            dt: default_geodesic_dt(),
            t_end: default_geodesic_t_end(),
            theta: default_geo_theta(),
            phi: default_geo_phi(),
            p_theta: default_geo_p_theta(),
        }
    }
}

/// The whole run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsBlock,
    #[serde(default)]
    pub gc_params: GcBlock,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    #[serde(default)]
    pub initial_state: InitialStateBlock,
    #[serde(default)]
    pub section: SectionBlock,
    #[serde(default)]
    pub curvature: CurvatureBlock,
    #[serde(default)]
    pub geodesic: GeodesicBlock,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Flag overrides for the top-level scalars.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub s: Option<f64>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
        let mut config = match path {
            None => RunConfig {
                seed: default_seed(),
                ..Default::default()
            },
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| ConfigError(e.to_string()))?
            }
        };
        if config.seed == 0 {
            config.seed = default_seed();
        }
        Ok(config)
    }

    pub fn apply(&mut self, over: &Overrides) {
        if let Some(seed) = over.seed {
            self.seed = seed;
        }
        if let Some(s) = over.s {
            self.params.s = s;
        }
        if let Some(a) = over.a {
            self.params.a = a;
        }
        if let Some(c) = over.c {
            self.params.c = c;
        }
        if let Some(h) = over.h {
            self.geodesic.h = Some(h);
        }
        if let Some(dt) = over.dt {
            self.integrator.dt = dt;
            self.section.dt = dt;
            self.geodesic.dt = dt;
        }
        if let Some(t_end) = over.t_end {
            self.integrator.t_end = t_end;
            self.section.t_end = t_end;
            self.geodesic.t_end = t_end;
        }
        if let Some(out) = &over.out {
            self.out_dir = Some(out.clone());
        }
    }

    /// Validated physical couplings (this is where s ≤ 1 is rejected).
    pub fn validated_params(&self) -> Result<Params, ConfigError> {
        Params::new(self.params.a, self.params.c, self.params.s)
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn validated_gc(&self) -> Result<GCParams, ConfigError> {
        GCParams::new(self.gc_params.a1, self.gc_params.h1).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
