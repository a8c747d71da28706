use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blend::SolverParams;
use crate::geometry::{camera_from_orbit, Camera, SmoothingParams};
use crate::{Error, Result, Rgb};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub fov_deg: f64,
    pub distance: f64,
    pub elevation_deg: f64,
    pub azimuths: Vec<f64>,
    pub view_resolution: usize,
    pub near: f64,
    pub far: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            fov_deg: 40.0,
            distance: 1.5,
            elevation_deg: 0.0,
            azimuths: vec![0.0, 90.0, 180.0, 270.0],
            view_resolution: 512,
            near: crate::geometry::DEFAULT_NEAR,
            far: crate::geometry::DEFAULT_FAR,
        }
    }
}

impl CameraConfig {
    pub fn camera(&self, azimuth_deg: f64) -> Result<Camera> {
        let res = (self.view_resolution, self.view_resolution);
        camera_from_orbit(azimuth_deg, self.elevation_deg, self.distance, self.fov_deg, res)?
            .with_clip(self.near, self.far)
    }

    pub fn cameras(&self) -> Result<Vec<Camera>> {
        self.azimuths.iter().map(|&a| self.camera(a)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtlasConfig {
    pub resolution: usize,
}

impl Default for AtlasConfig {
    fn default() -> Self {
        AtlasConfig { resolution: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionConfig {
    pub silhouette_threshold: f64,
    pub depth_eps: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            silhouette_threshold: crate::texproject::DEFAULT_SILHOUETTE_THRESHOLD,
            depth_eps: crate::texproject::DEFAULT_DEPTH_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingConfig {
    pub lambda: f64,
    pub iterations: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        let d = SmoothingParams::default();
        SmoothingConfig {
            lambda: d.lambda,
            iterations: d.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tolerance: f64,
    /// Omitted means `10 sqrt(n) + 1000`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverParams::default();
        SolverConfig {
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
        }
    }
}

impl SolverConfig {
    pub fn params(&self) -> SolverParams {
        SolverParams {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub background: Rgb,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig { background: [1.0; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Lattice points per axis over `[-0.55, 0.55]^3`.
    pub grid_resolution: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { grid_resolution: 96 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Surface samples per mesh for the Chamfer distance.
    pub samples: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { samples: 50_000 }
    }
}

/// Complete run configuration, read from TOML. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub camera: CameraConfig,
    pub atlas: AtlasConfig,
    pub projection: ProjectionConfig,
    pub smoothing: SmoothingConfig,
    pub solver: SolverConfig,
    pub render: RenderConfig,
    pub synth: SynthConfig,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            camera: CameraConfig::default(),
            atlas: AtlasConfig::default(),
            projection: ProjectionConfig::default(),
            smoothing: SmoothingConfig::default(),
            solver: SolverConfig::default(),
            render: RenderConfig::default(),
            synth: SynthConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite")))
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.camera;
        if c.azimuths.len() != 4 {
            return Err(Error::Config(format!("camera.azimuths needs 4 values, got {}", c.azimuths.len())));
        }
        for (i, a) in c.azimuths.iter().enumerate() {
            finite("camera.azimuths", *a)?;
            for b in &c.azimuths[..i] {
                let d = (a - b).rem_euclid(360.0);
                if d < 1e-9 || 360.0 - d < 1e-9 {
                    return Err(Error::Config(format!("camera.azimuths {b} and {a} coincide mod 360")));
                }
            }
        }
        for (name, v) in [
            ("camera.fov_deg", c.fov_deg),
            ("camera.distance", c.distance),
            ("camera.elevation_deg", c.elevation_deg),
            ("camera.near", c.near),
            ("camera.far", c.far),
            ("projection.silhouette_threshold", self.projection.silhouette_threshold),
            ("projection.depth_eps", self.projection.depth_eps),
            ("smoothing.lambda", self.smoothing.lambda),
            ("solver.tolerance", self.solver.tolerance),
        ] {
            finite(name, v)?;
        }
        if !(c.fov_deg > 0.0 && c.fov_deg < 180.0) {
            return Err(Error::Config("camera.fov_deg must lie in (0, 180)".into()));
        }
        if !(c.distance > 0.0) {
            return Err(Error::Config("camera.distance must be positive".into()));
        }
        if !(c.near > 0.0 && c.near < c.far) {
            return Err(Error::Config("camera clip planes need 0 < near < far".into()));
        }
        if c.view_resolution == 0 || self.atlas.resolution == 0 {
            return Err(Error::Config("resolutions must be positive".into()));
        }
        if self.background_invalid() {
            return Err(Error::Config("render.background must lie in [0, 1]".into()));
        }
        if !(self.projection.depth_eps >= 0.0) || !(self.solver.tolerance > 0.0) {
            return Err(Error::Config("depth_eps must be >= 0 and tolerance > 0".into()));
        }
        if self.synth.grid_resolution < 2 || self.eval.samples == 0 {
            return Err(Error::Config("synth.grid_resolution >= 2 and eval.samples >= 1 required".into()));
        }
        Ok(())
    }

    fn background_invalid(&self) -> bool {
        self.render.background.iter().any(|c| !(0.0..=1.0).contains(c))
    }
}
