use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{load_image, load_mesh, prepare_out_dir, PipelineConfig, RunManifest};
use crate::metrics::{chamfer_distance, psnr_mse, ssim};
use crate::raster::Image;
use crate::{Error, Result};

/// Optional mesh pair plus paired view lists; both lists must have the length
/// of the configured azimuths when given.
#[derive(Debug, Clone, Default)]
pub struct EvalInputs {
    pub mesh_a: Option<PathBuf>,
    pub mesh_b: Option<PathBuf>,
    pub views_a: Vec<PathBuf>,
    pub views_b: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshRow {
    pub chamfer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViewRow {
    pub azimuth: f64,
    #[serde(serialize_with = "finite_or_string")]
    pub psnr: f64,
    pub mse: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub seed: u64,
    pub samples: usize,
    pub mesh: Option<MeshRow>,
    pub views: Vec<ViewRow>,
}

fn finite_or_string<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&v.to_string())
    }
}

/// Foreground of a view pair: pixels either image covers.
fn union_mask(a: &Image, b: &Image) -> Vec<bool> {
    a.alpha.iter().zip(&b.alpha).map(|(&x, &y)| x > 0.5 || y > 0.5).collect()
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,azimuth,chamfer,psnr,mse,ssim\n");
        if let Some(m) = &self.mesh {
            writeln!(s, "mesh,,{},,,", m.chamfer).unwrap();
        }
        for v in &self.views {
            writeln!(s, "view,{},,{},{},{}", v.azimuth, v.psnr, v.mse, v.ssim).unwrap();
        }
        s
    }

    pub fn mean_psnr(&self) -> Option<f64> {
        (!self.views.is_empty()).then(|| self.views.iter().map(|v| v.psnr).sum::<f64>() / self.views.len() as f64)
    }
}

/// In-memory evaluation. PSNR and MSE are taken over the union of the two
/// images' foreground (alpha > 0.5); SSIM over the whole frame.
pub fn evaluate(
    meshes: Option<(&crate::geometry::Mesh, &crate::geometry::Mesh)>,
    views: &[(f64, &Image, &Image)],
    config: &PipelineConfig,
) -> Result<EvalReport> {
    let mesh = match meshes {
        Some((a, b)) => Some(MeshRow {
            chamfer: chamfer_distance(a, b, config.eval.samples, config.seed)?,
        }),
        None => None,
    };
    let views = views
        .iter()
        .map(|&(azimuth, a, b)| {
            let mask = union_mask(a, b);
            let pm = psnr_mse(a, b, Some(&mask))?;
            Ok(ViewRow {
                azimuth,
                psnr: pm.psnr,
                mse: pm.mse,
                ssim: ssim(a, b)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        seed: config.seed,
        samples: config.eval.samples,
        mesh,
        views,
    })
}

/// Writes `report.json` and `report.csv`.
pub fn eval(inputs: &EvalInputs, config: &PipelineConfig, out: &Path) -> Result<(EvalReport, RunManifest)> {
    config.validate()?;
    let mut manifest = RunManifest::new("eval", config);
    let meshes = match (&inputs.mesh_a, &inputs.mesh_b) {
        (Some(a), Some(b)) => Some((load_mesh(&mut manifest, a)?, load_mesh(&mut manifest, b)?)),
        (None, None) => None,
        _ => return Err(Error::InvalidParameter("eval needs both meshes or neither".into())),
    };
    if inputs.views_a.len() != inputs.views_b.len() {
        return Err(Error::InvalidParameter("view lists differ in length".into()));
    }
    if !inputs.views_a.is_empty() && inputs.views_a.len() != config.camera.azimuths.len() {
        return Err(Error::InvalidParameter(format!(
            "expected {} views per side, got {}",
            config.camera.azimuths.len(),
            inputs.views_a.len()
        )));
    }
    if meshes.is_none() && inputs.views_a.is_empty() {
        return Err(Error::InvalidParameter("nothing to evaluate".into()));
    }
    let mut pairs = Vec::new();
    for (pa, pb) in inputs.views_a.iter().zip(&inputs.views_b) {
        pairs.push((load_image(&mut manifest, pa)?, load_image(&mut manifest, pb)?));
    }
    let refs: Vec<_> = config.camera.azimuths.iter().zip(&pairs).map(|(&az, (a, b))| (az, a, b)).collect();
    let report = manifest.time("eval", || evaluate(meshes.as_ref().map(|(a, b)| (a, b)), &refs, config))?;
    prepare_out_dir(out)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::format("report", e.to_string()))?;
    manifest.write_output(out, "report.json", json.as_bytes())?;
    manifest.write_output(out, "report.csv", report.to_csv().as_bytes())?;
    if let Some(psnr) = report.mean_psnr() {
        manifest.stat("mean_psnr", if psnr.is_finite() { serde_json::json!(psnr) } else { serde_json::json!(psnr.to_string()) });
    }
    let manifest = manifest.finish(out)?;
    Ok((report, manifest))
}
