//! Analytic SDF primitives and the synthetic fixtures used as ground truth.
//!
//! Every primitive is an exact (1-Lipschitz) distance; smooth unions of them
//! stay 1-Lipschitz because the blend gradient is a convex combination.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result, Rgb, Vec3};

type SdfFn = dyn Fn(&Vec3) -> f64 + Send + Sync;
type ColorFn = dyn Fn(&Vec3) -> Rgb + Send + Sync;

/// An analytic signed distance function with a matching color field.
#[derive(Clone)]
pub struct AnalyticScene {
    pub name: String,
    sdf: Arc<SdfFn>,
    color: Arc<ColorFn>,
}

impl fmt::Debug for AnalyticScene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticScene").field("name", &self.name).finish_non_exhaustive()
    }
}

impl AnalyticScene {
    pub fn new(
        name: impl Into<String>,
        sdf: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        color: impl Fn(&Vec3) -> Rgb + Send + Sync + 'static,
    ) -> Self {
        AnalyticScene {
            name: name.into(),
            sdf: Arc::new(sdf),
            color: Arc::new(color),
        }
    }

    pub fn sdf(&self, p: &Vec3) -> f64 {
        (self.sdf)(p)
    }

    /// Color clamped to `[0, 1]`.
    pub fn color(&self, p: &Vec3) -> Rgb {
        (self.color)(p).map(|c| c.clamp(0.0, 1.0))
    }
}

pub fn sd_sphere(p: &Vec3, center: &Vec3, radius: f64) -> f64 {
    (p - center).norm() - radius
}

pub fn sd_capsule(p: &Vec3, a: &Vec3, b: &Vec3, radius: f64) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm() - radius
}

/// Box with half extents `half` whose edges are rounded by `radius`
/// (the outer size is `half + radius`).
pub fn sd_rounded_box(p: &Vec3, center: &Vec3, half: &Vec3, radius: f64) -> f64 {
    let q = (p - center).abs() - half;
    q.sup(&Vec3::zeros()).norm() + q.max().min(0.0) - radius
}

/// Polynomial smooth minimum with blend width `k`.
pub fn smooth_min(a: f64, b: f64, k: f64) -> f64 {
    if k <= 0.0 {
        return a.min(b);
    }
    let h = (0.5 + 0.5 * (b - a) / k).clamp(0.0, 1.0);
    b + (a - b) * h - k * h * (1.0 - h)
}

pub const FIXTURES: [&str; 4] = ["sphere", "capsule", "blob_character", "nested_spheres"];

pub fn fixture(name: &str) -> Result<AnalyticScene> {
    match name {
        "sphere" => Ok(sphere_fixture(0.3)),
        "capsule" => Ok(capsule_fixture()),
        "blob_character" => Ok(blob_character()),
        "nested_spheres" => Ok(nested_spheres()),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

/// Constant-colored sphere at the origin.
pub fn sphere_fixture(radius: f64) -> AnalyticScene {
    AnalyticScene::new(
        "sphere",
        move |p| p.norm() - radius,
        |_| [0.85, 0.45, 0.25],
    )
}

/// Vertical capsule with a height ramp.
pub fn capsule_fixture() -> AnalyticScene {
    let a = Vec3::new(0.0, -0.22, 0.0);
    let b = Vec3::new(0.0, 0.22, 0.0);
    AnalyticScene::new(
        "capsule",
        move |p| sd_capsule(p, &a, &b, 0.15),
        |p| [0.5 + p.y, 0.4, 0.5 - p.y],
    )
}

/// Hollow outer shell around a small inner sphere that no outside camera can see.
pub fn nested_spheres() -> AnalyticScene {
    AnalyticScene::new(
        "nested_spheres",
        |p| {
            let r = p.norm();
            let shell = (r - 0.4).max(0.3 - r);
            shell.min(r - 0.15)
        },
        |p| if p.norm() < 0.25 { [0.1, 0.9, 0.1] } else { [0.8, 0.2, 0.6] },
    )
}

/// A solid sphere with the same outer radius as [`nested_spheres`].
pub fn outer_sphere() -> AnalyticScene {
    AnalyticScene::new("outer_sphere", |p| p.norm() - 0.4, |_| [0.8, 0.2, 0.6])
}

/// Stylized A-pose figure: head, torso, arms at about 45 degrees, legs.
///
/// The color is a mid-gray base carrying fine patterns plus a front/back tint,
/// so front and back views differ.
pub fn blob_character() -> AnalyticScene {
    let head = (Vec3::new(0.0, 0.30, 0.0), 0.12);
    let torso = (Vec3::new(0.0, 0.05, 0.0), Vec3::new(0.09, 0.12, 0.05), 0.04);
    let limbs = [
        // arms
        (Vec3::new(0.12, 0.15, 0.0), Vec3::new(0.32, -0.05, 0.0), 0.04),
        (Vec3::new(-0.12, 0.15, 0.0), Vec3::new(-0.32, -0.05, 0.0), 0.04),
        // legs
        (Vec3::new(0.06, -0.08, 0.0), Vec3::new(0.09, -0.42, 0.0), 0.05),
        (Vec3::new(-0.06, -0.08, 0.0), Vec3::new(-0.09, -0.42, 0.0), 0.05),
    ];
    let blend = 0.03;
    AnalyticScene::new(
        "blob_character",
        move |p| {
            let mut d = sd_rounded_box(p, &torso.0, &torso.1, torso.2);
            d = smooth_min(d, sd_sphere(p, &head.0, head.1), blend);
            for (a, b, r) in &limbs {
                d = smooth_min(d, sd_capsule(p, a, b, *r), blend);
            }
            d
        },
        blob_color,
    )
}

fn blob_color(p: &Vec3) -> Rgb {
    let tint = 0.07 * (10.0 * p.z).tanh();
    [
        0.5 + 0.28 * (45.0 * p.x + 3.0 * (20.0 * p.y).sin()).sin() + tint,
        0.5 + 0.28 * (40.0 * p.y + 2.0).sin() * (25.0 * p.z + 30.0 * p.x).cos(),
        0.5 + 0.28 * (38.0 * (p.x + p.z)).cos() * (33.0 * p.y + 1.0).sin() - tint,
    ]
}
