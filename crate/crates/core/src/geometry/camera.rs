use crate::{Error, Result, Vec2, Vec3};

/// Pinhole perspective camera.
///
/// `fov_deg` is the vertical field of view. Camera space is `x` right, `y` up
/// and `z` the distance along the viewing direction (positive in front).
/// Pixel `(i, j)` has its center at `(i + 0.5, j + 0.5)` with row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub fov_deg: f64,
    pub width: usize,
    pub height: usize,
    pub near: f64,
    pub far: f64,
    pub eye: Vec3,
    pub forward: Vec3,
    pub up: Vec3,
    pub right: Vec3,
}

pub const DEFAULT_NEAR: f64 = 0.05;
pub const DEFAULT_FAR: f64 = 100.0;

impl Camera {
    /// Camera at `eye` looking at `target`. `up_hint` only needs to be
    /// non-parallel to the viewing direction.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up_hint: Vec3,
        fov_deg: f64,
        resolution: (usize, usize),
    ) -> Result<Camera> {
        let forward = (target - eye)
            .try_normalize(0.0)
            .ok_or_else(|| Error::InvalidParameter("camera eye coincides with target".into()))?;
        let right = forward
            .cross(&up_hint)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidParameter("camera up hint parallel to view".into()))?;
        let up = right.cross(&forward);
        let cam = Camera {
            fov_deg,
            width: resolution.0,
            height: resolution.1,
            near: DEFAULT_NEAR,
            far: DEFAULT_FAR,
            eye,
            forward,
            up,
            right,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::InvalidParameter(format!("fov {} outside (0, 180)", self.fov_deg)));
        }
        if !(self.near > 0.0 && self.near < self.far) {
            return Err(Error::InvalidParameter("require 0 < near < far".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("camera resolution must be non-zero".into()));
        }
        Ok(())
    }

    pub fn with_clip(mut self, near: f64, far: f64) -> Result<Camera> {
        self.near = near;
        self.far = far;
        self.validate()?;
        Ok(self)
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn distance(&self) -> f64 {
        self.eye.norm()
    }

    /// Orbit azimuth of the eye in degrees, `[0, 360)`, 0 on +Z, 90 on +X.
    pub fn azimuth_deg(&self) -> f64 {
        let a = self.eye.x.atan2(self.eye.z).to_degrees();
        if a < 0.0 {
            a + 360.0
        } else {
            a
        }
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        0.5 * self.height as f64 / (0.5 * self.fov_deg.to_radians()).tan()
    }

    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        let d = p - self.eye;
        Vec3::new(d.dot(&self.right), d.dot(&self.up), d.dot(&self.forward))
    }

    /// Projects a camera-space point with `z > 0` to continuous pixel coordinates.
    pub fn camera_to_pixel(&self, c: &Vec3) -> Vec2 {
        let f = self.focal_px();
        Vec2::new(
            0.5 * self.width as f64 + f * c.x / c.z,
            0.5 * self.height as f64 - f * c.y / c.z,
        )
    }

    /// Pixel coordinates and view depth of a world point in front of the near plane.
    pub fn project(&self, p: &Vec3) -> Option<(Vec2, f64)> {
        let c = self.to_camera(p);
        (c.z >= self.near).then(|| (self.camera_to_pixel(&c), c.z))
    }

    /// World-space unit direction of the ray through continuous pixel coordinates.
    pub fn ray_direction(&self, pixel: Vec2) -> Vec3 {
        let f = self.focal_px();
        let x = (pixel.x - 0.5 * self.width as f64) / f;
        let y = (0.5 * self.height as f64 - pixel.y) / f;
        (self.forward + self.right * x + self.up * y).normalize()
    }
}

/// Camera on a sphere of radius `distance` looking at the origin.
///
/// Azimuth 0 / elevation 0 sits on +Z; azimuth 90 on +X. The up vector is the
/// elevation tangent of the orbit, which stays well defined at the poles.
pub fn camera_from_orbit(
    azimuth_deg: f64,
    elevation_deg: f64,
    distance: f64,
    fov_deg: f64,
    resolution: (usize, usize),
) -> Result<Camera> {
    if !(distance > 0.0) {
        return Err(Error::InvalidParameter(format!("camera distance {distance} must be positive")));
    }
    let (sa, ca) = azimuth_deg.to_radians().sin_cos();
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    let dir = Vec3::new(ce * sa, se, ce * ca);
    let eye = dir * distance;
    let forward = -dir;
    let up = Vec3::new(-se * sa, ce, -se * ca);
    let right = forward.cross(&up).normalize();
    let up = right.cross(&forward);
    let cam = Camera {
        fov_deg,
        width: resolution.0,
        height: resolution.1,
        near: DEFAULT_NEAR,
        far: DEFAULT_FAR,
        eye,
        forward,
        up,
        right,
    };
    cam.validate()?;
    Ok(cam)
}
