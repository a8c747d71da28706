//! Back-projection of the four canonical views onto texture-space texels.
//!
//! A texel receives a candidate color from a view when its world position
//! projects inside the image and passes the depth test against that view's
//! G-buffer. Candidates are then culled near the silhouette (surface normal
//! against the camera-to-surface direction) and, where several views remain,
//! the one closest to the coarse color wins.

use rayon::prelude::*;

use crate::geometry::Camera;
use crate::raster::{GBuffer, Image};
use crate::{Error, Result, Rgb, Vec3};

pub const NO_CHART: u32 = u32::MAX;

/// Default depth-test tolerance in scene units.
pub const DEFAULT_DEPTH_EPS: f64 = 2e-3;
/// Default silhouette threshold: candidates with `n . d > -0.2` are dropped.
pub const DEFAULT_SILHOUETTE_THRESHOLD: f64 = -0.2;

/// Per-texel surface samples baked in UV space. Index is `row * res + col`
/// with row 0 at the top of the texture.
#[derive(Debug, Clone, PartialEq)]
pub struct TexelMaps {
    pub res: usize,
    pub position: Vec<Vec3>,
    pub normal: Vec<Vec3>,
    pub chart: Vec<u32>,
    pub valid: Vec<bool>,
    /// Coarse color per texel; empty until a coarse texture is attached.
    pub coarse: Vec<Rgb>,
}

impl TexelMaps {
    pub fn empty(res: usize) -> TexelMaps {
        let n = res * res;
        TexelMaps {
            res,
            position: vec![Vec3::zeros(); n],
            normal: vec![Vec3::zeros(); n],
            chart: vec![NO_CHART; n],
            valid: vec![false; n],
            coarse: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.res * self.res
    }

    pub fn is_empty(&self) -> bool {
        self.res == 0
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn has_coarse(&self) -> bool {
        self.coarse.len() == self.len()
    }

    /// Copies coarse colors from a texture at the atlas resolution.
    pub fn attach_coarse(&mut self, texture: &Image) -> Result<()> {
        if texture.resolution() != (self.res, self.res) {
            return Err(Error::ResolutionMismatch {
                expected: (self.res, self.res),
                actual: texture.resolution(),
            });
        }
        self.coarse = texture.rgb.clone();
        Ok(())
    }

    /// Coarse texture as an image whose alpha is texel validity.
    pub fn coarse_image(&self) -> Option<Image> {
        self.has_coarse().then(|| Image {
            width: self.res,
            height: self.res,
            rgb: self.coarse.clone(),
            alpha: self.valid.iter().map(|&v| f64::from(u8::from(v))).collect(),
        })
    }
}

/// One calibrated view: the image, its camera and a G-buffer of the mesh
/// rendered from that camera.
#[derive(Debug, Clone)]
pub struct View {
    pub image: Image,
    pub camera: Camera,
    pub gbuffer: GBuffer,
}

impl View {
    pub fn new(image: Image, camera: Camera, gbuffer: GBuffer) -> Result<View> {
        let res = camera.resolution();
        for actual in [image.resolution(), gbuffer.resolution()] {
            if actual != res {
                return Err(Error::ResolutionMismatch { expected: res, actual });
            }
        }
        Ok(View { image, camera, gbuffer })
    }
}

/// Exactly four views sharing one resolution.
#[derive(Debug, Clone)]
pub struct ViewSet {
    views: Vec<View>,
    priority: [u8; 4],
}

impl ViewSet {
    pub fn new(views: Vec<View>) -> Result<ViewSet> {
        if views.len() != 4 {
            return Err(Error::InvalidParameter(format!("expected 4 views, got {}", views.len())));
        }
        let res = views[0].image.resolution();
        for v in &views[1..] {
            if v.image.resolution() != res {
                return Err(Error::ResolutionMismatch {
                    expected: res,
                    actual: v.image.resolution(),
                });
            }
        }
        let priority = view_priority(&views.iter().map(|v| v.camera.azimuth_deg()).collect::<Vec<_>>());
        Ok(ViewSet { views, priority })
    }

    pub fn views(&self) -> &[View] {
        &self.views
    }

    /// Tie-break rank of each view (0 wins): front first, then by angular
    /// distance from the front, then by azimuth (so 90 before 270).
    pub fn priority(&self) -> [u8; 4] {
        self.priority
    }
}

fn view_priority(azimuths: &[f64]) -> [u8; 4] {
    let key = |a: f64| {
        let a = a.rem_euclid(360.0);
        let from_front = a.min(360.0 - a);
        // quantize so 359.9999999 and 0 compare equal
        ((from_front * 1e6).round() as i64, (a * 1e6).round() as i64)
    };
    let mut order: Vec<usize> = (0..azimuths.len()).collect();
    order.sort_by_key(|&i| (key(azimuths[i]), i));
    let mut rank = [0u8; 4];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r as u8;
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub view: u8,
    pub rgb: Rgb,
}

/// Compressed per-texel candidate lists (at most one per view).
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub res: usize,
    offsets: Vec<usize>,
    entries: Vec<Candidate>,
    priority: [u8; 4],
}

impl CandidateSet {
    fn from_lists(res: usize, lists: Vec<arrayvec::ArrayVec<Candidate, 4>>, priority: [u8; 4]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for list in lists {
            entries.extend(list);
            offsets.push(entries.len());
        }
        CandidateSet { res, offsets, entries, priority }
    }

    pub fn texel(&self, i: usize) -> &[Candidate] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn texels_with_candidates(&self) -> usize {
        self.offsets.windows(2).filter(|w| w[1] > w[0]).count()
    }

    pub fn priority(&self) -> [u8; 4] {
        self.priority
    }

    /// Keeps the candidates for which `keep(texel, candidate)` holds.
    pub fn retain(&self, keep: impl Fn(usize, &Candidate) -> bool + Sync) -> CandidateSet {
        let lists = crate::numeric::par_map(self.res * self.res, |i| {
            self.texel(i).iter().filter(|c| keep(i, c)).copied().collect()
        });
        CandidateSet::from_lists(self.res, lists, self.priority)
    }
}

/// Visibility test and color lookup for every valid texel in every view.
pub fn project_views(texels: &TexelMaps, views: &ViewSet, depth_eps: f64) -> Result<CandidateSet> {
    for v in views.views() {
        if v.gbuffer.resolution() != v.image.resolution() {
            return Err(Error::ResolutionMismatch {
                expected: v.image.resolution(),
                actual: v.gbuffer.resolution(),
            });
        }
    }
    let lists: Vec<arrayvec::ArrayVec<Candidate, 4>> = (0..texels.len())
        .into_par_iter()
        .map(|i| {
            let mut list = arrayvec::ArrayVec::new();
            if !texels.valid[i] {
                return list;
            }
            let p = texels.position[i];
            for (k, view) in views.views().iter().enumerate() {
                if let Some(rgb) = visible_sample(&p, view, depth_eps) {
                    list.push(Candidate { view: k as u8, rgb });
                }
            }
            list
        })
        .collect();
    Ok(CandidateSet::from_lists(texels.res, lists, views.priority()))
}

fn visible_sample(p: &Vec3, view: &View, depth_eps: f64) -> Option<Rgb> {
    let (px, depth) = view.camera.project(p)?;
    let (w, h) = view.image.resolution();
    if !(px.x >= 0.0 && px.x < w as f64 && px.y >= 0.0 && px.y < h as f64) {
        return None;
    }
    let idx = px.y as usize * w + px.x as usize;
    let stored = view.gbuffer.depth[idx];
    if !((depth - stored).abs() <= depth_eps) {
        return None;
    }
    Some(view.image.bilinear(px.x, px.y))
}

/// The silhouette rule on its own: keep iff `dot <= threshold`.
#[inline]
pub fn silhouette_keep(dot: f64, threshold: f64) -> bool {
    dot <= threshold
}

/// Drops candidates whose texel normal is too oblique to the camera-to-surface direction.
pub fn cull_silhouette(
    candidates: &CandidateSet,
    texels: &TexelMaps,
    views: &ViewSet,
    threshold: f64,
) -> CandidateSet {
    let eyes: Vec<Vec3> = views.views().iter().map(|v| v.camera.eye).collect();
    candidates.retain(|i, c| {
        let dir = (texels.position[i] - eyes[c.view as usize]).normalize();
        silhouette_keep(texels.normal[i].dot(&dir), threshold)
    })
}

fn rgb_dist2(a: &Rgb, b: &Rgb) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Picks, per texel, the candidate closest to the coarse color.
///
/// Returns the projected texture (coarse color where nothing was selected)
/// and the selection mask.
pub fn select_texels(candidates: &CandidateSet, texels: &TexelMaps) -> Result<(Image, Vec<bool>)> {
    if !texels.has_coarse() {
        return Err(Error::InvalidParameter("texel maps carry no coarse colors".into()));
    }
    let priority = candidates.priority();
    let picks: Vec<Option<Rgb>> = crate::numeric::par_map(texels.len(), |i| {
        let coarse = &texels.coarse[i];
        candidates
            .texel(i)
            .iter()
            .min_by(|a, b| {
                rgb_dist2(&a.rgb, coarse)
                    .total_cmp(&rgb_dist2(&b.rgb, coarse))
                    .then(priority[a.view as usize].cmp(&priority[b.view as usize]))
            })
            .map(|c| c.rgb)
    });
    let mut image = Image::new(texels.res, texels.res, [0.0; 3], 0.0);
    let mut mask = vec![false; texels.len()];
    for (i, pick) in picks.into_iter().enumerate() {
        if !texels.valid[i] {
            continue;
        }
        match pick {
            Some(rgb) => {
                image.rgb[i] = rgb;
                image.alpha[i] = 1.0;
                mask[i] = true;
            }
            None => image.rgb[i] = texels.coarse[i],
        }
    }
    Ok((image, mask))
}
