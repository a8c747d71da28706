//! Poisson blending of back-projected texels into the coarse texture.
//!
//! Inside the selection mask (eroded by one texel within each chart) the
//! texture is re-solved so its 5-point Laplacian matches that of the projected
//! texture, while the ring around it is pinned to the coarse texture. Seams
//! between projected patches and the coarse texture are spread smoothly over
//! the patch instead of showing as steps.

mod cg;

use rayon::prelude::*;
use serde::Serialize;

use crate::raster::Image;
use crate::texproject::{TexelMaps, NO_CHART};
use crate::{Error, Result, Rgb};
use cg::{Laplacian, NONE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Relative residual `|b - A x| / |b|` to reach.
    pub tolerance: f64,
    /// Iteration cap per channel; `None` means `10 sqrt(n) + 1000`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tolerance: 1e-6,
            max_iterations: None,
        }
    }
}

impl SolverParams {
    pub fn iteration_cap(&self, unknowns: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (10.0 * (unknowns as f64).sqrt()) as usize + 1000)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BlendStats {
    pub interior: usize,
    pub trivial: bool,
    pub iterations: [usize; 3],
    pub residual: [f64; 3],
}

/// Discrete Poisson problem on a `res x res` texel grid.
#[derive(Debug, Clone)]
pub struct BlendProblem {
    pub res: usize,
    pub interior: Vec<bool>,
    /// Guidance forward differences: `gx[p] ~ f(p + x) - f(p)`, `gy[p] ~ f(p + y) - f(p)`
    /// with `y` pointing down the rows.
    pub gx: Vec<Rgb>,
    pub gy: Vec<Rgb>,
    /// Values used wherever a stencil reaches a non-interior texel, and the
    /// output outside the interior.
    pub boundary: Vec<Rgb>,
    /// Alpha of the output image.
    pub alpha: Vec<f64>,
    pub params: SolverParams,
}

fn neighbors4(p: usize, res: usize) -> Option<[usize; 4]> {
    let (x, y) = (p % res, p / res);
    (x > 0 && y > 0 && x + 1 < res && y + 1 < res).then(|| [p - 1, p + 1, p - res, p + res])
}

fn sub(a: Rgb, b: Rgb) -> Rgb {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Sets up the blend of `projected` (trusted where `mask` is set) into `coarse`.
///
/// A texel is solved for when it is masked, valid, and all four neighbors are
/// masked, valid and in the same chart. Guidance differences are only formed
/// between two such texels of one chart, so no stencil crosses a gutter.
pub fn build_problem(projected: &Image, mask: &[bool], coarse: &Image, texels: &TexelMaps) -> Result<BlendProblem> {
    let res = texels.res;
    let n = res * res;
    for img in [projected, coarse] {
        if img.resolution() != (res, res) {
            return Err(Error::ResolutionMismatch {
                expected: (res, res),
                actual: img.resolution(),
            });
        }
    }
    if mask.len() != n {
        return Err(Error::InvalidParameter(format!("mask has {} entries, expected {n}", mask.len())));
    }
    let usable = |p: usize| mask[p] && texels.valid[p] && texels.chart[p] != NO_CHART;
    let linked = |p: usize, q: usize| usable(p) && usable(q) && texels.chart[p] == texels.chart[q];
    let interior: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|p| usable(p) && neighbors4(p, res).is_some_and(|nb| nb.iter().all(|&q| linked(p, q))))
        .collect();
    let proj = &projected.rgb;
    let gx = (0..n)
        .into_par_iter()
        .map(|p| if p % res + 1 < res && linked(p, p + 1) { sub(proj[p + 1], proj[p]) } else { [0.0; 3] })
        .collect();
    let gy = (0..n)
        .into_par_iter()
        .map(|p| if p + res < n && linked(p, p + res) { sub(proj[p + res], proj[p]) } else { [0.0; 3] })
        .collect();
    Ok(BlendProblem {
        res,
        interior,
        gx,
        gy,
        boundary: coarse.rgb.clone(),
        alpha: coarse.alpha.clone(),
        params: SolverParams::default(),
    })
}

impl BlendProblem {
    /// Assembles a problem from raw parts; interior texels may not touch the
    /// image border.
    pub fn from_parts(res: usize, interior: Vec<bool>, gx: Vec<Rgb>, gy: Vec<Rgb>, boundary: Vec<Rgb>) -> Result<BlendProblem> {
        let n = res * res;
        if [interior.len(), gx.len(), gy.len(), boundary.len()].iter().any(|&l| l != n) {
            return Err(Error::InvalidParameter("blend arrays must have res * res entries".into()));
        }
        if (0..n).any(|p| interior[p] && neighbors4(p, res).is_none()) {
            return Err(Error::InvalidParameter("interior texel on the image border".into()));
        }
        if gx.iter().chain(&gy).flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite guidance".into()));
        }
        Ok(BlendProblem {
            res,
            interior,
            gx,
            gy,
            boundary,
            alpha: vec![1.0; n],
            params: SolverParams::default(),
        })
    }

    pub fn with_params(mut self, params: SolverParams) -> Self {
        self.params = params;
        self
    }

    pub fn interior_count(&self) -> usize {
        self.interior.iter().filter(|&&v| v).count()
    }

    pub fn is_trivial(&self) -> bool {
        self.interior_count() == 0
    }

    /// Every `(interior texel, neighbor)` pair the stencil touches.
    pub fn stencil_links(&self) -> Vec<(usize, usize)> {
        (0..self.interior.len())
            .filter(|&p| self.interior[p])
            .flat_map(|p| neighbors4(p, self.res).unwrap().map(|q| (p, q)))
            .collect()
    }

    fn divergence(&self, p: usize, c: usize) -> f64 {
        self.gx[p][c] - self.gx[p - 1][c] + self.gy[p][c] - self.gy[p - self.res][c]
    }

    /// Solves all three channels without clamping. The returned values cover
    /// the whole grid (boundary values outside the interior). `initial` seeds
    /// the interior unknowns; `None` starts from the boundary values.
    pub fn solve_raw(&self, initial: Option<&[Rgb]>) -> Result<(Vec<Rgb>, BlendStats)> {
        let unknowns: Vec<usize> = (0..self.interior.len()).filter(|&p| self.interior[p]).collect();
        let mut stats = BlendStats {
            interior: unknowns.len(),
            trivial: unknowns.is_empty(),
            ..Default::default()
        };
        let mut out = self.boundary.clone();
        if unknowns.is_empty() {
            return Ok((out, stats));
        }
        let mut slot = vec![NONE; self.interior.len()];
        for (k, &p) in unknowns.iter().enumerate() {
            slot[p] = k as u32;
        }
        let neighbors: Vec<[u32; 4]> = unknowns
            .par_iter()
            .map(|&p| neighbors4(p, self.res).unwrap().map(|q| slot[q]))
            .collect();
        let op = Laplacian { neighbors: &neighbors };
        let max_iter = self.params.iteration_cap(unknowns.len());
        let solve_channel = |c: usize| {
            let b: Vec<f64> = unknowns
                .par_iter()
                .map(|&p| {
                    let ring: f64 = neighbors4(p, self.res)
                        .unwrap()
                        .iter()
                        .filter(|&&q| !self.interior[q])
                        .map(|&q| self.boundary[q][c])
                        .sum();
                    ring - self.divergence(p, c)
                })
                .collect();
            let source = initial.unwrap_or(&self.boundary);
            let mut x: Vec<f64> = unknowns.iter().map(|&p| source[p][c]).collect();
            let outcome = cg::solve(&op, &b, &mut x, self.params.tolerance, max_iter);
            (x, outcome)
        };
        let (r, (g, b)) = rayon::join(|| solve_channel(0), || rayon::join(|| solve_channel(1), || solve_channel(2)));
        for (c, (x, outcome)) in [r, g, b].into_iter().enumerate() {
            stats.iterations[c] = outcome.iterations;
            stats.residual[c] = outcome.residual;
            if !outcome.converged {
                return Err(Error::NotConverged {
                    iterations: outcome.iterations,
                    residual: outcome.residual,
                });
            }
            for (k, &p) in unknowns.iter().enumerate() {
                out[p][c] = x[k];
            }
        }
        Ok((out, stats))
    }

    /// Solves and clamps to `[0, 1]`.
    pub fn solve(&self, initial: Option<&[Rgb]>) -> Result<(Image, BlendStats)> {
        let (values, stats) = self.solve_raw(initial)?;
        let rgb = values
            .into_iter()
            .zip(&self.interior)
            .zip(&self.boundary)
            .map(|((v, &inside), b)| if inside { v.map(|c| c.clamp(0.0, 1.0)) } else { *b })
            .collect();
        Ok((
            Image {
                width: self.res,
                height: self.res,
                rgb,
                alpha: self.alpha.clone(),
            },
            stats,
        ))
    }
}

/// Builds and solves the blend, starting CG from the projected colors.
pub fn blend_texture(
    projected: &Image,
    mask: &[bool],
    coarse: &Image,
    texels: &TexelMaps,
    params: SolverParams,
) -> Result<(Image, BlendStats)> {
    let problem = build_problem(projected, mask, coarse, texels)?.with_params(params);
    if problem.is_trivial() {
        let stats = BlendStats {
            trivial: true,
            ..Default::default()
        };
        return Ok((coarse.clone(), stats));
    }
    problem.solve(Some(&projected.rgb))
}
