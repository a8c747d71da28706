//! Uniform-weight (umbrella) Laplacian smoothing.
//!
//! Every iteration is a Jacobi step: `v <- v + lambda * (mean(N(v)) - v)`
//! computed from the previous positions of all neighbors.

use serde::{Deserialize, Serialize};

use super::Mesh;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingParams {
    pub lambda: f64,
    pub iterations: usize,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        SmoothingParams {
            lambda: 0.5,
            iterations: 5,
        }
    }
}

/// Sorted, deduplicated one-ring of every vertex.
pub(crate) fn vertex_neighbors(mesh: &Mesh) -> Vec<Vec<u32>> {
    let mut rings = vec![Vec::new(); mesh.positions.len()];
    for &[a, b, c] in &mesh.triangles {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            if u != v {
                rings[u as usize].push(v);
                rings[v as usize].push(u);
            }
        }
    }
    for ring in &mut rings {
        ring.sort_unstable();
        ring.dedup();
    }
    rings
}

pub fn laplacian_smooth(mesh: &Mesh, iterations: usize, lambda: f64) -> Mesh {
    if iterations == 0 || lambda == 0.0 || mesh.triangles.is_empty() {
        return mesh.clone();
    }
    let rings = vertex_neighbors(mesh);
    let mut current = mesh.positions.clone();
    for _ in 0..iterations {
        current = rings
            .iter()
            .zip(&current)
            .map(|(ring, &p)| {
                if ring.is_empty() {
                    return p;
                }
                let sum = ring.iter().fold(Vec3::zeros(), |acc, &j| acc + current[j as usize]);
                let centroid = sum / ring.len() as f64;
                p + (centroid - p) * lambda
            })
            .collect();
    }
    Mesh {
        positions: current,
        ..mesh.clone()
    }
}
