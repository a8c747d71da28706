use rayon::prelude::*;

use crate::numeric::pairwise_dot;

/// Sparse SPD operator `4 x_i - sum of interior neighbors` over the unknowns.
pub(crate) struct Laplacian<'a> {
    pub neighbors: &'a [[u32; 4]],
}

pub(crate) const NONE: u32 = u32::MAX;

impl Laplacian<'_> {
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = 4.0 * x[i];
            for &n in &self.neighbors[i] {
                if n != NONE {
                    acc -= x[n as usize];
                }
            }
            *o = acc;
        });
    }
}

pub(crate) struct CgOutcome {
    pub iterations: usize,
    /// True relative residual `|b - A x| / |b|` at exit.
    pub residual: f64,
    pub converged: bool,
}

fn true_residual(a: &Laplacian<'_>, x: &[f64], b: &[f64], r: &mut [f64], scratch: &mut [f64], b_norm: f64) -> f64 {
    a.apply(x, scratch);
    r.par_iter_mut().zip(b.par_iter().zip(scratch.par_iter())).for_each(|(r, (b, ax))| *r = b - ax);
    pairwise_dot(r, r).sqrt() / b_norm
}

/// Jacobi-preconditioned conjugate gradient. `x` holds the initial guess and
/// receives the solution. The recurrence residual only triggers a check: the
/// exit test always uses a freshly computed residual, restarting from the
/// current iterate when the two disagree.
pub(crate) fn solve(a: &Laplacian<'_>, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> CgOutcome {
    let n = b.len();
    let b_norm = pairwise_dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgOutcome {
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut residual = true_residual(a, x, b, &mut r, &mut ap, b_norm);
    let mut iterations = 0;
    'restart: while residual > tol && iterations < max_iter {
        let mut z: Vec<f64> = r.par_iter().map(|v| v * 0.25).collect();
        let mut p = z.clone();
        let mut rz = pairwise_dot(&r, &z);
        while iterations < max_iter {
            a.apply(&p, &mut ap);
            let pap = pairwise_dot(&p, &ap);
            if !(pap > 0.0) {
                residual = true_residual(a, x, b, &mut r, &mut ap, b_norm);
                break 'restart;
            }
            let alpha = rz / pap;
            x.par_iter_mut().zip(p.par_iter()).for_each(|(x, p)| *x += alpha * p);
            r.par_iter_mut().zip(ap.par_iter()).for_each(|(r, ap)| *r -= alpha * ap);
            iterations += 1;
            if pairwise_dot(&r, &r).sqrt() / b_norm <= tol {
                residual = true_residual(a, x, b, &mut r, &mut ap, b_norm);
                continue 'restart;
            }
            z.par_iter_mut().zip(r.par_iter()).for_each(|(z, r)| *z = r * 0.25);
            let rz_new = pairwise_dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut().zip(z.par_iter()).for_each(|(p, z)| *p = z + beta * *p);
        }
        residual = true_residual(a, x, b, &mut r, &mut ap, b_norm);
    }
    CgOutcome {
        iterations,
        residual,
        converged: residual <= tol,
    }
}
