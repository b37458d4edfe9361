//! Newtonian potentials of gridded densities by direct summation.
//!
//! The kernel is `k(z) = ln|z| / 2pi`, so `lap v = f` holds in the
//! distributional sense. Each source node carries the weight `f * h^2`; the
//! singular self-interaction is replaced by the exact mean of the kernel over
//! the node's `h x h` cell:
//!
//! ```text
//! mean_{cell} ln|z| = ln h + pi/4 - ln(2)/2 - 3/2
//! ```
//!
//! (integrate `ln sqrt(x^2+y^2)` over a quadrant of the cell in closed form).
//!
//! The summation is O(targets * sources) and deliberately stays that way:
//! grids up to 257 x 257 finish in seconds, which covers every workflow here,
//! and the kernel values depend only on the integer node offset, so they are
//! tabulated once per call. The summation order per target is fixed
//! (row-major over sources), so results are deterministic.

use crate::field::{hessian_field, laplacian, ScalarField};
use crate::Result;

const INV_TAU: f64 = 1.0 / std::f64::consts::TAU;

/// Potential plus the defect of the discrete Laplacian against the density.
#[derive(Debug, Clone)]
pub struct PotentialResult {
    pub v: ScalarField,
    /// `max |lap_h v - f|` over interior nodes.
    pub residual_norm: f64,
}

/// Exact mean of `ln|z|` over an axis-aligned square cell of side `h`
/// centered at the origin.
pub(crate) fn self_cell_log_mean(h: f64) -> f64 {
    h.ln() + std::f64::consts::FRAC_PI_4 - 0.5 * std::f64::consts::LN_2 - 1.5
}

/// Newtonian potential of `f` with `lap v = f`, by direct summation over all
/// grid nodes.
pub fn newtonian_potential(f: &ScalarField) -> Result<PotentialResult> {
    let g = *f.grid();
    let (nx, ny) = (g.nx, g.ny);
    let h2 = g.h * g.h;
    let log_h = g.h.ln();

    // Kernel values by absolute node offset: k[|dj| * nx + |di|].
    let mut kernel = vec![0.0; nx * ny];
    kernel[0] = INV_TAU * self_cell_log_mean(g.h);
    for dj in 0..ny {
        for di in 0..nx {
            if di == 0 && dj == 0 {
                continue;
            }
            let d2 = (di * di + dj * dj) as f64;
            kernel[dj * nx + di] = INV_TAU * (log_h + 0.5 * d2.ln());
        }
    }

    let src = f.values();
    let mut out = vec![0.0; g.len()];
    for tj in 0..ny {
        for ti in 0..nx {
            let mut sum = 0.0;
            for sj in 0..ny {
                let dj = tj.abs_diff(sj);
                let krow = &kernel[dj * nx..dj * nx + nx];
                let frow = &src[sj * nx..sj * nx + nx];
                for si in 0..nx {
                    sum += krow[ti.abs_diff(si)] * frow[si];
                }
            }
            out[tj * nx + ti] = sum * h2;
        }
    }

    let v = ScalarField::new(g, &format!("pot_{}", f.name()), out)?;
    let defect = laplacian(&v);
    let mut residual_norm: f64 = 0.0;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            residual_norm = residual_norm.max((defect.at(i, j) - f.at(i, j)).abs());
        }
    }
    Ok(PotentialResult { v, residual_norm })
}

/// Sup over interior nodes of the Frobenius norm of the central-difference
/// Hessian (off-diagonal counted twice). Quadratics are reproduced exactly.
pub fn hessian_sup_norm(v: &ScalarField) -> f64 {
    let hess = hessian_field(v);
    let g = *v.grid();
    let mut sup: f64 = 0.0;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            sup = sup.max(hess.frob_sq(g.idx(i, j)));
        }
    }
    sup.sqrt()
}
