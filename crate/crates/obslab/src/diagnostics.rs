//! Scalar functionals measured around zero sets and interfaces: occupancy
//! density, minimal diameter, scaled frequency energies, mean oscillation of
//! the Hessian, modulus-of-continuity integrals, quadratic growth ratios,
//! interface extraction, sign checks, and a line fit for graph behavior.
//!
//! Conventions shared by everything here:
//!
//! * balls are closed node sets, circles are interpolated (see
//!   [`crate::quadrature`]);
//! * functionals built from gradients or Hessians demand one node of margin
//!   so the stencils never touch the boundary rows;
//! * zero-set masks are first filtered down to connected components that
//!   contain at least one interior node, because the interface is the
//!   boundary of the *interior* of the support: isolated nodes and bare
//!   lines of nodes enclose no area and do not count.

use crate::field::{gradient, Grid, HessianField, Mask, Point, ScalarField};
use crate::projection::mean_hessian;
use crate::quadrature::circle_integral_cubic;
use crate::{Error, Result};

/// Sign convention tag for the boundary term of the frequency energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySign {
    Plus,
    Minus,
}

impl BoundarySign {
    pub fn factor(self) -> f64 {
        match self {
            BoundarySign::Plus => 1.0,
            BoundarySign::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BoundarySign::Plus => "plus",
            BoundarySign::Minus => "minus",
        }
    }

    pub const BOTH: [BoundarySign; 2] = [BoundarySign::Plus, BoundarySign::Minus];
}

/// One frequency-energy evaluation.
#[derive(Debug, Clone, Copy)]
pub struct WeissSample {
    pub center: Point,
    pub r: f64,
    pub value: f64,
    pub boundary_sign: BoundarySign,
}

/// Extrapolated small-radius limit of the frequency energy.
#[derive(Debug, Clone)]
pub struct WeissLimit {
    /// Intercept of the least-squares line through (r, W(r)) at r = 0.
    pub value: f64,
    /// Set when the sequence wiggles more than it trends.
    pub low_confidence: bool,
    pub samples: Vec<WeissSample>,
}

/// Modulus-of-continuity integral with its tail estimate.
#[derive(Debug, Clone, Copy)]
pub struct DiniResult {
    /// Trapezoid value of `integral sigma(r)/r dr` over the sampled range.
    pub quadrature: f64,
    /// Power-law estimate of the unsampled tail below `r_min`; infinite
    /// when no stable decay rate was found.
    pub tail: f64,
    /// `quadrature + tail`.
    pub total: f64,
    pub converged: bool,
}

/// Total-least-squares line through interface points.
#[derive(Debug, Clone, Copy)]
pub struct GraphFit {
    /// Unit normal of the fitted line, canonicalized to `x >= 0` (then
    /// `y >= 0` on ties).
    pub normal: Point,
    /// Root-mean-square orthogonal distance, divided by the window radius.
    pub rms: f64,
    pub n_points: usize,
}

/// Keep only mask components (4-connected) that own at least one node whose
/// four neighbors are all in the mask. Off-grid counts as unmasked.
pub(crate) fn components_with_interior(mask: &Mask) -> Mask {
    let g = *mask.grid();
    let (nx, ny) = (g.nx, g.ny);
    let mut out = Mask::empty(g);
    let mut seen = vec![false; g.len()];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp: Vec<usize> = Vec::new();
    for start in 0..g.len() {
        if seen[start] || !mask.at(start % nx, start / nx) {
            continue;
        }
        comp.clear();
        stack.push(start);
        seen[start] = true;
        let mut has_interior = false;
        while let Some(k) = stack.pop() {
            comp.push(k);
            let (i, j) = (k % nx, k / nx);
            if g.is_interior(i, j)
                && mask.at(i - 1, j)
                && mask.at(i + 1, j)
                && mask.at(i, j - 1)
                && mask.at(i, j + 1)
            {
                has_interior = true;
            }
            let mut push = |ii: usize, jj: usize| {
                let kk = jj * nx + ii;
                if !seen[kk] && mask.at(ii, jj) {
                    seen[kk] = true;
                    stack.push(kk);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < nx {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < ny {
                push(i, j + 1);
            }
        }
        if has_interior {
            for &k in &comp {
                out.set(k % nx, k / nx, true);
            }
        }
    }
    out
}

fn require_ball(g: &Grid, center: Point, r: f64, margin: usize) -> Result<()> {
    if !g.ball_inside(center, r, margin) {
        return Err(Error::Domain(format!(
            "ball of radius {r} at ({}, {}) exits the grid (margin {margin})",
            center.x, center.y
        )));
    }
    Ok(())
}

/// Area fraction of the zero set inside the closed ball: masked nodes over
/// all nodes, after the interior-component filter.
pub fn lambda_density(zero_set: &Mask, center: Point, r: f64) -> Result<f64> {
    let g = *zero_set.grid();
    require_ball(&g, center, r, 0)?;
    let filtered = components_with_interior(zero_set);
    let (i0, i1, j0, j1) = g.ball_window(center, r);
    let r2 = r * r;
    let (mut hit, mut all) = (0u64, 0u64);
    for j in j0..=j1 {
        for i in i0..=i1 {
            let dx = g.x(i) - center.x;
            let dy = g.y(j) - center.y;
            if dx * dx + dy * dy <= r2 {
                all += 1;
                if filtered.at(i, j) {
                    hit += 1;
                }
            }
        }
    }
    if all == 0 {
        return Err(Error::Domain(format!("ball of radius {r} contains no grid node")));
    }
    Ok(hit as f64 / all as f64)
}

/// Smallest directional width of the points inside the closed ball, over
/// `n_angles` equispaced directions (at least 90 for degree resolution;
/// passing fewer overestimates the minimum). Fewer than two points: 0.
pub fn minimal_diameter(points: &[Point], center: Point, r: f64, n_angles: usize) -> f64 {
    let n_angles = n_angles.max(1);
    let selected: Vec<Point> =
        points.iter().copied().filter(|p| p.dist(center) <= r).collect();
    if selected.len() < 2 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for m in 0..n_angles {
        let th = std::f64::consts::PI * m as f64 / n_angles as f64;
        let (s, c) = th.sin_cos();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &selected {
            let t = c * p.x + s * p.y;
            lo = lo.min(t);
            hi = hi.max(t);
        }
        best = best.min(hi - lo);
    }
    best
}

/// Default angular resolution for [`minimal_diameter`]: one degree.
pub const DEFAULT_N_ANGLES: usize = 180;

const WEISS_N_THETA: usize = 512;

/// Bulk and boundary integrand fields for the frequency energy, reusable
/// across many (center, r, sign) evaluations of the same `u`.
pub(crate) fn weiss_fields(u: &ScalarField, f: &ScalarField) -> (ScalarField, ScalarField) {
    let g = *u.grid();
    let (gx, gy) = gradient(u);
    let mut bulk = vec![0.0; g.len()];
    let mut usq = vec![0.0; g.len()];
    for k in 0..g.len() {
        let (dx, dy) = (gx.values()[k], gy.values()[k]);
        bulk[k] = 0.5 * (dx * dx + dy * dy) + f.values()[k] * u.values()[k];
        usq[k] = u.values()[k] * u.values()[k];
    }
    (
        ScalarField::new_unchecked(g, "weiss_bulk", bulk),
        ScalarField::new_unchecked(g, "u_sq", usq),
    )
}

pub(crate) fn weiss_from_fields(
    bulk: &ScalarField,
    usq: &ScalarField,
    center: Point,
    r: f64,
    sign: BoundarySign,
) -> Result<WeissSample> {
    let g = *bulk.grid();
    require_ball(&g, center, r, 4)?;
    // The r^-4 and r^-5 scalings amplify quadrature bias mercilessly, so
    // the ball integral is assembled as a radial stack of cubic-sampled
    // circle integrals (trapezoid in rho, ring at rho = 0 vanishes) rather
    // than a node-counting sum.
    let n_rho = ((2.0 * r / g.h).ceil() as usize).max(8);
    let drho = r / n_rho as f64;
    let mut volume = 0.0;
    for k in 1..=n_rho {
        let rho = drho * k as f64;
        let w = if k == n_rho { 0.5 } else { 1.0 };
        volume += w * circle_integral_cubic(bulk, center, rho, WEISS_N_THETA)?;
    }
    volume *= drho;
    let boundary = circle_integral_cubic(usq, center, r, WEISS_N_THETA)?;
    let r4 = r.powi(4);
    let value = volume / r4 + sign.factor() * 2.0 * boundary / (r4 * r);
    Ok(WeissSample { center, r, value, boundary_sign: sign })
}

/// Scaled frequency energy at one ball:
/// `r^-4 * integral_B (|grad u|^2 / 2 + f u) + sign * 2 r^-5 * circle
/// integral of u^2`. Constant in `r` for 2-homogeneous `u` with constant
/// `f` under either sign.
pub fn weiss(
    u: &ScalarField,
    f: &ScalarField,
    center: Point,
    r: f64,
    sign: BoundarySign,
) -> Result<WeissSample> {
    crate::field::check_same_grid(u, f, "weiss")?;
    let (bulk, usq) = weiss_fields(u, f);
    weiss_from_fields(&bulk, &usq, center, r, sign)
}

/// Small-radius limit of the frequency energy by least-squares linear
/// extrapolation in `r` over at least 4 strictly decreasing radii.
pub fn weiss_limit(
    u: &ScalarField,
    f: &ScalarField,
    center: Point,
    radii: &[f64],
    sign: BoundarySign,
) -> Result<WeissLimit> {
    crate::field::check_same_grid(u, f, "weiss_limit")?;
    if radii.len() < 4 {
        return Err(Error::Insufficient(format!(
            "limit extrapolation needs at least 4 radii, got {}",
            radii.len()
        )));
    }
    for w in radii.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Domain("radii must be strictly decreasing".into()));
        }
    }
    let (bulk, usq) = weiss_fields(u, f);
    let samples: Vec<WeissSample> = radii
        .iter()
        .map(|&r| weiss_from_fields(&bulk, &usq, center, r, sign))
        .collect::<Result<_>>()?;
    // Least squares W = a + b r; the limit is a.
    let n = samples.len() as f64;
    let sr: f64 = samples.iter().map(|s| s.r).sum();
    let srr: f64 = samples.iter().map(|s| s.r * s.r).sum();
    let sw: f64 = samples.iter().map(|s| s.value).sum();
    let srw: f64 = samples.iter().map(|s| s.r * s.value).sum();
    let det = n * srr - sr * sr;
    let value = (sw * srr - sr * srw) / det;
    // Wiggle vs trend: flag when the path length of the sequence clearly
    // exceeds its net displacement.
    let tv: f64 = samples.windows(2).map(|w| (w[1].value - w[0].value).abs()).sum();
    let net = (samples[samples.len() - 1].value - samples[0].value).abs();
    let scale = samples.iter().map(|s| s.value.abs()).fold(0.0, f64::max) + 1e-300;
    let low_confidence = tv - net > 0.02 * scale;
    Ok(WeissLimit { value, low_confidence, samples })
}

/// Largest mean-square oscillation of the Hessian over the supplied
/// (center, radius) pairs: `r^-2 * integral_B |H - mean_B H|_F^2`. A
/// sampled lower bound for the supremum over all balls.
pub fn bmo_seminorm(hess: &HessianField, centers: &[Point], radii: &[f64]) -> Result<f64> {
    if centers.is_empty() || radii.is_empty() {
        return Err(Error::Insufficient("oscillation sampling needs centers and radii".into()));
    }
    let g = *hess.grid();
    let h2 = g.h * g.h;
    let mut worst: f64 = 0.0;
    for &c in centers {
        for &r in radii {
            require_ball(&g, c, r, 1)?;
            let mean = mean_hessian(hess, c, r)?;
            let (i0, i1, j0, j1) = g.ball_window(c, r);
            let r2 = r * r;
            let mut sum = 0.0;
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let dx = g.x(i) - c.x;
                    let dy = g.y(j) - c.y;
                    if dx * dx + dy * dy <= r2 {
                        let k = g.idx(i, j);
                        let exx = hess.h11.values()[k] - mean.xx;
                        let exy = hess.h12.values()[k] - mean.xy;
                        let eyy = hess.h22.values()[k] - mean.yy;
                        sum += exx * exx + 2.0 * exy * exy + eyy * eyy;
                    }
                }
            }
            worst = worst.max(sum * h2 / r2);
        }
    }
    Ok(worst)
}

/// Integral `sigma(r)/r dr` over the sampled range plus a tail estimate.
///
/// `samples` are `(r, sigma)` pairs with strictly monotone radii (either
/// direction) spanning at least two decades; `sigma` must be nonnegative
/// and nondecreasing. The quadrature is the trapezoid rule in `ln r`. The
/// tail below the smallest radius comes from power-law fits over the two
/// lowest decades: when both decay rates are positive and their reciprocals
/// agree within 10 percent, the tail is `sigma(r_min) / rate`; otherwise
/// the integral is reported diverged.
pub fn dini_integral(samples: &[(f64, f64)]) -> Result<DiniResult> {
    if samples.len() < 4 {
        return Err(Error::Insufficient(format!(
            "modulus integration needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    let ascending = samples[1].0 > samples[0].0;
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    if !ascending {
        s.reverse();
    }
    let sig_scale = s.iter().map(|p| p.1).fold(0.0, f64::max);
    for w in s.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Domain("radii must be strictly monotone".into()));
        }
        if w[1].1 < w[0].1 - 1e-9 * (1.0 + sig_scale) {
            return Err(Error::Domain(format!(
                "modulus must be nondecreasing: sigma({}) = {} > sigma({}) = {}",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    for &(r, sig) in &s {
        if !(r > 0.0) || !r.is_finite() || !sig.is_finite() || sig < -1e-12 {
            return Err(Error::Domain(format!("bad modulus sample ({r}, {sig})")));
        }
    }
    let quadrature: f64 = s
        .windows(2)
        .map(|w| ((w[1].0 / w[0].0).ln()) * 0.5 * (w[0].1.max(0.0) + w[1].1.max(0.0)))
        .sum();

    let sigma_min = s[0].1.max(0.0);
    if sigma_min == 0.0 {
        // The modulus is nondecreasing, so it vanishes on the whole tail.
        return Ok(DiniResult { quadrature, tail: 0.0, converged: true, total: quadrature });
    }
    let r_min = s[0].0;
    let r_max = s[s.len() - 1].0;
    if r_max / r_min < 100.0 {
        return Err(Error::Insufficient(
            "tail estimation needs samples spanning at least two decades".into(),
        ));
    }
    // Log-log decay rate over one decade; None when under 2 positive points.
    let decade_rate = |lo: f64, hi: f64| -> Option<f64> {
        let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(r, sig) in &s {
            if r >= lo && r <= hi && sig > 0.0 {
                let (x, y) = (r.ln(), sig.ln());
                n += 1.0;
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
        }
        if n < 2.0 {
            return None;
        }
        let det = n * sxx - sx * sx;
        if det <= 0.0 {
            return None;
        }
        Some((n * sxy - sx * sy) / det)
    };
    let p1 = decade_rate(r_min, 10.0 * r_min);
    let p2 = decade_rate(10.0 * r_min, 100.0 * r_min);
    let converged = match (p1, p2) {
        (Some(p1), Some(p2)) if p1 > 1e-3 && p2 > 1e-3 => {
            (1.0 / p1 - 1.0 / p2).abs() <= 0.1 * (1.0 / p1)
        }
        _ => false,
    };
    if converged {
        let tail = sigma_min / p1.unwrap();
        Ok(DiniResult { quadrature, tail, converged: true, total: quadrature + tail })
    } else {
        Ok(DiniResult {
            quadrature,
            tail: f64::INFINITY,
            converged: false,
            total: f64::INFINITY,
        })
    }
}

/// `sup_B_r |u| / r^2` for each radius.
pub fn quad_growth(u: &ScalarField, center: Point, radii: &[f64]) -> Result<Vec<f64>> {
    let g = *u.grid();
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        require_ball(&g, center, r, 0)?;
        let (i0, i1, j0, j1) = g.ball_window(center, r);
        let r2 = r * r;
        let mut sup: f64 = 0.0;
        for j in j0..=j1 {
            for i in i0..=i1 {
                let dx = g.x(i) - center.x;
                let dy = g.y(j) - center.y;
                if dx * dx + dy * dy <= r2 {
                    sup = sup.max(u.at(i, j).abs());
                }
            }
        }
        out.push(sup / r2);
    }
    Ok(out)
}

/// Interface points of a zero-set mask: grid edges where membership flips,
/// refined along the edge to where `|u|` crosses `zero_tol` by linear
/// interpolation. Components of the mask with no interior nodes are ignored
/// (they bound no area). Scan order is row-major, x-edge then y-edge, so
/// the output order is reproducible.
pub fn free_boundary_extract(u: &ScalarField, zero_set: &Mask, zero_tol: f64) -> Vec<Point> {
    let g = *u.grid();
    let filtered = components_with_interior(zero_set);
    let mut out = Vec::new();
    let mut emit = |ia: usize, ja: usize, ib: usize, jb: usize| {
        let (ina, inb) = (filtered.at(ia, ja), filtered.at(ib, jb));
        if ina == inb {
            return;
        }
        // Walk from the zero-side node toward the live node.
        let ((zi, zj), (li, lj)) = if ina { ((ia, ja), (ib, jb)) } else { ((ib, jb), (ia, ja)) };
        let vz = u.at(zi, zj).abs();
        let vl = u.at(li, lj).abs();
        let t = if vl > vz { ((zero_tol - vz) / (vl - vz)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(Point::new(
            g.x(zi) + t * (g.x(li) - g.x(zi)),
            g.y(zj) + t * (g.y(lj) - g.y(zj)),
        ));
    };
    for j in 0..g.ny {
        for i in 0..g.nx {
            if i + 1 < g.nx {
                emit(i, j, i + 1, j);
            }
            if j + 1 < g.ny {
                emit(i, j, i, j + 1);
            }
        }
    }
    out
}

/// Minimum of `u` over the closed ball.
pub fn sign_check(u: &ScalarField, center: Point, r: f64) -> Result<f64> {
    let g = *u.grid();
    require_ball(&g, center, r, 0)?;
    let (i0, i1, j0, j1) = g.ball_window(center, r);
    let r2 = r * r;
    let mut min = f64::INFINITY;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let dx = g.x(i) - center.x;
            let dy = g.y(j) - center.y;
            if dx * dx + dy * dy <= r2 {
                min = min.min(u.at(i, j));
            }
        }
    }
    if min.is_infinite() {
        return Err(Error::Domain(format!("ball of radius {r} contains no grid node")));
    }
    Ok(min)
}

/// Total-least-squares line through the interface points inside the window
/// `B_r(center)`: principal-component fit of the 2x2 scatter matrix. The
/// rms orthogonal residual is scaled by `r`, so graph-like interfaces score
/// near `h/r` and crossing or space-filling configurations score order one.
pub fn c1_graph_fit(points: &[Point], center: Point, r: f64) -> Result<GraphFit> {
    let selected: Vec<Point> =
        points.iter().copied().filter(|p| p.dist(center) <= r).collect();
    let n = selected.len();
    if n < 5 {
        return Err(Error::Insufficient(format!(
            "line fit needs at least 5 interface points in the window, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = selected.iter().map(|p| p.x).sum::<f64>() / nf;
    let my = selected.iter().map(|p| p.y).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &selected {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let mid = 0.5 * (sxx + syy);
    let rad = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let lam_min = mid - rad;
    // Eigenvector of the smaller eigenvalue is the line normal. Both rows of
    // (A - lam I) yield a candidate; the one with the larger norm is the
    // numerically stable choice (the other degenerates when the matrix is
    // nearly diagonal).
    let v1 = (sxy, lam_min - sxx);
    let v2 = (lam_min - syy, sxy);
    let (mut nxv, mut nyv) =
        if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
    if nxv == 0.0 && nyv == 0.0 {
        // Isotropic scatter: no preferred direction, pick one.
        (nxv, nyv) = (1.0, 0.0);
    }
    let len = nxv.hypot(nyv);
    nxv /= len;
    nyv /= len;
    if nxv < 0.0 || (nxv == 0.0 && nyv < 0.0) {
        nxv = -nxv;
        nyv = -nyv;
    }
    let rms = (lam_min.max(0.0) / nf).sqrt() / r;
    Ok(GraphFit { normal: Point::new(nxv, nyv), rms, n_points: n })
}
