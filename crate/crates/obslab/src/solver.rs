//! Relaxation solvers on the 5-point stencil: plain Poisson, the projected
//! scheme for the one-sided obstacle problem, and an active-set iteration for
//! the unsigned equation `lap u = f * chi_{u != 0}`.
//!
//! All three share one Gauss-Seidel engine with over-relaxation, row-major
//! sweep order, and no threading, so repeated runs are bit-identical.
//!
//! The active-set scheme treats the pinned set as an unknown: solve the
//! Dirichlet problem off the current mask, then move nodes across the mask
//! by two local tests.
//!
//! * Release: a pinned node is consistent only while its virtual Laplacian
//!   (neighbor sum over `h^2`, the node itself held at 0) stays inside the
//!   interval spanned by `0` and `f` there; that interval is exactly the
//!   multiplier range the equation admits at a node where `u` vanishes
//!   (Laplacian `f` on the active side, `0` on the pinned side, anything in
//!   between on a discrete interface). Outside it the pin is released. For
//!   `f > 0` the upper test coincides with the complementarity test of the
//!   projected scheme, which is why the two solvers land on identical masks.
//! * Capture: a free node joins the mask when its value opposes the phase of
//!   `f` (`u * sign f < -eps_z`: the solved value dove through zero, the
//!   unsigned equation wants the node dead), or when value and centered
//!   gradient both vanish within tolerance.
//!
//! Mask iterates are compared exactly; revisiting an earlier mask is
//! reported as a cycle, never damped into fake convergence.

use std::collections::VecDeque;

use crate::diagnostics::free_boundary_extract;
use crate::field::{gradient, Grid, Mask, Point, ScalarField};
use crate::{Error, Result};

/// Tuning knobs for all solvers. `None` fields are derived from the problem:
/// `zero_tol` from the boundary data scale, `grad_tol` from `zero_tol` and
/// the mesh, `relax` from the grid size.
#[derive(Debug, Clone)]
pub struct SolveParams {
    /// Target for the max-norm equation residual.
    pub linear_tol: f64,
    /// Sweep budget per linear solve.
    pub max_sweeps: usize,
    /// Height below which a node counts as part of the zero set
    /// (default `1e-8 * sup boundary |g| + 1e-12`).
    pub zero_tol: Option<f64>,
    /// Gradient threshold for the capture test (default `10 * zero_tol / h`).
    pub grad_tol: Option<f64>,
    /// Budget for mask updates in the active-set scheme. The mask moves at
    /// most one layer per update, so this bounds how far the initial guess
    /// may overshoot.
    pub max_outer: usize,
    /// Over-relaxation factor in (1, 2)
    /// (default `2 / (1 + sin(pi / max(nx, ny)))`).
    pub relax: Option<f64>,
    /// Starting mask for the active-set scheme; boundary nodes are ignored.
    /// `None` starts from the empty mask.
    pub initial_mask: Option<Mask>,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            linear_tol: 1e-10,
            max_sweeps: 50_000,
            zero_tol: None,
            grad_tol: None,
            max_outer: 200,
            relax: None,
            initial_mask: None,
        }
    }
}

/// Params with every derived quantity pinned down for a concrete problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Resolved {
    pub linear_tol: f64,
    pub max_sweeps: usize,
    pub eps_z: f64,
    pub eps_g: f64,
    pub max_outer: usize,
    pub omega: f64,
}

impl SolveParams {
    pub(crate) fn resolve(&self, g: &ScalarField) -> Result<Resolved> {
        let grid = g.grid();
        if !(self.linear_tol > 0.0) || !self.linear_tol.is_finite() {
            return Err(Error::Config(format!(
                "linear_tol must be positive and finite, got {}",
                self.linear_tol
            )));
        }
        if self.max_sweeps == 0 || self.max_outer == 0 {
            return Err(Error::Config("sweep and outer budgets must be at least 1".into()));
        }
        let eps_z = match self.zero_tol {
            Some(z) => z,
            None => 1e-8 * g.boundary_max_abs() + 1e-12,
        };
        if !(eps_z > 0.0) || !eps_z.is_finite() {
            return Err(Error::Config(format!("zero_tol must be positive, got {eps_z}")));
        }
        let eps_g = match self.grad_tol {
            Some(gt) => gt,
            None => 10.0 * eps_z / grid.h,
        };
        if !(eps_g > 0.0) || !eps_g.is_finite() {
            return Err(Error::Config(format!("grad_tol must be positive, got {eps_g}")));
        }
        let n = grid.nx.max(grid.ny) as f64;
        let omega = match self.relax {
            Some(w) => w,
            None => 2.0 / (1.0 + (std::f64::consts::PI / n).sin()),
        };
        if !(omega > 1.0 && omega < 2.0) {
            return Err(Error::Config(format!("relax must lie in (1, 2), got {omega}")));
        }
        Ok(Resolved {
            linear_tol: self.linear_tol,
            max_sweeps: self.max_sweeps,
            eps_z,
            eps_g,
            max_outer: self.max_outer,
            omega,
        })
    }
}

/// A solved field together with its zero set and the interface around it.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScalarField,
    /// Nodes where `|u| <= zero_tol` (for the active-set scheme this
    /// includes every pinned node).
    pub zero_set: Mask,
    /// Interpolated interface points; empty when the zero set has no
    /// interior anywhere.
    pub free_boundary: Vec<Point>,
    /// Mask updates for the active-set scheme, total sweeps otherwise.
    pub outer_iters: usize,
    pub converged: bool,
    /// Final equation residual (complementarity residual for the projected
    /// scheme).
    pub residual: f64,
    /// The height threshold the zero set was cut at.
    pub zero_tol: f64,
}

/// Final state of a failed active-set iteration.
#[derive(Debug, Clone)]
pub struct MaskFailure {
    /// Last solved field.
    pub u: ScalarField,
    /// Mask the last solve used.
    pub prev: Mask,
    /// Mask the update produced from it.
    pub last: Mask,
}

fn check_inputs(f: &ScalarField, g: &ScalarField) -> Result<Grid> {
    crate::field::check_same_grid(f, g, "solver inputs")?;
    Ok(*f.grid())
}

const RES_CHECK_EVERY: usize = 8;

/// One shared relaxation engine. `pinned` nodes (interior only) are held at
/// zero; `clamp` projects every update onto `u >= 0`.
struct Engine<'a> {
    g: Grid,
    f: &'a [f64],
    pinned: Option<&'a Mask>,
    clamp: bool,
    p: Resolved,
}

impl Engine<'_> {
    /// Initial iterate: boundary row from `g`, interior from the warm start
    /// (or zero), pinned nodes forced to zero.
    fn init(&self, gfield: &ScalarField, warm: Option<&ScalarField>) -> Vec<f64> {
        let (nx, ny) = (self.g.nx, self.g.ny);
        let mut u = vec![0.0; self.g.len()];
        if let Some(w) = warm {
            u.copy_from_slice(w.values());
        }
        for j in 0..ny {
            for i in 0..nx {
                if !self.g.is_interior(i, j) {
                    u[j * nx + i] = gfield.at(i, j);
                } else if self.pinned.is_some_and(|m| m.at(i, j)) {
                    u[j * nx + i] = 0.0;
                }
            }
        }
        u
    }

    fn residual(&self, u: &[f64]) -> f64 {
        let (nx, ny) = (self.g.nx, self.g.ny);
        let inv_h2 = 1.0 / (self.g.h * self.g.h);
        let mut worst: f64 = 0.0;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                if self.pinned.is_some_and(|m| m.at(i, j)) {
                    continue;
                }
                let k = j * nx + i;
                let lap = (u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx] - 4.0 * u[k]) * inv_h2;
                let r = if self.clamp && u[k] <= self.p.eps_z {
                    // Contact node: the equation only demands lap u <= f.
                    (lap - self.f[k]).max(0.0)
                } else {
                    (lap - self.f[k]).abs()
                };
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Relax until the residual target or the sweep budget is hit.
    fn run(&self, u: &mut [f64]) -> std::result::Result<(f64, usize), (f64, usize)> {
        let (nx, ny) = (self.g.nx, self.g.ny);
        let h2 = self.g.h * self.g.h;
        let omega = self.p.omega;
        for sweep in 1..=self.p.max_sweeps {
            for j in 1..ny - 1 {
                let row = j * nx;
                for i in 1..nx - 1 {
                    if self.pinned.is_some_and(|m| m.at(i, j)) {
                        continue;
                    }
                    let k = row + i;
                    let target =
                        0.25 * (u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx] - h2 * self.f[k]);
                    let mut val = u[k] + omega * (target - u[k]);
                    if self.clamp && val < 0.0 {
                        val = 0.0;
                    }
                    u[k] = val;
                }
            }
            if sweep % RES_CHECK_EVERY == 0 || sweep == self.p.max_sweeps {
                let res = self.residual(u);
                if res <= self.p.linear_tol {
                    return Ok((res, sweep));
                }
                if sweep == self.p.max_sweeps {
                    return Err((res, sweep));
                }
            }
        }
        unreachable!("sweep budget is at least 1");
    }
}

/// Dirichlet Poisson solve `lap u = f`, boundary values taken from the
/// boundary ring of `g` (interior of `g` is ignored).
pub fn solve_poisson(f: &ScalarField, g: &ScalarField, params: &SolveParams) -> Result<ScalarField> {
    let grid = check_inputs(f, g)?;
    let p = params.resolve(g)?;
    let eng = Engine { g: grid, f: f.values(), pinned: None, clamp: false, p };
    let mut u = eng.init(g, None);
    match eng.run(&mut u) {
        Ok(_) => Ok(ScalarField::new_unchecked(grid, "u", u)),
        Err((residual, sweeps)) => Err(Error::LinearStall {
            residual,
            tol: p.linear_tol,
            sweeps,
            partial: Box::new(ScalarField::new_unchecked(grid, "u", u)),
        }),
    }
}

fn assemble(
    u: ScalarField,
    eps_z: f64,
    extra_mask: Option<&Mask>,
    outer_iters: usize,
    residual: f64,
) -> SolveResult {
    let grid = *u.grid();
    let mut zero_set = Mask::empty(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if u.at(i, j).abs() <= eps_z {
                zero_set.set(i, j, true);
            }
        }
    }
    if let Some(m) = extra_mask {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if m.at(i, j) {
                    zero_set.set(i, j, true);
                }
            }
        }
    }
    let free_boundary = free_boundary_extract(&u, &zero_set, eps_z);
    SolveResult {
        u,
        zero_set,
        free_boundary,
        outer_iters,
        converged: true,
        residual,
        zero_tol: eps_z,
    }
}

/// Projected over-relaxation for the one-sided problem: `u >= 0`,
/// `lap u <= f`, and `u (lap u - f) = 0` node by node. Requires `g >= 0` on
/// the boundary ring.
pub fn solve_obstacle_psor(
    f: &ScalarField,
    g: &ScalarField,
    params: &SolveParams,
) -> Result<SolveResult> {
    let grid = check_inputs(f, g)?;
    let p = params.resolve(g)?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if !grid.is_interior(i, j) && g.at(i, j) < 0.0 {
                return Err(Error::Domain(format!(
                    "projected scheme needs nonnegative boundary data, g({}, {}) = {}",
                    grid.x(i),
                    grid.y(j),
                    g.at(i, j)
                )));
            }
        }
    }
    let eng = Engine { g: grid, f: f.values(), pinned: None, clamp: true, p };
    let mut u = eng.init(g, None);
    match eng.run(&mut u) {
        Ok((residual, sweeps)) => {
            let u = ScalarField::new_unchecked(grid, "u", u);
            Ok(assemble(u, p.eps_z, None, sweeps, residual))
        }
        Err((residual, sweeps)) => Err(Error::PsorStall {
            residual,
            tol: p.linear_tol,
            sweeps,
            partial: Box::new(ScalarField::new_unchecked(grid, "u", u)),
        }),
    }
}

/// One mask update: capture free nodes that vanished or dove through zero;
/// in rounds with no captures, release pinned nodes whose virtual Laplacian
/// left the admissible interval.
///
/// Capture comes first because a freshly mis-pinned region poisons the
/// neighbor values the release test reads: the dip that signals "capture
/// me" on one node shows up as an out-of-range virtual Laplacian on the
/// pins next to it. Releasing only from capture-quiet iterates means the
/// test always runs on self-consistent values. The fixed points are
/// unaffected: a mask is stationary exactly when neither test fires.
fn update_mask(u: &ScalarField, f: &ScalarField, mask: &Mask, p: &Resolved) -> Mask {
    let g = *u.grid();
    let (gx, gy) = gradient(u);
    let inv_h2 = 1.0 / (g.h * g.h);
    let mut next = mask.clone();
    let mut captured = false;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            if mask.at(i, j) {
                continue;
            }
            let fc = f.at(i, j);
            let uc = u.at(i, j);
            // signum(0) is 1; a vanishing right side has no phase to
            // oppose, so only the value-and-gradient test applies there.
            let grab = (fc != 0.0 && uc * fc.signum() < -p.eps_z)
                || (uc.abs() <= p.eps_z && gx.at(i, j).hypot(gy.at(i, j)) <= p.eps_g);
            if grab {
                next.set(i, j, true);
                captured = true;
            }
        }
    }
    if captured {
        return next;
    }
    // Two constraints on the release slack: solved neighbor values carry
    // O(linear_tol) errors amplified by 1/h^2 in the virtual Laplacian, and
    // a node released at excess `s` re-solves to roughly `s h^2 / 4`, which
    // must clear the capture threshold or the node flips forever. The 5x
    // factor keeps the hysteresis band open.
    let slack = (10.0 * p.linear_tol * inv_h2 + p.linear_tol).max(5.0 * p.eps_z * inv_h2);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            if !mask.at(i, j) {
                continue;
            }
            let fc = f.at(i, j);
            let vl = (u.at(i - 1, j) + u.at(i + 1, j) + u.at(i, j - 1) + u.at(i, j + 1)) * inv_h2;
            if vl < fc.min(0.0) - slack || vl > fc.max(0.0) + slack {
                next.set(i, j, false);
            }
        }
    }
    next
}

fn mask_hash(m: &Mask) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for j in 0..m.grid().ny {
        for i in 0..m.grid().nx {
            m.at(i, j).hash(&mut h);
        }
    }
    h.finish()
}

fn masks_equal(a: &Mask, b: &Mask) -> bool {
    let g = a.grid();
    for j in 0..g.ny {
        for i in 0..g.nx {
            if a.at(i, j) != b.at(i, j) {
                return false;
            }
        }
    }
    true
}

const CYCLE_WINDOW: usize = 20;

/// Active-set scheme for `lap u = f * chi_{u != 0}` with `u` and its
/// gradient vanishing on the zero set. No sign condition on `u` or `f`.
///
/// Starting from `params.initial_mask` (default empty), alternate Dirichlet
/// solves off the mask with capture/release updates until the mask repeats
/// itself: reproducing the previous mask is convergence, reproducing an
/// older one is a cycle error.
pub fn solve_no_sign(f: &ScalarField, g: &ScalarField, params: &SolveParams) -> Result<SolveResult> {
    let grid = check_inputs(f, g)?;
    let p = params.resolve(g)?;
    let mut mask = match &params.initial_mask {
        Some(m) => {
            if *m.grid() != grid {
                return Err(Error::Domain("initial mask lives on a different grid".into()));
            }
            // Boundary nodes carry Dirichlet data, not pins.
            let mut interior = Mask::empty(grid);
            for j in 1..grid.ny - 1 {
                for i in 1..grid.nx - 1 {
                    if m.at(i, j) {
                        interior.set(i, j, true);
                    }
                }
            }
            interior
        }
        None => Mask::empty(grid),
    };

    let mut history: VecDeque<(u64, Mask)> = VecDeque::new();
    let mut warm: Option<ScalarField> = None;
    for outer in 1..=p.max_outer {
        let eng = Engine { g: grid, f: f.values(), pinned: Some(&mask), clamp: false, p };
        let mut u = eng.init(g, warm.as_ref());
        let residual = match eng.run(&mut u) {
            Ok((residual, _)) => residual,
            Err((residual, sweeps)) => {
                return Err(Error::LinearStall {
                    residual,
                    tol: p.linear_tol,
                    sweeps,
                    partial: Box::new(ScalarField::new_unchecked(grid, "u", u)),
                })
            }
        };
        let u = ScalarField::new_unchecked(grid, "u", u);
        let next = update_mask(&u, f, &mask, &p);
        if masks_equal(&next, &mask) {
            return Ok(assemble(u, p.eps_z, Some(&mask), outer, residual));
        }
        let h = mask_hash(&next);
        for (age, (hh, mm)) in history.iter().rev().enumerate() {
            if *hh == h && masks_equal(mm, &next) {
                return Err(Error::MaskCycle {
                    period: age + 2,
                    outer,
                    state: Box::new(MaskFailure { u, prev: mask, last: next }),
                });
            }
        }
        if outer == p.max_outer {
            let mut delta = 0usize;
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    if mask.at(i, j) != next.at(i, j) {
                        delta += 1;
                    }
                }
            }
            return Err(Error::MaskStalled {
                outer,
                delta,
                state: Box::new(MaskFailure { u, prev: mask, last: next }),
            });
        }
        history.push_back((mask_hash(&mask), mask.clone()));
        if history.len() > CYCLE_WINDOW {
            history.pop_front();
        }
        warm = Some(u);
        mask = next;
    }
    unreachable!("the outer loop always returns");
}
