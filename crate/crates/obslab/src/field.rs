//! Uniform node-centered grids, scalar fields on them, node masks, the basic
//! difference stencils, and the `FIELD v1` text format.
//!
//! Conventions used by the whole crate:
//!
//! * node `(i, j)` sits at `(ox + i*h, oy + j*h)`, storage is row-major with
//!   `i` fastest (one row = one `y` level),
//! * stencils are defined on interior nodes only; boundary nodes of any
//!   derived field are written as `0.0` and are not meaningful,
//! * every stored value is finite; NaN and infinity are rejected at
//!   construction time and on file read.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// A point in the grid's physical coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        ((self.x - o.x).powi(2) + (self.y - o.y).powi(2)).sqrt()
    }
}

/// Uniform grid: `nx * ny` nodes, spacing `h` on both axes, origin at node
/// `(0, 0)`. Treat the fields as read-only; build grids through [`Grid::new`]
/// or [`Grid::centered`] so the invariants (`nx, ny >= 3`, `h > 0`) hold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub ox: f64,
    pub oy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, h: f64, ox: f64, oy: f64) -> Result<Grid> {
        if nx < 3 || ny < 3 {
            return Err(Error::Grid(format!("need at least 3x3 nodes, got {nx}x{ny}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Grid(format!("spacing must be finite and positive, got {h}")));
        }
        if !ox.is_finite() || !oy.is_finite() {
            return Err(Error::Grid(format!("origin must be finite, got ({ox}, {oy})")));
        }
        Ok(Grid { nx, ny, h, ox, oy })
    }

    /// Square grid with `n` nodes per side covering `[-half, half]^2`.
    pub fn centered(n: usize, half: f64) -> Result<Grid> {
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 nodes per side, got {n}")));
        }
        if !(half.is_finite() && half > 0.0) {
            return Err(Error::Grid(format!("half-width must be positive, got {half}")));
        }
        let h = 2.0 * half / (n - 1) as f64;
        Grid::new(n, n, h, -half, -half)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.ox + i as f64 * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.oy + j as f64 * self.h
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> Point {
        Point::new(self.x(i), self.y(j))
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    #[inline]
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i >= 1 && j >= 1 && i + 1 < self.nx && j + 1 < self.ny
    }

    /// Does the closed ball `B_r(c)` stay at least `margin` node layers away
    /// from the outermost node rows? `margin = 0` means "inside the node
    /// bounding box". A relative slack absorbs roundoff so that inscribed
    /// balls (touching the box exactly) pass.
    pub fn ball_inside(&self, c: Point, r: f64, margin: usize) -> bool {
        if !(r.is_finite() && r > 0.0) {
            return false;
        }
        let m = margin as f64 * self.h;
        let slack = 1e-12 * (1.0 + r + self.h);
        c.x - r >= self.ox + m - slack
            && c.x + r <= self.x_max() - m + slack
            && c.y - r >= self.oy + m - slack
            && c.y + r <= self.y_max() - m + slack
    }

    /// Inclusive index window certainly covering `B_r(c)`, clamped to the
    /// grid.
    pub(crate) fn ball_window(&self, c: Point, r: f64) -> (usize, usize, usize, usize) {
        let lo = |v: f64, o: f64, n: usize| -> usize {
            let t = ((v - o) / self.h).floor();
            if t <= 0.0 {
                0
            } else {
                (t as usize).min(n - 1)
            }
        };
        let hi = |v: f64, o: f64, n: usize| -> usize {
            let t = ((v - o) / self.h).ceil();
            if t <= 0.0 {
                0
            } else {
                (t as usize).min(n - 1)
            }
        };
        (
            lo(c.x - r, self.ox, self.nx),
            hi(c.x + r, self.ox, self.nx),
            lo(c.y - r, self.oy, self.ny),
            hi(c.y + r, self.oy, self.ny),
        )
    }
}

/// Scalar values on every node of a [`Grid`].
#[derive(Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    name: String,
    pub(crate) values: Vec<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        write!(
            f,
            "ScalarField({:?}, {}x{}, range [{:.3e}, {:.3e}])",
            self.name, self.grid.nx, self.grid.ny, lo, hi
        )
    }
}

impl ScalarField {
    pub fn new(grid: Grid, name: &str, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "field {:?}: {} values for a {}x{} grid",
                name,
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("field {name:?}: non-finite value {v}")));
        }
        Ok(ScalarField { grid, name: name.to_string(), values })
    }

    /// Build without the finite scan. For stencil outputs whose inputs were
    /// already validated.
    pub(crate) fn new_unchecked(grid: Grid, name: &str, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        ScalarField { grid, name: name.to_string(), values }
    }

    /// Sample `f(x, y)` at every node.
    pub fn from_fn(grid: Grid, name: &str, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        ScalarField::new(grid, name, values)
    }

    pub fn constant(grid: Grid, name: &str, c: f64) -> Result<ScalarField> {
        ScalarField::new(grid, name, vec![c; grid.len()])
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(&mut self, name: &str) {
        self.name = name.to_string();
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(v.is_finite());
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute value over nodes on the outermost rows (the Dirichlet
    /// trace).
    pub fn boundary_max_abs(&self) -> f64 {
        let g = self.grid;
        let mut m: f64 = 0.0;
        for i in 0..g.nx {
            m = m.max(self.at(i, 0).abs()).max(self.at(i, g.ny - 1).abs());
        }
        for j in 0..g.ny {
            m = m.max(self.at(0, j).abs()).max(self.at(g.nx - 1, j).abs());
        }
        m
    }
}

/// A set of grid nodes, same layout as a [`ScalarField`].
#[derive(Clone, PartialEq)]
pub struct Mask {
    grid: Grid,
    pub(crate) bits: Vec<bool>,
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mask({}/{} set, {}x{})", self.count(), self.grid.len(), self.grid.nx, self.grid.ny)
    }
}

impl Mask {
    pub fn empty(grid: Grid) -> Mask {
        Mask { grid, bits: vec![false; grid.len()] }
    }

    pub fn from_fn(grid: Grid, pred: impl Fn(f64, f64) -> bool) -> Mask {
        let mut bits = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                bits.push(pred(grid.x(i), grid.y(j)));
            }
        }
        Mask { grid, bits }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.bits[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        let k = self.grid.idx(i, j);
        self.bits[k] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Coordinates of every set node.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                if self.bits[self.grid.idx(i, j)] {
                    out.push(self.grid.pos(i, j));
                }
            }
        }
        out
    }

    /// Encode as a 0/1 field (for the `FIELD v1` format).
    pub fn to_field(&self, name: &str) -> ScalarField {
        let values = self.bits.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect();
        ScalarField::new_unchecked(self.grid, name, values)
    }

    /// Decode from a 0/1 field; anything above 1/2 counts as set.
    pub fn from_field(f: &ScalarField) -> Mask {
        Mask { grid: f.grid, bits: f.values.iter().map(|v| *v > 0.5).collect() }
    }
}

/// Five-point discrete Laplacian. Interior nodes only; the boundary rows of
/// the result are zero and carry no information (consumers that integrate a
/// Laplacian must stay at least one node from the boundary).
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid;
    let inv_h2 = 1.0 / (g.h * g.h);
    let mut out = vec![0.0; g.len()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let c = g.idx(i, j);
            out[c] = (f.values[c - 1] + f.values[c + 1] + f.values[c - g.nx] + f.values[c + g.nx]
                - 4.0 * f.values[c])
                * inv_h2;
        }
    }
    ScalarField::new_unchecked(g, &format!("lap_{}", f.name), out)
}

/// Central-difference gradient, interior nodes only (boundary rows zero).
pub(crate) fn gradient(f: &ScalarField) -> (ScalarField, ScalarField) {
    let g = f.grid;
    let inv_2h = 1.0 / (2.0 * g.h);
    let mut gx = vec![0.0; g.len()];
    let mut gy = vec![0.0; g.len()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let c = g.idx(i, j);
            gx[c] = (f.values[c + 1] - f.values[c - 1]) * inv_2h;
            gy[c] = (f.values[c + g.nx] - f.values[c - g.nx]) * inv_2h;
        }
    }
    (
        ScalarField::new_unchecked(g, "gx", gx),
        ScalarField::new_unchecked(g, "gy", gy),
    )
}

/// The three distinct entries of the central-difference Hessian.
///
/// `h12` uses the four diagonal neighbors; all entries are zero on the
/// boundary rows. The stencils are exact on quadratics, which several
/// consumers lean on.
#[derive(Clone, Debug)]
pub struct HessianField {
    pub h11: ScalarField,
    pub h12: ScalarField,
    pub h22: ScalarField,
}

impl HessianField {
    /// Squared Frobenius norm at a flat index, counting the off-diagonal
    /// entry twice.
    #[inline]
    pub fn frob_sq(&self, k: usize) -> f64 {
        let a = self.h11.values[k];
        let b = self.h12.values[k];
        let c = self.h22.values[k];
        a * a + 2.0 * b * b + c * c
    }

    pub fn grid(&self) -> &Grid {
        self.h11.grid()
    }
}

/// Central-difference Hessian of `f` on interior nodes.
pub fn hessian_field(f: &ScalarField) -> HessianField {
    let g = f.grid;
    let inv_h2 = 1.0 / (g.h * g.h);
    let inv_4h2 = 0.25 * inv_h2;
    let n = g.nx;
    let mut h11 = vec![0.0; g.len()];
    let mut h12 = vec![0.0; g.len()];
    let mut h22 = vec![0.0; g.len()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let c = g.idx(i, j);
            let v = &f.values;
            h11[c] = (v[c + 1] - 2.0 * v[c] + v[c - 1]) * inv_h2;
            h22[c] = (v[c + n] - 2.0 * v[c] + v[c - n]) * inv_h2;
            h12[c] = (v[c + n + 1] + v[c - n - 1] - v[c + n - 1] - v[c - n + 1]) * inv_4h2;
        }
    }
    HessianField {
        h11: ScalarField::new_unchecked(g, "h11", h11),
        h12: ScalarField::new_unchecked(g, "h12", h12),
        h22: ScalarField::new_unchecked(g, "h22", h22),
    }
}

/// 17 significant digits: enough to reproduce any f64 bit pattern on read.
pub(crate) fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), msg: msg.into() }
}

/// Write a field in the `FIELD v1` format:
///
/// ```text
/// FIELD v1
/// <nx> <ny> <h> <ox> <oy>
/// <row 0: nx values> ...
/// ```
///
/// Values are row-major, 17 significant digits, whitespace separated. A field
/// written and read back compares bitwise equal.
pub fn write_field(f: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let g = f.grid;
    let mut buf = String::with_capacity(g.len() * 26 + 64);
    buf.push_str("FIELD v1\n");
    buf.push_str(&format!(
        "{} {} {} {} {}\n",
        g.nx,
        g.ny,
        fmt_g17(g.h),
        fmt_g17(g.ox),
        fmt_g17(g.oy)
    ));
    for j in 0..g.ny {
        for i in 0..g.nx {
            if i > 0 {
                buf.push(' ');
            }
            buf.push_str(&fmt_g17(f.at(i, j)));
        }
        buf.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(buf.as_bytes()).map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Read a `FIELD v1` file. The field's name is the file stem.
pub fn read_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("FIELD v1") => {}
        Some(other) => return Err(parse_err(path, format!("bad magic line {other:?}"))),
        None => return Err(parse_err(path, "empty file")),
    }
    let header = lines.next().ok_or_else(|| parse_err(path, "missing header line"))?;
    let toks: Vec<&str> = header.split_ascii_whitespace().collect();
    if toks.len() != 5 {
        return Err(parse_err(path, format!("header needs 5 tokens, got {}", toks.len())));
    }
    let nx: usize = toks[0].parse().map_err(|_| parse_err(path, format!("bad nx {:?}", toks[0])))?;
    let ny: usize = toks[1].parse().map_err(|_| parse_err(path, format!("bad ny {:?}", toks[1])))?;
    let fnum = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| parse_err(path, format!("bad number {s:?}")))
    };
    let grid = Grid::new(nx, ny, fnum(toks[2])?, fnum(toks[3])?, fnum(toks[4])?)?;
    let rest = lines.collect::<Vec<_>>().join("\n");
    let mut values = Vec::with_capacity(grid.len());
    for tok in rest.split_ascii_whitespace() {
        if values.len() == grid.len() {
            return Err(parse_err(path, format!("trailing data after {} values", grid.len())));
        }
        let v = fnum(tok)?;
        if !v.is_finite() {
            return Err(parse_err(path, format!("non-finite value {tok:?}")));
        }
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(parse_err(
            path,
            format!("expected {} values, found {}", grid.len(), values.len()),
        ));
    }
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("field").to_string();
    ScalarField::new(grid, &name, values)
}

/// Fail unless two fields share one grid.
pub(crate) fn check_same_grid(a: &ScalarField, b: &ScalarField, what: &str) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Domain(format!("{what}: fields live on different grids")));
    }
    Ok(())
}
