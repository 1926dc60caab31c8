//! Cell tilings of target regions and the evaluation grids built from them.
//!
//! A tiling splits the parameter domain of a region (box, polar disk,
//! spherical-coordinate ball, rotated spherical cap) into parameter boxes.
//! Every cell carries a certified radius: all points of the cell lie within
//! that geodesic distance of the cell's center node.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point, RegionShape, RegionSpec, MAX_DIM};

/// Default cap on the number of nodes of one grid.
pub const DEFAULT_NODE_CAP: usize = 4_000_000;

/// Relative slack accepted when comparing a computed cell radius with `h`.
const RADIUS_SLACK: f64 = 1e-12;

/// A parameter box of a [`Tiling`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    lo: [f64; MAX_DIM],
    hi: [f64; MAX_DIM],
}

impl Cell {
    fn new(lo: &[f64], hi: &[f64]) -> Self {
        let mut c = Cell { lo: [0.0; MAX_DIM], hi: [0.0; MAX_DIM] };
        c.lo[..lo.len()].copy_from_slice(lo);
        c.hi[..hi.len()].copy_from_slice(hi);
        c
    }

    fn mid(&self, i: usize) -> f64 {
        0.5 * (self.lo[i] + self.hi[i])
    }

    fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }
}

/// Parametrisation of a region shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tiling {
    /// `[lo, hi]^d`, parameters are the coordinates.
    Cube { lo: f64, hi: f64, d: usize },
    /// Disk in `ℝ²`, parameters `(r, φ)`.
    Polar { center: Point, radius: f64 },
    /// Ball in `ℝ³`, parameters `(r, θ, φ)`.
    Spherical { center: Point, radius: f64 },
    /// Geodesic ball on `S²` around `frame[2]`, parameters `(θ, φ)`.
    Cap { frame: [[f64; 3]; 3], radius: f64 },
}

fn orthonormal_frame(center: &Point) -> [[f64; 3]; 3] {
    let n = center.norm();
    let e3 = [center.get(0) / n, center.get(1) / n, center.get(2) / n];
    let a = if e3[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = a[0] * e3[0] + a[1] * e3[1] + a[2] * e3[2];
    let mut e1 = [a[0] - dot * e3[0], a[1] - dot * e3[1], a[2] - dot * e3[2]];
    let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|x| *x /= l);
    let e2 = [
        e3[1] * e1[2] - e3[2] * e1[1],
        e3[2] * e1[0] - e3[0] * e1[2],
        e3[0] * e1[1] - e3[1] * e1[0],
    ];
    [e1, e2, e3]
}

/// Largest `sin θ` over `[a, b] ⊂ [0, π]`.
fn max_sin(a: f64, b: f64) -> f64 {
    if a <= PI / 2.0 && b >= PI / 2.0 {
        1.0
    } else {
        a.sin().max(b.sin())
    }
}

fn unit_from_angles(theta: f64, phi: f64) -> [f64; 3] {
    let s = theta.sin();
    [s * phi.cos(), s * phi.sin(), theta.cos()]
}

impl Tiling {
    pub fn from_shape(shape: RegionShape) -> Self {
        match shape {
            RegionShape::Cube { lo, hi, d } => Tiling::Cube { lo, hi, d },
            RegionShape::FlatBall { center, radius } if center.dim() == 2 => Tiling::Polar { center, radius },
            RegionShape::FlatBall { center, radius } => Tiling::Spherical { center, radius },
            RegionShape::SphereCap { center, radius } => {
                Tiling::Cap { frame: orthonormal_frame(&center), radius }
            }
        }
    }

    pub fn for_region(spec: &ManifoldSpec, region: &RegionSpec) -> Result<Self> {
        let shape = spec.region_shape(region)?;
        Ok(Tiling::from_shape(shape))
    }

    /// Number of parameters.
    pub fn param_dim(&self) -> usize {
        match *self {
            Tiling::Cube { d, .. } => d,
            Tiling::Polar { .. } | Tiling::Cap { .. } => 2,
            Tiling::Spherical { .. } => 3,
        }
    }

    fn point_at(&self, p: &[f64]) -> Point {
        match *self {
            Tiling::Cube { d, .. } => Point::new(&p[..d]),
            Tiling::Polar { center, .. } => {
                Point::xy(center.get(0) + p[0] * p[1].cos(), center.get(1) + p[0] * p[1].sin())
            }
            Tiling::Spherical { center, .. } => {
                let u = unit_from_angles(p[1], p[2]);
                Point::xyz(center.get(0) + p[0] * u[0], center.get(1) + p[0] * u[1], center.get(2) + p[0] * u[2])
            }
            Tiling::Cap { frame, .. } => {
                let u = unit_from_angles(p[0], p[1]);
                let mut v = [0.0; 3];
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi = u[0] * frame[0][i] + u[1] * frame[1][i] + u[2] * frame[2][i];
                }
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                Point::xyz(v[0] / n, v[1] / n, v[2] / n)
            }
        }
    }

    /// Node of a cell: the image of its parameter midpoint.
    pub fn center(&self, cell: &Cell) -> Point {
        let mut p = [0.0; MAX_DIM];
        for (i, pi) in p.iter_mut().enumerate().take(self.param_dim()) {
            *pi = cell.mid(i);
        }
        self.point_at(&p)
    }

    /// Certified bound on the geodesic distance from the node to any point of the cell.
    pub fn radius(&self, cell: &Cell) -> f64 {
        match *self {
            Tiling::Cube { d, .. } => {
                (0..d).map(|i| (0.5 * cell.width(i)).powi(2)).sum::<f64>().sqrt()
            }
            Tiling::Polar { .. } => {
                // The farthest point of an annular sector (opening ≤ π) from its
                // midpoint node is one of the four corners.
                let c = self.center(cell);
                let mut worst: f64 = 0.0;
                for &r in &[cell.lo[0], cell.hi[0]] {
                    for &phi in &[cell.lo[1], cell.hi[1]] {
                        worst = worst.max(c.dist2(&self.point_at(&[r, phi])));
                    }
                }
                worst.sqrt()
            }
            Tiling::Spherical { .. } => {
                // Radial move, then along the meridian, then along the parallel.
                let gamma = 0.5 * cell.width(1) + max_sin(cell.lo[1], cell.hi[1]) * 0.5 * cell.width(2);
                0.5 * cell.width(0) + cell.hi[0] * gamma.min(PI)
            }
            Tiling::Cap { .. } => {
                let gamma = 0.5 * cell.width(0) + max_sin(cell.lo[0], cell.hi[0]) * 0.5 * cell.width(1);
                gamma.min(PI)
            }
        }
    }

    /// Splits each parameter interval into `factor` equal parts.
    pub fn subdivide(&self, cell: &Cell, factor: usize, out: &mut Vec<Cell>) {
        let p = self.param_dim();
        let total = factor.pow(p as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut child = *cell;
            for i in 0..p {
                let j = rem % factor;
                rem /= factor;
                let w = cell.width(i) / factor as f64;
                child.lo[i] = cell.lo[i] + w * j as f64;
                child.hi[i] = if j + 1 == factor { cell.hi[i] } else { cell.lo[i] + w * (j + 1) as f64 };
            }
            out.push(child);
        }
    }

    /// Cells with radius at most `h` tiling the whole region, in a fixed order.
    pub fn root_cells(&self, h: f64, cap: usize) -> Result<Vec<Cell>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("grid spacing h must be positive, got {h}")));
        }
        let fits = |c: &Cell| self.radius(c) <= h * (1.0 + RADIUS_SLACK);
        match *self {
            Tiling::Cube { lo, hi, d } => {
                let side = hi - lo;
                let mut n = ((side * (d as f64).sqrt() / (2.0 * h)) - 1e-9).ceil().max(1.0) as usize;
                while !fits(&Cell::new(&vec![lo; d], &vec![lo + side / n as f64; d])) {
                    n += 1;
                }
                let total = (n as f64).powi(d as i32);
                if total > cap as f64 {
                    return Err(Error::GridTooLarge { required: total.min(usize::MAX as f64) as usize, cap });
                }
                let root = Cell::new(&vec![lo; d], &vec![hi; d]);
                let mut out = Vec::with_capacity(total as usize);
                self.subdivide(&root, n, &mut out);
                Ok(out)
            }
            Tiling::Polar { radius, .. } => {
                let nr = (radius / h - 1e-9).ceil().max(1.0) as usize;
                let mut rings = Vec::with_capacity(nr);
                let mut total = 0usize;
                for j in 0..nr {
                    let (r0, r1) = (radius * j as f64 / nr as f64, radius * (j + 1) as f64 / nr as f64);
                    let mut nphi = ((2.0 * PI * r1 / (3f64.sqrt() * h)).ceil() as usize).max(2);
                    while !fits(&Cell::new(&[r0, 0.0], &[r1, 2.0 * PI / nphi as f64])) {
                        nphi += (nphi / 8).max(1);
                    }
                    total = total.saturating_add(nphi);
                    if total > cap {
                        return Err(Error::GridTooLarge { required: self.estimate_count(h), cap });
                    }
                    rings.push((r0, r1, nphi));
                }
                let mut out = Vec::with_capacity(total);
                for (r0, r1, nphi) in rings {
                    for i in 0..nphi {
                        let w = 2.0 * PI / nphi as f64;
                        out.push(Cell::new(&[r0, w * i as f64], &[r1, w * (i + 1) as f64]));
                    }
                }
                Ok(out)
            }
            Tiling::Spherical { radius, .. } => {
                // Budget: h/4 radial, 3h/8 along meridians, 3h/8 along parallels.
                let nr = (radius / (0.5 * h) - 1e-9).ceil().max(1.0) as usize;
                let mut layout = Vec::new();
                let mut total = 0usize;
                for j in 0..nr {
                    let (r0, r1) = (radius * j as f64 / nr as f64, radius * (j + 1) as f64 / nr as f64);
                    let ntheta = ((PI * r1 / (0.75 * h)).ceil() as usize).max(1);
                    for i in 0..ntheta {
                        let (t0, t1) = (PI * i as f64 / ntheta as f64, PI * (i + 1) as f64 / ntheta as f64);
                        let s = max_sin(t0, t1);
                        let nphi = ((2.0 * PI * r1 * s / (0.75 * h)).ceil() as usize).max(2);
                        total = total.saturating_add(nphi);
                        if total > cap {
                            return Err(Error::GridTooLarge { required: self.estimate_count(h), cap });
                        }
                        layout.push(([r0, t0], [r1, t1], nphi));
                    }
                }
                let mut out = Vec::with_capacity(total);
                for (lo, hi, nphi) in layout {
                    let w = 2.0 * PI / nphi as f64;
                    for k in 0..nphi {
                        out.push(Cell::new(&[lo[0], lo[1], w * k as f64], &[hi[0], hi[1], w * (k + 1) as f64]));
                    }
                }
                debug_assert!(out.iter().all(fits));
                Ok(out)
            }
            Tiling::Cap { radius, .. } => {
                let ntheta = (radius / (0.5 * h.min(PI)) - 1e-9).ceil().max(1.0) as usize;
                let dtheta = radius / ntheta as f64;
                let mut layout = Vec::with_capacity(ntheta);
                let mut total = 0usize;
                for i in 0..ntheta {
                    let (t0, t1) = (dtheta * i as f64, if i + 1 == ntheta { radius } else { dtheta * (i + 1) as f64 });
                    let s = max_sin(t0, t1);
                    let room = h - 0.5 * dtheta;
                    let nphi = ((PI * s / room).ceil() as usize).max(2);
                    total = total.saturating_add(nphi);
                    if total > cap {
                        return Err(Error::GridTooLarge { required: self.estimate_count(h), cap });
                    }
                    layout.push((t0, t1, nphi));
                }
                let mut out = Vec::with_capacity(total);
                for (t0, t1, nphi) in layout {
                    let w = 2.0 * PI / nphi as f64;
                    for k in 0..nphi {
                        out.push(Cell::new(&[t0, w * k as f64], &[t1, w * (k + 1) as f64]));
                    }
                }
                debug_assert!(out.iter().all(fits));
                Ok(out)
            }
        }
    }

    /// Approximate node count of `root_cells(h)`, without building them.
    pub fn estimate_count(&self, h: f64) -> usize {
        let est = match *self {
            Tiling::Cube { lo, hi, d } => ((hi - lo) * (d as f64).sqrt() / (2.0 * h)).ceil().powi(d as i32),
            Tiling::Polar { radius, .. } => PI * (radius / h).powi(2) * 2.0 / 3f64.sqrt() + radius / h,
            Tiling::Spherical { radius, .. } => (radius / h).powi(3) * 4.0 * PI / 3.0 * 2.0 * (4.0 / 3.0f64).powi(2),
            Tiling::Cap { radius, .. } => 2.0 * PI * (1.0 - radius.cos()) / (h * h) * 2.0 + radius / h,
        };
        est.min(usize::MAX as f64) as usize
    }
}

/// Finite set of nodes in `B` with a certified covering radius.
#[derive(Clone, Debug)]
pub struct EvalGrid {
    pub spec: ManifoldSpec,
    pub region: RegionSpec,
    pub tiling: Tiling,
    pub cells: Vec<Cell>,
    pub nodes: Vec<Point>,
    /// Per-node certified cell radius.
    pub radii: Vec<f64>,
    /// Every point of `B` lies within geodesic distance `h` of some node.
    pub h: f64,
}

impl EvalGrid {
    fn from_cells(spec: ManifoldSpec, region: RegionSpec, tiling: Tiling, cells: Vec<Cell>) -> Self {
        let nodes: Vec<Point> = cells.iter().map(|c| tiling.center(c)).collect();
        let radii: Vec<f64> = cells.iter().map(|c| tiling.radius(c)).collect();
        let h = radii.iter().cloned().fold(0.0, f64::max);
        EvalGrid { spec, region, tiling, cells, nodes, radii, h }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Splits every cell into `factor` parts per parameter. With an odd
    /// factor the refined node set contains the current one.
    pub fn refine(&self, factor: usize, cap: usize) -> Result<EvalGrid> {
        if factor == 0 {
            return Err(Error::Domain("refinement factor must be >= 1".into()));
        }
        let required = self.cells.len().saturating_mul(factor.pow(self.tiling.param_dim() as u32));
        if required > cap {
            return Err(Error::GridTooLarge { required, cap });
        }
        let mut cells = Vec::with_capacity(required);
        for c in &self.cells {
            self.tiling.subdivide(c, factor, &mut cells);
        }
        Ok(EvalGrid::from_cells(self.spec, self.region, self.tiling, cells))
    }
}

/// Grid over `B` with covering radius at most `h`.
pub fn build_grid(spec: &ManifoldSpec, region: &RegionSpec, h: f64) -> Result<EvalGrid> {
    build_grid_capped(spec, region, h, DEFAULT_NODE_CAP)
}

pub fn build_grid_capped(spec: &ManifoldSpec, region: &RegionSpec, h: f64, cap: usize) -> Result<EvalGrid> {
    let tiling = Tiling::for_region(spec, region)?;
    let cells = tiling.root_cells(h, cap)?;
    Ok(EvalGrid::from_cells(*spec, *region, tiling, cells))
}
