//! Catalog of compact manifolds-with-boundary with closed-form geometry.
//!
//! Every family lives in a flat ambient space `ℝ^m`: the unit cube
//! `[0,1]^d`, the closed unit disk, the closed unit ball in `ℝ³`, the unit
//! sphere `S² ⊂ ℝ³` (no boundary) and the spherical cap of polar angle `α`
//! around the north pole `(0,0,1)`.

use std::f64::consts::PI;
use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::limits;

/// Largest ambient dimension supported by [`Point`].
pub const MAX_DIM: usize = 4;

/// Tolerance for "lies on the unit sphere".
pub const SPHERE_TOL: f64 = 1e-12;

/// A point in ambient coordinates.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "point dimension {} outside 1..={MAX_DIM}",
            coords.len()
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point {
            coords: c,
            dim: coords.len() as u8,
        }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point::new(&[x, y])
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Point::new(&[x, y, z])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.coords[i]
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        // Unused trailing slots are zero on both sides.
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Point {
        let mut p = *self;
        p.coords.iter_mut().for_each(|c| *c *= s);
        p
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PointVisitor;
        impl<'de> Visitor<'de> for PointVisitor {
            type Value = Point;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "an array of 1..={MAX_DIM} numbers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Point, A::Error> {
                let mut c = Vec::with_capacity(MAX_DIM);
                while let Some(x) = seq.next_element::<f64>()? {
                    if c.len() == MAX_DIM {
                        return Err(de::Error::invalid_length(MAX_DIM + 1, &self));
                    }
                    c.push(x);
                }
                if c.is_empty() {
                    return Err(de::Error::invalid_length(0, &self));
                }
                Ok(Point::new(&c))
            }
        }
        d.deserialize_seq(PointVisitor)
    }
}

/// Catalog geometry `A ⊂ ℳ ⊂ ℝ^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ManifoldSpec {
    /// `[0,1]^d` in `ℝ^d`.
    UnitSquare {
        #[serde(default = "default_square_dim")]
        d: usize,
    },
    UnitDisk,
    /// Closed unit ball in `ℝ³`.
    SolidBall,
    /// `S²` in `ℝ³`, empty boundary.
    UnitSphere,
    /// `{x ∈ S² : x₃ ≥ cos α}`.
    SphericalCap { alpha: f64 },
}

fn default_square_dim() -> usize {
    2
}

/// Distance used to define coverage balls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Riemannian distance in `ℳ`.
    #[default]
    Geodesic,
    /// Norm of the difference in `ℝ^m`.
    #[serde(alias = "euclidean")]
    AmbientEuclidean,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::Geodesic => "geodesic",
            Metric::AmbientEuclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic" => Ok(Metric::Geodesic),
            "euclidean" | "ambient_euclidean" => Ok(Metric::AmbientEuclidean),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

/// The target set `B ⊂ A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionSpec {
    /// `B = A`.
    #[default]
    All,
    /// `B = A ∩ B(center, radius)`.
    GeodesicBallIntersect { center: Point, radius: f64 },
    /// `B` = closure of the `δ`-interior, i.e. points at distance `≥ δ` from `∂A`.
    InteriorBody { delta: f64 },
}

/// `(v(B), ṽ(B ∩ ∂A))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionMeasures {
    pub volume: f64,
    pub boundary: f64,
}

/// Shape of a region in a form that grids can tile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegionShape {
    /// `[lo, hi]^d`.
    Cube { lo: f64, hi: f64, d: usize },
    /// Euclidean ball in `ℝ²` or `ℝ³`.
    FlatBall { center: Point, radius: f64 },
    /// Geodesic ball on `S²`; `radius = π` is the whole sphere.
    SphereCap { center: Point, radius: f64 },
}

impl ManifoldSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ManifoldSpec::UnitSquare { d } if !(2..=MAX_DIM).contains(&d) => Err(
                Error::InvalidSpec(format!("unit_square needs 2 <= d <= {MAX_DIM}, got {d}")),
            ),
            ManifoldSpec::SphericalCap { alpha } if !(alpha > 0.0 && alpha < PI) => Err(
                Error::InvalidSpec(format!("spherical_cap needs 0 < alpha < pi, got {alpha}")),
            ),
            _ => Ok(()),
        }
    }

    /// Intrinsic dimension `d`.
    pub fn dim(&self) -> usize {
        match *self {
            ManifoldSpec::UnitSquare { d } => d,
            ManifoldSpec::UnitDisk => 2,
            ManifoldSpec::SolidBall => 3,
            ManifoldSpec::UnitSphere | ManifoldSpec::SphericalCap { .. } => 2,
        }
    }

    /// Ambient dimension `m`.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldSpec::UnitSquare { d } => d,
            ManifoldSpec::UnitDisk => 2,
            ManifoldSpec::SolidBall | ManifoldSpec::UnitSphere | ManifoldSpec::SphericalCap { .. } => 3,
        }
    }

    pub fn is_spherical(&self) -> bool {
        matches!(self, ManifoldSpec::UnitSphere | ManifoldSpec::SphericalCap { .. })
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self, ManifoldSpec::UnitSphere)
    }

    /// Riemannian volume `v(A)`.
    pub fn volume(&self) -> f64 {
        match *self {
            ManifoldSpec::UnitSquare { .. } => 1.0,
            ManifoldSpec::UnitDisk => PI,
            ManifoldSpec::SolidBall => 4.0 * PI / 3.0,
            ManifoldSpec::UnitSphere => 4.0 * PI,
            ManifoldSpec::SphericalCap { alpha } => 2.0 * PI * (1.0 - alpha.cos()),
        }
    }

    /// Surface measure `ṽ(∂A)`.
    pub fn boundary_measure(&self) -> f64 {
        match *self {
            ManifoldSpec::UnitSquare { d } => 2.0 * d as f64,
            ManifoldSpec::UnitDisk => 2.0 * PI,
            ManifoldSpec::SolidBall => 4.0 * PI,
            ManifoldSpec::UnitSphere => 0.0,
            ManifoldSpec::SphericalCap { alpha } => 2.0 * PI * alpha.sin(),
        }
    }

    /// Geodesic diameter of `A`.
    pub fn diameter(&self) -> f64 {
        match *self {
            ManifoldSpec::UnitSquare { d } => (d as f64).sqrt(),
            ManifoldSpec::UnitDisk | ManifoldSpec::SolidBall => 2.0,
            ManifoldSpec::UnitSphere => PI,
            ManifoldSpec::SphericalCap { alpha } => (2.0 * alpha).min(PI),
        }
    }

    /// Axis-aligned bounding box of `A` in ambient coordinates.
    pub fn bounding_box(&self) -> (Point, Point) {
        let m = self.ambient_dim();
        match *self {
            ManifoldSpec::UnitSquare { .. } => (Point::new(&vec![0.0; m]), Point::new(&vec![1.0; m])),
            _ => (Point::new(&vec![-1.0; m]), Point::new(&vec![1.0; m])),
        }
    }

    /// Distance between two points of `ℳ`.
    #[inline]
    pub fn dist(&self, x: &Point, y: &Point, metric: Metric) -> f64 {
        match metric {
            Metric::AmbientEuclidean => x.dist2(y).sqrt(),
            Metric::Geodesic => {
                if self.is_spherical() {
                    great_circle(x, y)
                } else {
                    x.dist2(y).sqrt()
                }
            }
        }
    }

    /// Converts a squared ambient distance between two points of `ℳ` to `metric`.
    #[inline]
    pub fn chord2_to_metric(&self, chord2: f64, metric: Metric) -> f64 {
        let c = chord2.sqrt();
        if metric == Metric::Geodesic && self.is_spherical() {
            2.0 * (0.5 * c).min(1.0).asin()
        } else {
            c
        }
    }

    /// Whether `x` lies in `A` (ambient dimension must match).
    pub fn contains(&self, x: &Point) -> bool {
        if x.dim() != self.ambient_dim() {
            return false;
        }
        match *self {
            ManifoldSpec::UnitSquare { .. } => x.coords().iter().all(|&c| (0.0..=1.0).contains(&c)),
            ManifoldSpec::UnitDisk | ManifoldSpec::SolidBall => x.dot(x) <= 1.0,
            ManifoldSpec::UnitSphere => (x.norm() - 1.0).abs() <= SPHERE_TOL,
            ManifoldSpec::SphericalCap { alpha } => {
                (x.norm() - 1.0).abs() <= SPHERE_TOL && x.get(2) >= alpha.cos()
            }
        }
    }

    /// Geodesic distance from `x ∈ A` to `∂A`; `None` when `A` has no boundary.
    pub fn dist_to_boundary(&self, x: &Point) -> Option<f64> {
        match *self {
            ManifoldSpec::UnitSquare { .. } => Some(
                x.coords()
                    .iter()
                    .map(|&c| c.min(1.0 - c))
                    .fold(f64::INFINITY, f64::min)
                    .max(0.0),
            ),
            ManifoldSpec::UnitDisk | ManifoldSpec::SolidBall => Some((1.0 - x.norm()).max(0.0)),
            ManifoldSpec::UnitSphere => None,
            ManifoldSpec::SphericalCap { alpha } => Some((alpha - polar_angle(x)).max(0.0)),
        }
    }

    pub fn validate_region(&self, region: &RegionSpec) -> Result<()> {
        self.validate()?;
        match *region {
            RegionSpec::All => Ok(()),
            RegionSpec::InteriorBody { delta } => {
                if !(delta > 0.0) {
                    return Err(Error::InvalidRegion(format!("interior_body needs delta > 0, got {delta}")));
                }
                let inradius = match *self {
                    ManifoldSpec::UnitSquare { .. } => 0.5,
                    ManifoldSpec::UnitDisk | ManifoldSpec::SolidBall => 1.0,
                    ManifoldSpec::UnitSphere => f64::INFINITY,
                    ManifoldSpec::SphericalCap { alpha } => alpha,
                };
                if delta >= inradius {
                    return Err(Error::InvalidRegion(format!(
                        "interior_body delta {delta} leaves an empty body (inradius {inradius})"
                    )));
                }
                Ok(())
            }
            RegionSpec::GeodesicBallIntersect { center, radius } => {
                if !(radius > 0.0) {
                    return Err(Error::InvalidRegion(format!("ball radius must be > 0, got {radius}")));
                }
                if !self.contains(&center) {
                    return Err(Error::InvalidRegion(format!("ball center {center:?} is not in A")));
                }
                Ok(())
            }
        }
    }

    /// Membership of `x ∈ A` in `B`.
    pub fn region_contains(&self, region: &RegionSpec, x: &Point) -> bool {
        match *region {
            RegionSpec::All => true,
            RegionSpec::GeodesicBallIntersect { center, radius } => {
                self.dist(&center, x, Metric::Geodesic) <= radius
            }
            RegionSpec::InteriorBody { delta } => match self.dist_to_boundary(x) {
                None => true,
                Some(b) => b >= delta,
            },
        }
    }

    /// Geodesic distance from `center` to the farthest point of `A`.
    fn eccentricity(&self, center: &Point) -> f64 {
        match *self {
            ManifoldSpec::UnitSquare { .. } => center
                .coords()
                .iter()
                .map(|&c| c.max(1.0 - c).powi(2))
                .sum::<f64>()
                .sqrt(),
            ManifoldSpec::UnitDisk | ManifoldSpec::SolidBall => center.norm() + 1.0,
            ManifoldSpec::UnitSphere => PI,
            ManifoldSpec::SphericalCap { alpha } => (polar_angle(center) + alpha).min(PI),
        }
    }

    /// Closed-form description of `B` used for grids and measures.
    pub fn region_shape(&self, region: &RegionSpec) -> Result<RegionShape> {
        self.validate_region(region)?;
        let whole = |spec: &ManifoldSpec| -> RegionShape {
            match *spec {
                ManifoldSpec::UnitSquare { d } => RegionShape::Cube { lo: 0.0, hi: 1.0, d },
                ManifoldSpec::UnitDisk => RegionShape::FlatBall { center: Point::xy(0.0, 0.0), radius: 1.0 },
                ManifoldSpec::SolidBall => RegionShape::FlatBall { center: Point::xyz(0.0, 0.0, 0.0), radius: 1.0 },
                ManifoldSpec::UnitSphere => RegionShape::SphereCap { center: Point::xyz(0.0, 0.0, 1.0), radius: PI },
                ManifoldSpec::SphericalCap { alpha } => {
                    RegionShape::SphereCap { center: Point::xyz(0.0, 0.0, 1.0), radius: alpha }
                }
            }
        };
        match *region {
            RegionSpec::All => Ok(whole(self)),
            RegionSpec::InteriorBody { delta } => Ok(match whole(self) {
                RegionShape::Cube { lo, hi, d } => RegionShape::Cube { lo: lo + delta, hi: hi - delta, d },
                RegionShape::FlatBall { center, radius } => RegionShape::FlatBall { center, radius: radius - delta },
                RegionShape::SphereCap { center, radius } if self.has_boundary() => {
                    RegionShape::SphereCap { center, radius: radius - delta }
                }
                cap => cap,
            }),
            RegionSpec::GeodesicBallIntersect { center, radius } => {
                if radius >= self.eccentricity(&center) {
                    return Ok(whole(self));
                }
                let inside = self.dist_to_boundary(&center).is_none_or(|b| b > radius);
                if !inside {
                    return Err(Error::Unsupported(format!(
                        "geodesic ball of radius {radius} at {center:?} meets the boundary of {self:?} \
                         without containing A"
                    )));
                }
                if self.is_spherical() {
                    Ok(RegionShape::SphereCap { center, radius: radius.min(PI) })
                } else if self.dim() <= 3 {
                    Ok(RegionShape::FlatBall { center, radius })
                } else {
                    Err(Error::Unsupported(format!("geodesic balls in dimension {}", self.dim())))
                }
            }
        }
    }

    /// Whether `B ∩ ∂A` is nonempty.
    pub fn region_touches_boundary(&self, region: &RegionSpec) -> Result<bool> {
        if !self.has_boundary() {
            return Ok(false);
        }
        Ok(match *region {
            RegionSpec::All => true,
            RegionSpec::InteriorBody { .. } => false,
            RegionSpec::GeodesicBallIntersect { center, radius } => {
                self.region_shape(region)?;
                radius >= self.eccentricity(&center)
            }
        })
    }

    /// `(v(B), ṽ(B ∩ ∂A))` in closed form.
    pub fn region_measures(&self, region: &RegionSpec) -> Result<RegionMeasures> {
        let shape = self.region_shape(region)?;
        if self.region_touches_boundary(region)? {
            return Ok(RegionMeasures { volume: self.volume(), boundary: self.boundary_measure() });
        }
        let volume = match shape {
            RegionShape::Cube { lo, hi, d } => (hi - lo).powi(d as i32),
            RegionShape::FlatBall { radius, center } => {
                limits::theta::<f64>(center.dim() as u32) * radius.powi(center.dim() as i32)
            }
            RegionShape::SphereCap { radius, .. } => 2.0 * PI * (1.0 - radius.cos()),
        };
        Ok(RegionMeasures { volume, boundary: 0.0 })
    }

    /// Range of the first ambient coordinate over `B`.
    pub fn region_coordinate_range(&self, region: &RegionSpec) -> Result<(f64, f64)> {
        Ok(match self.region_shape(region)? {
            RegionShape::Cube { lo, hi, .. } => (lo, hi),
            RegionShape::FlatBall { center, radius } => (center.get(0) - radius, center.get(0) + radius),
            RegionShape::SphereCap { center, radius } => cap_coordinate_range(&center, radius),
        })
    }

    /// Range of the first ambient coordinate over `∂A`; `None` without boundary.
    pub fn boundary_coordinate_range(&self) -> Option<(f64, f64)> {
        match *self {
            ManifoldSpec::UnitSquare { .. } => Some((0.0, 1.0)),
            ManifoldSpec::UnitDisk | ManifoldSpec::SolidBall => Some((-1.0, 1.0)),
            ManifoldSpec::UnitSphere => None,
            ManifoldSpec::SphericalCap { alpha } => Some((-alpha.sin(), alpha.sin())),
        }
    }
}

/// Range of `x₁` over the geodesic ball of `radius` around `center` on `S²`.
fn cap_coordinate_range(center: &Point, radius: f64) -> (f64, f64) {
    let psi = center.get(0).clamp(-1.0, 1.0).acos();
    ((psi + radius).min(PI).cos(), (psi - radius).max(0.0).cos())
}

/// Great-circle distance between two unit vectors.
#[inline]
pub fn great_circle(x: &Point, y: &Point) -> f64 {
    let (a, b) = (x.coords(), y.coords());
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    (cx * cx + cy * cy + cz * cz).sqrt().atan2(x.dot(y))
}

/// Polar angle of a unit vector measured from the north pole.
#[inline]
pub fn polar_angle(x: &Point) -> f64 {
    let r = (x.get(0) * x.get(0) + x.get(1) * x.get(1)).sqrt();
    r.atan2(x.get(2))
}
