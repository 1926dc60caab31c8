//! Reproducible binomial, density-weighted and Poissonized samples.
//!
//! Draw `i` of a cloud with seed `s` always comes from ChaCha stream `i`
//! keyed by `s`, independent of how many other draws were made. A Poisson
//! cloud with seed `s` is therefore the prefix of length `Z_t` of the
//! binomial sequence with seed `s`, which is exactly the coupling
//! `P_t = {X_1, …, X_{Z_t}}`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point, RegionSpec};

/// How a cloud was generated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Binomial { n: usize },
    Poisson { t: f64, realized: usize },
    /// Loaded from a file or built by hand.
    External,
}

/// A finite point set in `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub spec: ManifoldSpec,
    pub points: Vec<Point>,
    pub origin: Origin,
    pub seed: Option<u64>,
}

impl PointCloud {
    /// Wraps hand-built points, checking membership in `A`.
    pub fn from_points(spec: ManifoldSpec, points: Vec<Point>) -> Result<Self> {
        spec.validate()?;
        if let Some(bad) = points.iter().find(|p| !spec.contains(p)) {
            return Err(Error::InvalidSpec(format!("point {bad:?} is not in {spec:?}")));
        }
        Ok(PointCloud { spec, points, origin: Origin::External, seed: None })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Size parameter used by the limit transforms: `n` or `t`.
    pub fn size_parameter(&self) -> f64 {
        match self.origin {
            Origin::Binomial { n } => n as f64,
            Origin::Poisson { t, .. } => t,
            Origin::External => self.points.len() as f64,
        }
    }
}

/// SplitMix64 finaliser.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed derived from a base seed and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(base), |acc, &p| splitmix(acc ^ splitmix(p)))
}

const COUNT_STREAM_TAG: u64 = 0x5049_4F49_5353_4F4E;

/// RNG for draw `index` of the cloud with `seed`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One uniform point of `A` (normalised Riemannian volume).
pub fn uniform_point<R: Rng + ?Sized>(spec: &ManifoldSpec, rng: &mut R) -> Point {
    match *spec {
        ManifoldSpec::UnitSquare { d } => {
            let mut c = [0.0; crate::manifold::MAX_DIM];
            c.iter_mut().take(d).for_each(|x| *x = rng.random::<f64>());
            Point::new(&c[..d])
        }
        ManifoldSpec::UnitDisk => {
            let u: [f64; 2] = gaussian_direction(rng);
            let r = rng.random::<f64>().sqrt();
            Point::xy(r * u[0], r * u[1])
        }
        ManifoldSpec::SolidBall => {
            let u: [f64; 3] = gaussian_direction(rng);
            let r = rng.random::<f64>().cbrt();
            Point::xyz(r * u[0], r * u[1], r * u[2])
        }
        ManifoldSpec::UnitSphere => {
            let u: [f64; 3] = gaussian_direction(rng);
            Point::xyz(u[0], u[1], u[2])
        }
        ManifoldSpec::SphericalCap { alpha } => {
            let lo = alpha.cos();
            // z uniform on [cos α, 1]; never below lo.
            let z = (lo + (1.0 - lo) * rng.random::<f64>()).clamp(lo, 1.0);
            let phi = 2.0 * PI * rng.random::<f64>();
            let s = (1.0 - z * z).max(0.0).sqrt();
            Point::xyz(s * phi.cos(), s * phi.sin(), z)
        }
    }
}

fn gaussian_direction<R: Rng + ?Sized, const M: usize>(rng: &mut R) -> [f64; M] {
    loop {
        let mut v = [0.0; M];
        v.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// `n` i.i.d. uniform points of `A`.
pub fn uniform_sample(spec: &ManifoldSpec, n: usize, seed: u64) -> Result<PointCloud> {
    spec.validate()?;
    let points = (0..n as u64)
        .map(|i| uniform_point(spec, &mut draw_rng(seed, i)))
        .collect();
    Ok(PointCloud { spec: *spec, points, origin: Origin::Binomial { n }, seed: Some(seed) })
}

type DensityFn = dyn Fn(&Point) -> f64 + Send + Sync;

/// A probability density on `A` w.r.t. Riemannian volume, bounded above.
#[derive(Clone)]
pub struct CustomDensity {
    f: Arc<DensityFn>,
    sup: f64,
    /// `inf_B f`, if known.
    pub f0: Option<f64>,
    /// `inf_{B ∩ ∂A} f`, if known; must be supplied by the caller.
    pub f1: Option<f64>,
    pub label: String,
}

impl CustomDensity {
    /// Normalisation is checked by Monte Carlo to within 2%.
    pub fn new(
        spec: &ManifoldSpec,
        label: impl Into<String>,
        sup: f64,
        f: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(sup > 0.0 && sup.is_finite()) {
            return Err(Error::Config(format!("density bound must be positive and finite, got {sup}")));
        }
        let dens = CustomDensity { f: Arc::new(f), sup, f0: None, f1: None, label: label.into() };
        let mass = dens.mass_estimate(spec, 100_000, 0x6E6F_726D);
        if (mass - 1.0).abs() > 0.02 {
            return Err(Error::Config(format!("density `{}` integrates to {mass:.4}, not 1", dens.label)));
        }
        Ok(dens)
    }

    pub fn with_infima(mut self, f0: Option<f64>, f1: Option<f64>) -> Self {
        self.f0 = f0;
        self.f1 = f1;
        self
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.f)(x)
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// Monte Carlo estimate of `∫_A f dv`.
    pub fn mass_estimate(&self, spec: &ManifoldSpec, draws: usize, seed: u64) -> f64 {
        let total: f64 = (0..draws as u64)
            .map(|i| self.eval(&uniform_point(spec, &mut draw_rng(seed, i))))
            .sum();
        spec.volume() * total / draws as f64
    }
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("label", &self.label)
            .field("sup", &self.sup)
            .field("f0", &self.f0)
            .field("f1", &self.f1)
            .finish()
    }
}

/// Sampling density `f` of the points.
#[derive(Clone, Debug, Default)]
pub enum DensitySpec {
    #[default]
    Uniform,
    Custom(CustomDensity),
}

impl DensitySpec {
    pub fn label(&self) -> String {
        match self {
            DensitySpec::Uniform => "uniform".into(),
            DensitySpec::Custom(c) => c.label.clone(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, DensitySpec::Uniform)
    }

    /// `(f0, f1)`: infima of `f` over `B` and over `B ∩ ∂A` (`None` if empty).
    pub fn infima(&self, spec: &ManifoldSpec, region: &RegionSpec) -> Result<(f64, Option<f64>)> {
        let touches = spec.region_touches_boundary(region)?;
        match self {
            DensitySpec::Uniform => {
                let f = 1.0 / spec.volume();
                Ok((f, touches.then_some(f)))
            }
            DensitySpec::Custom(c) => {
                let f0 = c.f0.ok_or_else(|| Error::Config(format!("density `{}` has no f0", c.label)))?;
                let f1 = if touches {
                    Some(c.f1.ok_or_else(|| {
                        Error::Config(format!("density `{}` needs a user-supplied f1 since B meets the boundary", c.label))
                    })?)
                } else {
                    None
                };
                Ok((f0, f1))
            }
        }
    }
}

/// Serializable density choices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityConfig {
    #[default]
    Uniform,
    /// `f(x) ∝ 1 + slope·x₁`.
    Linear { slope: f64 },
}

impl DensityConfig {
    /// Builds the density, with `f0` over `B` and `f1` over `B ∩ ∂A` in closed form.
    pub fn build(&self, spec: &ManifoldSpec, region: &RegionSpec) -> Result<DensitySpec> {
        match *self {
            DensityConfig::Uniform => Ok(DensitySpec::Uniform),
            DensityConfig::Linear { slope } => {
                let (amin, amax) = spec.region_coordinate_range(&RegionSpec::All)?;
                let lin_min = |lo: f64, hi: f64| (1.0 + slope * lo).min(1.0 + slope * hi);
                let lin_max = |lo: f64, hi: f64| (1.0 + slope * lo).max(1.0 + slope * hi);
                if !(lin_min(amin, amax) > 0.0) {
                    return Err(Error::Config(format!("linear density with slope {slope} is not positive on A")));
                }
                // ∫_A x₁ dv vanishes by symmetry except on the cube, where it is 1/2.
                let first_moment = match spec {
                    ManifoldSpec::UnitSquare { .. } => 0.5,
                    _ => 0.0,
                };
                let z = spec.volume() + slope * first_moment;
                let (blo, bhi) = spec.region_coordinate_range(region)?;
                let f0 = lin_min(blo, bhi) / z;
                let f1 = if spec.region_touches_boundary(region)? {
                    spec.boundary_coordinate_range().map(|(lo, hi)| lin_min(lo, hi) / z)
                } else {
                    None
                };
                let dens = CustomDensity::new(spec, format!("linear(slope={slope})"), lin_max(amin, amax) / z, move |x| {
                    (1.0 + slope * x.get(0)) / z
                })?;
                Ok(DensitySpec::Custom(dens.with_infima(Some(f0), f1)))
            }
        }
    }
}

fn density_point(spec: &ManifoldSpec, dens: &DensitySpec, seed: u64, index: u64) -> Result<Point> {
    let mut rng = draw_rng(seed, index);
    match dens {
        DensitySpec::Uniform => Ok(uniform_point(spec, &mut rng)),
        DensitySpec::Custom(c) => loop {
            let x = uniform_point(spec, &mut rng);
            let fx = c.eval(&x);
            if fx > c.sup || fx.is_nan() || fx < 0.0 {
                return Err(Error::DensityBoundExceeded { point: x.coords().to_vec(), value: fx, bound: c.sup });
            }
            if rng.random::<f64>() * c.sup < fx {
                return Ok(x);
            }
        },
    }
}

fn density_points(spec: &ManifoldSpec, dens: &DensitySpec, n: usize, seed: u64) -> Result<Vec<Point>> {
    (0..n as u64).map(|i| density_point(spec, dens, seed, i)).collect()
}

/// `n` i.i.d. points with density `dens`, by rejection against the uniform law.
pub fn density_sample(spec: &ManifoldSpec, dens: &DensitySpec, n: usize, seed: u64) -> Result<PointCloud> {
    spec.validate()?;
    let points = density_points(spec, dens, n, seed)?;
    Ok(PointCloud { spec: *spec, points, origin: Origin::Binomial { n }, seed: Some(seed) })
}

/// Poisson(`t`) count for the cloud with `seed`.
pub fn poisson_count(t: f64, seed: u64) -> Result<usize> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("Poisson intensity must be positive and finite, got {t}")));
    }
    let dist = Poisson::new(t).map_err(|e| Error::Domain(format!("Poisson({t}): {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[COUNT_STREAM_TAG]));
    Ok(dist.sample(&mut rng) as usize)
}

/// Poisson process with intensity measure `t·μ`.
pub fn poisson_sample(spec: &ManifoldSpec, dens: &DensitySpec, t: f64, seed: u64) -> Result<PointCloud> {
    spec.validate()?;
    let z = poisson_count(t, seed)?;
    let points = density_points(spec, dens, z, seed)?;
    Ok(PointCloud { spec: *spec, points, origin: Origin::Poisson { t, realized: z }, seed: Some(seed) })
}

/// Metadata written next to a cloud CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudSidecar {
    pub spec: ManifoldSpec,
    pub density: String,
    pub seed: Option<u64>,
    pub origin: Origin,
}

/// Writes `idx,x1..xm` rows and, if `sidecar` is given, a JSON sidecar.
pub fn write_cloud(cloud: &PointCloud, csv_path: &Path, density_label: &str, sidecar: Option<&Path>) -> Result<()> {
    let m = cloud.spec.ambient_dim();
    let mut w = csv::Writer::from_path(csv_path)?;
    let mut header = vec!["idx".to_string()];
    header.extend((1..=m).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (i, p) in cloud.points.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(p.coords().iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    if let Some(path) = sidecar {
        let meta = CloudSidecar {
            spec: cloud.spec,
            density: density_label.to_string(),
            seed: cloud.seed,
            origin: cloud.origin,
        };
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, &meta)?;
        writeln!(f)?;
    }
    Ok(())
}

/// Reads a cloud CSV written by [`write_cloud`] (the `idx` column is optional).
pub fn read_cloud(spec: &ManifoldSpec, csv_path: &Path) -> Result<PointCloud> {
    let mut r = csv::Reader::from_path(csv_path)?;
    let headers = r.headers()?.clone();
    let skip = usize::from(headers.get(0).map(str::trim) == Some("idx"));
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let coords: Vec<f64> = rec
            .iter()
            .skip(skip)
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("bad coordinate in {}: {e}", csv_path.display())))?;
        if coords.len() != spec.ambient_dim() {
            return Err(Error::Config(format!(
                "row has {} coordinates, {spec:?} needs {}",
                coords.len(),
                spec.ambient_dim()
            )));
        }
        points.push(Point::new(&coords));
    }
    PointCloud::from_points(*spec, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sample() {
        let c = uniform_sample(&ManifoldSpec::UnitDisk, 0, 1).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn reproducible_and_prefix_stable() {
        let spec = ManifoldSpec::SphericalCap { alpha: 1.0 };
        let a = uniform_sample(&spec, 200, 42).unwrap();
        let b = uniform_sample(&spec, 200, 42).unwrap();
        assert_eq!(a, b);
        let short = uniform_sample(&spec, 50, 42).unwrap();
        assert_eq!(&a.points[..50], &short.points[..]);
        let other = uniform_sample(&spec, 200, 43).unwrap();
        assert_ne!(a.points, other.points);
    }

    #[test]
    fn samples_lie_in_a() {
        for spec in [
            ManifoldSpec::UnitSquare { d: 3 },
            ManifoldSpec::UnitDisk,
            ManifoldSpec::SolidBall,
            ManifoldSpec::UnitSphere,
            ManifoldSpec::SphericalCap { alpha: 0.2 },
            ManifoldSpec::SphericalCap { alpha: 3.0 },
        ] {
            let c = uniform_sample(&spec, 5000, 9).unwrap();
            assert!(c.points.iter().all(|p| spec.contains(p)), "{spec:?}");
        }
    }

    #[test]
    fn poisson_is_binomial_prefix() {
        let spec = ManifoldSpec::UnitDisk;
        let p = poisson_sample(&spec, &DensitySpec::Uniform, 300.0, 5).unwrap();
        let Origin::Poisson { realized, .. } = p.origin else { panic!() };
        assert_eq!(realized, p.len());
        let b = uniform_sample(&spec, realized, 5).unwrap();
        assert_eq!(p.points, b.points);
    }

    #[test]
    fn tiny_intensity_gives_empty_cloud() {
        let zeros = (0..1000).filter(|&s| poisson_count(1e-9, s).unwrap() == 0).count();
        assert_eq!(zeros, 1000);
        assert!(poisson_count(0.0, 1).is_err());
    }

    #[test]
    fn density_bound_violation_names_point() {
        let spec = ManifoldSpec::UnitSquare { d: 2 };
        let dens = CustomDensity::new(&spec, "flat", 2.0, |_| 1.0).unwrap();
        let mut bad = dens.clone();
        bad.sup = 0.5;
        let err = density_sample(&spec, &DensitySpec::Custom(bad), 10, 1).unwrap_err();
        assert!(matches!(err, Error::DensityBoundExceeded { ref point, .. } if point.len() == 2));
    }

    #[test]
    fn unnormalised_density_rejected() {
        let spec = ManifoldSpec::UnitSquare { d: 2 };
        assert!(CustomDensity::new(&spec, "double", 3.0, |_| 2.0).is_err());
    }

    #[test]
    fn linear_density_infima() {
        let spec = ManifoldSpec::UnitSquare { d: 2 };
        let DensitySpec::Custom(c) = DensityConfig::Linear { slope: 1.0 }.build(&spec, &RegionSpec::All).unwrap() else {
            panic!()
        };
        assert!((c.f0.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.f1.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.sup() - 4.0 / 3.0).abs() < 1e-15);
        let DensitySpec::Custom(c) = DensityConfig::Linear { slope: 1.0 }
            .build(&spec, &RegionSpec::InteriorBody { delta: 0.25 })
            .unwrap()
        else {
            panic!()
        };
        assert!((c.f0.unwrap() - 1.25 / 1.5).abs() < 1e-15);
        assert_eq!(c.f1, None);
        assert!(DensityConfig::Linear { slope: 1.5 }.build(&ManifoldSpec::UnitDisk, &RegionSpec::All).is_err());
    }

    #[test]
    fn cloud_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ManifoldSpec::UnitSphere;
        let c = uniform_sample(&spec, 25, 3).unwrap();
        let csv_path = dir.path().join("pts.csv");
        let side = dir.path().join("pts.json");
        write_cloud(&c, &csv_path, "uniform", Some(&side)).unwrap();
        let back = read_cloud(&spec, &csv_path).unwrap();
        assert_eq!(back.points, c.points);
        let meta: CloudSidecar = serde_json::from_reader(std::fs::File::open(&side).unwrap()).unwrap();
        assert_eq!(meta.origin, Origin::Binomial { n: 25 });
        assert_eq!(meta.seed, Some(3));
        let header = std::fs::read_to_string(&csv_path).unwrap();
        assert!(header.starts_with("idx,x1,x2,x3\n"));
    }
}
