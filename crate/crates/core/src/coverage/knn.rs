//! k-th nearest neighbour distances.

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Metric, Point, MAX_DIM};
use crate::sampling::PointCloud;

/// Clouds up to this size are scanned in full by [`knn_distance`].
pub const SCAN_LIMIT: usize = 20_000;

/// Below this size a [`KnnIndex`] skips bucketing.
const BUCKET_MIN: usize = 64;

/// Largest bucket count per axis.
const MAX_BUCKETS_PER_AXIS: usize = 4096;

/// Reusable k-NN structure over a cloud. Distances are selected on squared
/// chords and converted to the requested metric at the end, which is valid
/// because geodesic distance is a monotone function of chord length on
/// every supported family.
#[derive(Clone, Debug)]
pub struct KnnIndex<'a> {
    spec: ManifoldSpec,
    points: &'a [Point],
    buckets: Option<Buckets>,
}

#[derive(Clone, Debug)]
struct Buckets {
    m: usize,
    lo: [f64; MAX_DIM],
    hi: [f64; MAX_DIM],
    side: f64,
    dims: [usize; MAX_DIM],
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl Buckets {
    fn build(spec: &ManifoldSpec, points: &[Point]) -> Buckets {
        let m = spec.ambient_dim();
        let (blo, bhi) = spec.bounding_box();
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        for i in 0..m {
            lo[i] = blo.get(i);
            hi[i] = bhi.get(i);
        }
        // About two points per occupied bucket.
        let d = spec.dim() as f64;
        let mut side = (2.0 * spec.volume() / points.len() as f64).powf(1.0 / d);
        let widest = (0..m).map(|i| hi[i] - lo[i]).fold(0.0, f64::max);
        side = side.max(widest / MAX_BUCKETS_PER_AXIS as f64);
        let mut dims = [1usize; MAX_DIM];
        let mut total = 1usize;
        for i in 0..m {
            dims[i] = (((hi[i] - lo[i]) / side).ceil() as usize).max(1);
            total *= dims[i];
        }
        let mut b = Buckets { m, lo, hi, side, dims, starts: vec![0; total + 1], items: vec![0; points.len()] };
        let keys: Vec<usize> = points.iter().map(|p| b.flat(&b.cell_of(p))).collect();
        for &k in &keys {
            b.starts[k + 1] += 1;
        }
        for i in 0..total {
            b.starts[i + 1] += b.starts[i];
        }
        let mut fill = b.starts.clone();
        for (idx, &k) in keys.iter().enumerate() {
            b.items[fill[k] as usize] = idx as u32;
            fill[k] += 1;
        }
        b
    }

    fn cell_of(&self, p: &Point) -> [usize; MAX_DIM] {
        let mut c = [0usize; MAX_DIM];
        for i in 0..self.m {
            let x = p.get(i).clamp(self.lo[i], self.hi[i]);
            let j = ((x - self.lo[i]) / self.side).floor() as isize;
            c[i] = j.clamp(0, self.dims[i] as isize - 1) as usize;
        }
        c
    }

    fn flat(&self, c: &[usize; MAX_DIM]) -> usize {
        let mut f = 0;
        for i in (0..self.m).rev() {
            f = f * self.dims[i] + c[i];
        }
        f
    }

    fn bucket(&self, f: usize) -> &[u32] {
        &self.items[self.starts[f] as usize..self.starts[f + 1] as usize]
    }

    /// Visits every bucket at Chebyshev index distance exactly `t` from `c`.
    fn for_shell(&self, c: &[usize; MAX_DIM], t: usize, mut visit: impl FnMut(usize)) -> bool {
        let t = t as isize;
        let mut any = false;
        let mut off = [-t; MAX_DIM];
        for o in off.iter_mut().skip(self.m) {
            *o = 0;
        }
        loop {
            let on_shell = (0..self.m).any(|i| off[i].abs() == t);
            if on_shell {
                let mut cell = [0usize; MAX_DIM];
                let mut inside = true;
                for i in 0..self.m {
                    let j = c[i] as isize + off[i];
                    if j < 0 || j >= self.dims[i] as isize {
                        inside = false;
                        break;
                    }
                    cell[i] = j as usize;
                }
                if inside {
                    any = true;
                    visit(self.flat(&cell));
                }
            }
            let mut i = 0;
            loop {
                if i == self.m {
                    return any;
                }
                off[i] += 1;
                if off[i] > t {
                    off[i] = -t;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// Keeps the `k` smallest values seen, sorted ascending.
struct Smallest {
    k: usize,
    vals: Vec<f64>,
}

impl Smallest {
    fn new(k: usize) -> Self {
        Smallest { k, vals: Vec::with_capacity(k + 1) }
    }

    fn full(&self) -> bool {
        self.vals.len() == self.k
    }

    fn worst(&self) -> f64 {
        if self.full() {
            self.vals[self.k - 1]
        } else {
            f64::INFINITY
        }
    }

    fn offer(&mut self, v: f64) {
        if self.full() && v >= self.worst() {
            return;
        }
        let pos = self.vals.partition_point(|&x| x <= v);
        self.vals.insert(pos, v);
        self.vals.truncate(self.k);
    }
}

impl<'a> KnnIndex<'a> {
    pub fn new(cloud: &'a PointCloud) -> Self {
        let buckets = (cloud.len() > BUCKET_MIN).then(|| Buckets::build(&cloud.spec, &cloud.points));
        KnnIndex { spec: cloud.spec, points: &cloud.points, buckets }
    }

    /// Index that always scans; used to cross-check the bucketed path.
    pub fn scanning(cloud: &'a PointCloud) -> Self {
        KnnIndex { spec: cloud.spec, points: &cloud.points, buckets: None }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if self.points.len() < k {
            return Err(Error::InsufficientPoints { needed: k, available: self.points.len() });
        }
        Ok(())
    }

    /// Squared chord to the k-th nearest cloud point.
    pub fn kth_chord2(&self, x: &Point, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(match &self.buckets {
            None => scan_kth(self.points, x, k),
            Some(b) => self.bucket_kth(b, x, k),
        })
    }

    pub fn distance(&self, x: &Point, k: usize, metric: Metric) -> Result<f64> {
        let c2 = self.kth_chord2(x, k)?;
        Ok(self.spec.chord2_to_metric(c2, metric))
    }

    fn bucket_kth(&self, b: &Buckets, x: &Point, k: usize) -> f64 {
        let home = b.cell_of(x);
        let mut best = Smallest::new(k);
        let mut t = 0usize;
        loop {
            let any = b.for_shell(&home, t, |f| {
                for &i in b.bucket(f) {
                    best.offer(x.dist2(&self.points[i as usize]));
                }
            });
            // Anything outside the scanned block lies at least t·side away
            // from the projection of x onto the box, hence from x.
            let reach = t as f64 * b.side;
            if best.full() && best.worst() <= reach * reach {
                return best.worst();
            }
            if !any {
                return best.worst();
            }
            t += 1;
        }
    }
}

fn scan_kth(points: &[Point], x: &Point, k: usize) -> f64 {
    let mut d2: Vec<f64> = points.iter().map(|p| x.dist2(p)).collect();
    let (_, kth, _) = d2.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

/// Distance from `x` to its k-th nearest point of `cloud`.
pub fn knn_distance(x: &Point, cloud: &PointCloud, k: usize, metric: Metric) -> Result<f64> {
    if cloud.len() <= SCAN_LIMIT {
        KnnIndex::scanning(cloud).distance(x, k, metric)
    } else {
        KnnIndex::new(cloud).distance(x, k, metric)
    }
}
