//! Convex bodies in dimension ≤ 3: hulls, facets, volumes, lattice points.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::OrderedField;

/// Coordinate field usable for hulls and membership tests.
pub trait Coord: OrderedField + FromPrimitive + ToPrimitive {
    /// Slack granted to membership tests; zero for exact fields.
    fn slack(scale: f64) -> Self;
}

impl Coord for f64 {
    fn slack(scale: f64) -> Self {
        1e-9 * scale.max(1.0)
    }
}

impl Coord for f32 {
    fn slack(scale: f64) -> Self {
        (1e-4 * scale.max(1.0)) as f32
    }
}

impl Coord for BigRational {
    fn slack(_: f64) -> Self {
        BigRational::zero()
    }
}

/// Half-space `⟨normal, x⟩ ≤ offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

/// Compact convex set given by its extreme points and an outer description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexBody<T> {
    pub dim: usize,
    /// Extreme points; counter-clockwise in the plane.
    pub vertices: Vec<Vec<T>>,
    pub facets: Vec<Facet<T>>,
    /// Dimension of the affine hull; `< dim` for degenerate bodies.
    pub affine_dim: usize,
    /// Outward-oriented boundary triangles (three-dimensional bodies only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triangles: Vec<[Vec<T>; 3]>,
}

/// Volume together with a flag for lower-dimensional bodies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Volume<T> {
    pub value: T,
    pub degenerate: bool,
}

fn cmp_lex<T: PartialOrd>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn cross<T: OrderedField>(o: &[T], a: &[T], b: &[T]) -> T {
    (a[0].clone() - o[0].clone()) * (b[1].clone() - o[1].clone())
        - (a[1].clone() - o[1].clone()) * (b[0].clone() - o[0].clone())
}

fn dot<T: OrderedField>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + x.clone() * y.clone())
}

/// Counter-clockwise hull of planar points with collinear points removed.
pub fn hull_2d<T: OrderedField>(points: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut pts: Vec<Vec<T>> = points.to_vec();
    pts.sort_by(|a, b| cmp_lex(a, b));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Vec<T>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= T::zero() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<T>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= T::zero() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl<T: Coord> ConvexBody<T> {
    /// Convex hull of points in dimension one or two, exact for exact fields.
    pub fn hull(dim: usize, points: &[Vec<T>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Input("convex hull of an empty point set".into()));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Input("point dimension mismatch".into()));
        }
        match dim {
            1 => {
                let mut lo = points[0][0].clone();
                let mut hi = lo.clone();
                for p in points {
                    if p[0] < lo {
                        lo = p[0].clone();
                    }
                    if p[0] > hi {
                        hi = p[0].clone();
                    }
                }
                Ok(Self::interval(lo, hi))
            }
            2 => Ok(Self::polygon(hull_2d(points))),
            _ => Err(Error::Input(format!("exact hull supports dimension 1 or 2, got {dim}"))),
        }
    }

    /// The interval `[lo, hi]`.
    pub fn interval(lo: T, hi: T) -> Self {
        let one = T::one();
        let affine_dim = usize::from(hi > lo);
        let vertices = if affine_dim == 0 { vec![vec![lo.clone()]] } else { vec![vec![lo.clone()], vec![hi.clone()]] };
        let facets = vec![Facet { normal: vec![-one.clone()], offset: -lo }, Facet { normal: vec![one], offset: hi }];
        Self { dim: 1, vertices, facets, affine_dim, triangles: Vec::new() }
    }

    /// Polygon from counter-clockwise extreme points.
    pub fn polygon(vertices: Vec<Vec<T>>) -> Self {
        let m = vertices.len();
        let mut facets = Vec::new();
        let affine_dim = match m {
            0 | 1 => 0,
            2 => 1,
            _ => 2,
        };
        if m >= 3 {
            for i in 0..m {
                let a = &vertices[i];
                let b = &vertices[(i + 1) % m];
                let normal = vec![b[1].clone() - a[1].clone(), a[0].clone() - b[0].clone()];
                let offset = dot(&normal, a);
                facets.push(Facet { normal, offset });
            }
        } else if m == 2 {
            let (a, b) = (&vertices[0], &vertices[1]);
            let d = vec![b[0].clone() - a[0].clone(), b[1].clone() - a[1].clone()];
            let n = vec![-d[1].clone(), d[0].clone()];
            let neg = |v: &Vec<T>| v.iter().map(|x| -x.clone()).collect::<Vec<T>>();
            facets.push(Facet { offset: dot(&n, a), normal: n.clone() });
            facets.push(Facet { offset: -dot(&n, a), normal: neg(&n) });
            facets.push(Facet { offset: dot(&d, b), normal: d.clone() });
            facets.push(Facet { offset: -dot(&d, a), normal: neg(&d) });
        } else if m == 1 {
            let p = &vertices[0];
            for i in 0..2 {
                let mut e = vec![T::zero(), T::zero()];
                e[i] = T::one();
                facets.push(Facet { normal: e.clone(), offset: p[i].clone() });
                e[i] = -T::one();
                facets.push(Facet { normal: e, offset: -p[i].clone() });
            }
        }
        Self { dim: 2, vertices, facets, affine_dim, triangles: Vec::new() }
    }

    /// Volume: length, shoelace area, or tetrahedral decomposition.
    pub fn volume(&self) -> Volume<T> {
        let degenerate = self.affine_dim < self.dim;
        if degenerate {
            return Volume { value: T::zero(), degenerate };
        }
        let value = match self.dim {
            1 => self.vertices[1][0].clone() - self.vertices[0][0].clone(),
            2 => {
                let m = self.vertices.len();
                let twice = (0..m).fold(T::zero(), |s, i| {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % m];
                    s + a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
                });
                twice / T::from_u8(2).unwrap()
            }
            _ => {
                let o = &self.vertices[0];
                let six = T::from_u8(6).unwrap();
                self.triangles.iter().fold(T::zero(), |s, t| {
                    let d = |i: usize, c: usize| t[i][c].clone() - o[c].clone();
                    let det = d(0, 0) * (d(1, 1) * d(2, 2) - d(1, 2) * d(2, 1))
                        - d(0, 1) * (d(1, 0) * d(2, 2) - d(1, 2) * d(2, 0))
                        + d(0, 2) * (d(1, 0) * d(2, 1) - d(1, 1) * d(2, 0));
                    s + det.abs() / six.clone()
                })
            }
        };
        Volume { value, degenerate }
    }

    /// Membership with the field's slack.
    pub fn contains(&self, x: &[T]) -> bool {
        self.facets.iter().all(|f| {
            let scale = f.normal.iter().map(|v| v.to_f64().unwrap_or(0.0).abs()).fold(0.0, f64::max)
                * (1.0 + f.offset.to_f64().unwrap_or(0.0).abs());
            dot(&f.normal, x) <= f.offset.clone() + T::slack(scale)
        })
    }

    /// `m · body`.
    pub fn scaled(&self, m: T) -> Self {
        let sc = |v: &Vec<T>| v.iter().map(|c| c.clone() * m.clone()).collect::<Vec<T>>();
        let vertices = self.vertices.iter().map(sc).collect();
        let triangles = self.triangles.iter().map(|t| [sc(&t[0]), sc(&t[1]), sc(&t[2])]).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { normal: f.normal.clone(), offset: f.offset.clone() * m.clone() })
            .collect();
        Self { vertices, facets, triangles, ..self.clone() }
    }

    /// Lossy conversion to a floating body.
    pub fn to_f64(&self) -> ConvexBody<f64> {
        let cv = |v: &Vec<T>| v.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect::<Vec<f64>>();
        ConvexBody {
            dim: self.dim,
            vertices: self.vertices.iter().map(cv).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet { normal: cv(&f.normal), offset: f.offset.to_f64().unwrap_or(f64::NAN) })
                .collect(),
            affine_dim: self.affine_dim,
            triangles: self.triangles.iter().map(|t| [cv(&t[0]), cv(&t[1]), cv(&t[2])]).collect(),
        }
    }

    /// Integer points of `k · body`.
    pub fn lattice_points_scaled(&self, k: u32) -> Vec<Vec<i64>> {
        let kt = T::from_u32(k).unwrap();
        let scaled = self.scaled(kt);
        let (lo, hi) = scaled.to_f64().bounding_box();
        let ranges: Vec<(i64, i64)> =
            lo.iter().zip(&hi).map(|(a, b)| ((a - 1e-7).ceil() as i64, (b + 1e-7).floor() as i64)).collect();
        let mut out = Vec::new();
        let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        if ranges.iter().any(|r| r.0 > r.1) {
            return out;
        }
        loop {
            let x: Vec<T> = cur.iter().map(|&c| T::from_i64(c).unwrap()).collect();
            if scaled.contains(&x) {
                out.push(cur.clone());
            }
            let mut i = self.dim;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < ranges[i].1 {
                    cur[i] += 1;
                    for j in i + 1..self.dim {
                        cur[j] = ranges[j].0;
                    }
                    break;
                }
            }
        }
    }
}

impl ConvexBody<f64> {
    /// Hull of floating points in dimension ≤ 3.
    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if dim == 3 {
            hull_3d(points)
        } else {
            Self::hull(dim, points)
        }
    }

    /// Unit simplex scaled by `s` in dimension `n`.
    pub fn simplex(n: usize, s: f64) -> Result<Self> {
        let mut pts = vec![vec![0.0; n]];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = s;
            pts.push(e);
        }
        Self::from_points(n, &pts)
    }

    /// Axis-aligned box `Π [lo_i, hi_i]`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let n = lo.len();
        let mut pts = Vec::new();
        for mask in 0..(1usize << n) {
            pts.push((0..n).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect());
        }
        Self::from_points(n, &pts)
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    /// Euclidean distance from an interior point to the boundary; negative outside.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        if self.affine_dim < self.dim {
            return if self.contains(x) { 0.0 } else { -1.0 };
        }
        self.facets
            .iter()
            .map(|f| {
                let nn = f.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                (f.offset - dot(&f.normal, x)) / nn
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Support function `h(x) = max_{v} ⟨v, x⟩`.
    pub fn support(&self, x: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Hausdorff-style one-sided check: every vertex of `self` within `tol` of `other`.
    pub fn is_within(&self, other: &ConvexBody<f64>, tol: f64) -> bool {
        self.vertices.iter().all(|v| other.boundary_distance(v) >= -tol)
    }

    /// Bodies agree as point sets up to `tol`.
    pub fn approx_eq(&self, other: &ConvexBody<f64>, tol: f64) -> bool {
        self.is_within(other, tol) && other.is_within(self, tol)
    }
}

/// Incremental three-dimensional hull with robust orientation predicates.
pub fn hull_3d(points: &[Vec<f64>]) -> Result<ConvexBody<f64>> {
    use robust::{orient3d, Coord3D};
    if points.is_empty() {
        return Err(Error::Input("convex hull of an empty point set".into()));
    }
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| cmp_lex(a, b));
    pts.dedup();
    let c = |i: usize| Coord3D { x: pts[i][0], y: pts[i][1], z: pts[i][2] };
    let orient = |a: usize, b: usize, cc: usize, d: usize| orient3d(c(a), c(b), c(cc), c(d));

    // Initial tetrahedron.
    let i0 = 0;
    let i1 = (1..pts.len()).find(|&i| pts[i] != pts[i0]);
    let seed = i1.and_then(|i1| {
        let i2 = (0..pts.len()).find(|&i| {
            let u: Vec<f64> = (0..3).map(|k| pts[i1][k] - pts[i0][k]).collect();
            let v: Vec<f64> = (0..3).map(|k| pts[i][k] - pts[i0][k]).collect();
            let cr = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            cr.iter().any(|x| x.abs() > 0.0)
        })?;
        let i3 = (0..pts.len()).find(|&i| orient(i0, i1, i2, i) != 0.0)?;
        Some((i1, i2, i3))
    });
    let Some((i1, i2, i3)) = seed else {
        let affine_dim = if pts.len() == 1 { 0 } else if i1.is_some() && pts.len() == 2 { 1 } else { 2 };
        return Ok(ConvexBody { dim: 3, vertices: pts, facets: Vec::new(), affine_dim, triangles: Vec::new() });
    };
    let mut faces: Vec<[usize; 3]> = Vec::new();
    // Orient faces so that the opposite vertex lies below (positive orientation).
    for (a, b, cc, d) in [(i0, i1, i2, i3), (i0, i1, i3, i2), (i0, i2, i3, i1), (i1, i2, i3, i0)] {
        if orient(a, b, cc, d) > 0.0 {
            faces.push([a, b, cc]);
        } else {
            faces.push([a, cc, b]);
        }
    }
    for p in 0..pts.len() {
        if [i0, i1, i2, i3].contains(&p) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| orient(f[0], f[1], f[2], p) < 0.0).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, v)| **v) {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                if let Some(pos) = edges.iter().position(|&(x, y)| x == b && y == a) {
                    edges.swap_remove(pos);
                } else {
                    edges.push((a, b));
                }
            }
        }
        let mut next: Vec<[usize; 3]> =
            faces.iter().zip(&visible).filter(|(_, v)| !**v).map(|(f, _)| *f).collect();
        for (a, b) in edges {
            next.push([a, b, p]);
        }
        faces = next;
    }
    // Facets and extreme-vertex filtering.
    let normal_of = |f: &[usize; 3]| {
        let (a, b, cc) = (&pts[f[0]], &pts[f[1]], &pts[f[2]]);
        let u: Vec<f64> = (0..3).map(|k| b[k] - a[k]).collect();
        let v: Vec<f64> = (0..3).map(|k| cc[k] - a[k]).collect();
        let n = vec![u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        let off = dot(&n, a);
        Facet { normal: n, offset: off }
    };
    let facets: Vec<Facet<f64>> = faces.iter().map(normal_of).collect();
    let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let extreme: Vec<usize> = used
        .into_iter()
        .filter(|&v| {
            let ns: Vec<Vec<f64>> = faces
                .iter()
                .zip(&facets)
                .filter(|(f, _)| f.contains(&v))
                .map(|(_, fa)| {
                    let nn = fa.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
                    fa.normal.iter().map(|x| x / nn).collect()
                })
                .collect();
            let det = |a: &[f64], b: &[f64], c: &[f64]| {
                a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
            };
            let m = ns.len();
            (0..m).any(|i| (i + 1..m).any(|j| (j + 1..m).any(|k| det(&ns[i], &ns[j], &ns[k]).abs() > 1e-9)))
        })
        .collect();
    let vertices: Vec<Vec<f64>> = extreme.iter().map(|&i| pts[i].clone()).collect();
    let triangles = faces.iter().map(|f| [pts[f[0]].clone(), pts[f[1]].clone(), pts[f[2]].clone()]).collect();
    Ok(ConvexBody { dim: 3, vertices, facets, affine_dim: 3, triangles })
}
