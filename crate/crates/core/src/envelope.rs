//! Subadditive tables on graded semigroups and their convex envelopes on grids.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{least_squares, Real};
use crate::semigroup::GradedSemigroup;
use crate::Body;

/// Finite table `F(kα, k)` on the cached points of a graded semigroup.
#[derive(Clone, Debug)]
pub struct SubadditiveTable<T> {
    pub d: usize,
    pub horizon: u32,
    levels: BTreeMap<u32, Vec<(Vec<i64>, T)>>,
    /// Largest `C` with `F(kα,k) ≥ C·(k + |kα|₁)` on the table.
    pub lower_bound_constant: T,
}

/// Worst subadditivity defect `F(a+b) − F(a) − F(b)` found on stored pairs.
#[derive(Clone, Debug, Serialize)]
pub struct SubadditivityReport<T> {
    pub pairs_checked: usize,
    pub worst_defect: T,
    pub worst_pair: Option<((Vec<i64>, u32), (Vec<i64>, u32))>,
}

/// Which levels feed an envelope estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LevelFilter {
    All,
    Even,
    Odd,
}

impl LevelFilter {
    fn keeps(self, k: u32) -> bool {
        match self {
            Self::All => true,
            Self::Even => k % 2 == 0,
            Self::Odd => k % 2 == 1,
        }
    }
}

impl<T: Real> SubadditiveTable<T> {
    /// Tabulates `f(kα, k)` on every cached slice up to `k_max`.
    pub fn from_fn<F: Fn(&[i64], u32) -> T>(sg: &GradedSemigroup, k_max: u32, f: F) -> Result<Self> {
        if sg.horizon() < k_max {
            return Err(Error::Input(format!("levels cached to {} but table needs {k_max}", sg.horizon())));
        }
        let mut levels = BTreeMap::new();
        for k in 1..=k_max {
            let row = sg.slice(k).unwrap_or(&[]).iter().map(|a| (a.clone(), f(a, k))).collect();
            levels.insert(k, row);
        }
        Ok(Self::from_levels(sg.d, levels))
    }

    fn from_levels(d: usize, levels: BTreeMap<u32, Vec<(Vec<i64>, T)>>) -> Self {
        let horizon = levels.keys().next_back().copied().unwrap_or(0);
        let mut c = T::infinity();
        for (k, row) in &levels {
            for (a, v) in row {
                let w = T::of_usize(*k as usize) + T::lit(a.iter().map(|x| x.abs()).sum::<i64>() as f64);
                c = c.min(*v / w);
            }
        }
        Self { d, horizon, levels, lower_bound_constant: c }
    }

    pub fn value(&self, alpha: &[i64], k: u32) -> Option<T> {
        let row = self.levels.get(&k)?;
        row.binary_search_by(|(a, _)| a.as_slice().cmp(alpha)).ok().map(|i| row[i].1)
    }

    pub fn level(&self, k: u32) -> &[(Vec<i64>, T)] {
        self.levels.get(&k).map_or(&[], Vec::as_slice)
    }

    /// Table of `mL`: `F_{mL}(β, k) = F_L(β, mk)`.
    pub fn rescaled(&self, m: u32) -> Result<Self> {
        if m == 0 || self.horizon < m {
            return Err(Error::Input(format!("rescaling by {m} needs levels cached to at least {m}")));
        }
        let levels = (1..=self.horizon / m).map(|j| (j, self.levels[&(j * m)].clone())).collect();
        Ok(Self::from_levels(self.d, levels))
    }

    /// Checks subadditivity on stored pairs whose sum is stored, visiting at most `max_pairs`.
    pub fn subadditivity(&self, max_pairs: usize) -> SubadditivityReport<T> {
        let mut rep = SubadditivityReport { pairs_checked: 0, worst_defect: T::neg_infinity(), worst_pair: None };
        'outer: for k1 in 1..=self.horizon / 2 {
            for k2 in k1..=self.horizon - k1 {
                for (a, fa) in self.level(k1) {
                    for (b, fb) in self.level(k2) {
                        if rep.pairs_checked >= max_pairs {
                            break 'outer;
                        }
                        let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        if let Some(fs) = self.value(&s, k1 + k2) {
                            rep.pairs_checked += 1;
                            let defect = fs - *fa - *fb;
                            if defect > rep.worst_defect {
                                rep.worst_defect = defect;
                                rep.worst_pair = Some(((a.clone(), k1), (b.clone(), k2)));
                            }
                        }
                    }
                }
            }
        }
        rep
    }
}

/// Regular grid over a body: spacing and number of boundary cells left out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub spacing: T,
    pub margin_cells: usize,
    /// Half-width, in cells, of the window of semigroup points feeding a node;
    /// `0` keeps only points coinciding with the node.
    pub window_cells: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(spacing: T, margin_cells: usize) -> Self {
        Self { spacing, margin_cells, window_cells: T::zero() }
    }
}

/// State of one grid node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum NodeState<T> {
    /// Outside the body or inside the boundary margin.
    Outside,
    /// Interior node without data.
    Missing,
    Value(T),
}

impl<T: Copy> NodeState<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Self::Value(v) => Some(*v),
            _ => None,
        }
    }
}

/// Scalar field on a regular grid over a body's interior.
#[derive(Clone, Debug, Serialize)]
pub struct ChebyshevField<T> {
    pub body: Body,
    pub origin: Vec<T>,
    pub spacing: T,
    pub shape: Vec<usize>,
    pub margin_cells: usize,
    pub nodes: Vec<NodeState<T>>,
    pub convexified: bool,
    /// Level horizon of the data, if the field comes from a table.
    pub horizon: Option<u32>,
}

impl<T: Real> ChebyshevField<T> {
    /// Empty field: interior nodes `Missing`, others `Outside`.
    pub fn grid(body: &Body, spec: GridSpec<T>) -> Result<Self> {
        if !(spec.spacing > T::zero()) {
            return Err(Error::Input("grid spacing must be positive".into()));
        }
        let (lo, hi) = body.bounding_box();
        let h = spec.spacing.as_f64();
        let shape: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| ((b - a) / h + 1e-9).floor() as usize + 1).collect();
        let total: usize = shape.iter().product();
        if total > 50_000_000 {
            return Err(Error::Input(format!("grid with {total} nodes is too large")));
        }
        let origin: Vec<T> = lo.iter().map(|&x| T::lit(x)).collect();
        let mut f = Self {
            body: body.clone(),
            origin,
            spacing: spec.spacing,
            shape,
            margin_cells: spec.margin_cells,
            nodes: vec![NodeState::Outside; total],
            convexified: false,
            horizon: None,
        };
        let need = spec.margin_cells as f64 * h;
        for i in 0..total {
            let x: Vec<f64> = f.coords(i).iter().map(|c| c.as_f64()).collect();
            if body.boundary_distance(&x) >= need - 1e-12 {
                f.nodes[i] = NodeState::Missing;
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for (a, n) in self.shape.iter().enumerate().rev() {
            out[a] = i % n;
            i /= n;
        }
        out
    }

    pub fn flat_index(&self, m: &[i64]) -> Option<usize> {
        let mut i = 0usize;
        for (a, &n) in self.shape.iter().enumerate() {
            if m[a] < 0 || m[a] as usize >= n {
                return None;
            }
            i = i * n + m[a] as usize;
        }
        Some(i)
    }

    pub fn coords(&self, i: usize) -> Vec<T> {
        self.multi_index(i).iter().zip(&self.origin).map(|(&m, &o)| o + self.spacing * T::of_usize(m)).collect()
    }

    /// Sets every interior node from a closure of the coordinates.
    pub fn fill<F: Fn(&[T]) -> Option<T> + Sync>(mut self, f: F) -> Self {
        use rayon::prelude::*;
        let vals: Vec<NodeState<T>> = (0..self.nodes.len())
            .into_par_iter()
            .map(|i| match self.nodes[i] {
                NodeState::Outside => NodeState::Outside,
                _ => f(&self.coords(i)).map_or(NodeState::Missing, NodeState::Value),
            })
            .collect();
        self.nodes = vals;
        self
    }

    /// Non-outside nodes as `(coordinates, value)`.
    pub fn interior(&self) -> Vec<(Vec<T>, Option<T>)> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i] != NodeState::Outside)
            .map(|i| (self.coords(i), self.nodes[i].value()))
            .collect()
    }

    /// Value at the node nearest to `x`.
    pub fn at(&self, x: &[T]) -> Option<T> {
        let m: Vec<i64> = x
            .iter()
            .zip(&self.origin)
            .map(|(&c, &o)| ((c - o) / self.spacing).round().to_i64().unwrap_or(-1))
            .collect();
        self.flat_index(&m).and_then(|i| self.nodes[i].value())
    }

    pub fn missing_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, NodeState::Missing)).count()
    }

    /// Largest `|value − f(x)|` over valued nodes.
    pub fn max_error<F: Fn(&[T]) -> T>(&self, f: F) -> T {
        (0..self.nodes.len())
            .filter_map(|i| self.nodes[i].value().map(|v| (v - f(&self.coords(i))).abs()))
            .fold(T::zero(), T::max)
    }

    /// Largest `|a − b|` over nodes valued in both fields.
    pub fn max_difference(&self, other: &Self) -> T {
        self.nodes
            .iter()
            .zip(&other.nodes)
            .filter_map(|(a, b)| Some((a.value()? - b.value()?).abs()))
            .fold(T::zero(), T::max)
    }

    /// Lower convex envelope on the grid by midpoint relaxation to a fixed point.
    pub fn convexify(&mut self, tol: T) {
        let dirs = directions(self.dim());
        let n = self.nodes.len();
        let mi: Vec<Vec<i64>> = (0..n).map(|i| self.multi_index(i).iter().map(|&x| x as i64).collect()).collect();
        for _sweep in 0..100_000 {
            let mut change = T::zero();
            for i in 0..n {
                let Some(mut v) = self.nodes[i].value() else { continue };
                for d in &dirs {
                    for s in 1.. {
                        let p: Vec<i64> = mi[i].iter().zip(d).map(|(a, b)| a + s * b).collect();
                        let q: Vec<i64> = mi[i].iter().zip(d).map(|(a, b)| a - s * b).collect();
                        let (Some(ip), Some(iq)) = (self.flat_index(&p), self.flat_index(&q)) else { break };
                        if let (Some(a), Some(b)) = (self.nodes[ip].value(), self.nodes[iq].value()) {
                            let mid = (a + b) / T::lit(2.0);
                            if mid < v {
                                change = change.max(v - mid);
                                v = mid;
                            }
                        }
                    }
                }
                self.nodes[i] = NodeState::Value(v);
            }
            if change <= tol {
                break;
            }
        }
        self.convexified = true;
    }
}

/// Small primitive directions, one per antipodal pair.
pub fn directions(dim: usize) -> Vec<Vec<i64>> {
    let r: i64 = if dim <= 2 { 2 } else { 1 };
    let mut out = Vec::new();
    let span = (2 * r + 1) as usize;
    for idx in 0..span.pow(dim as u32) {
        let mut rem = idx;
        let v: Vec<i64> = (0..dim)
            .map(|_| {
                let t = (rem % span) as i64 - r;
                rem /= span;
                t
            })
            .collect();
        let first = v.iter().find(|&&x| x != 0);
        let g = v.iter().fold(0i64, |g, &x| gcd(g, x.abs()));
        if first.is_some_and(|&x| x > 0) && g == 1 {
            out.push(v);
        }
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cell minimum of `F(kα,k)/k` followed by the discrete lower convex envelope.
pub fn envelope_estimate<T: Real>(
    tab: &SubadditiveTable<T>,
    horizon: u32,
    body: &Body,
    grid: GridSpec<T>,
    filter: LevelFilter,
) -> Result<ChebyshevField<T>> {
    if tab.horizon < horizon {
        return Err(Error::Input(format!("table filled to {} but horizon is {horizon}", tab.horizon)));
    }
    let mut field = ChebyshevField::grid(body, grid)?;
    field.horizon = Some(horizon);
    let h = grid.spacing;
    let half = grid.window_cells + T::lit(1e-9);
    let mut best: Vec<Option<T>> = vec![None; field.nodes.len()];
    for k in (1..=horizon).filter(|&k| filter.keeps(k)) {
        let kt = T::of_usize(k as usize);
        for (a, v) in tab.level(k) {
            let t: Vec<T> = a.iter().zip(&field.origin).map(|(&c, &o)| (T::lit(c as f64) / kt - o) / h).collect();
            let cands: Vec<Vec<i64>> = t
                .iter()
                .map(|&ti| {
                    let (f, c) = (ti.floor(), ti.ceil());
                    let mut c2: Vec<i64> = [f, c].iter().filter(|&&x| (ti - x).abs() <= half).map(|x| x.to_i64().unwrap()).collect();
                    c2.dedup();
                    c2
                })
                .collect();
            let val = *v / kt;
            for_each_product(&cands, &mut |m| {
                if let Some(i) = field.flat_index(m) {
                    if field.nodes[i] != NodeState::Outside {
                        best[i] = Some(best[i].map_or(val, |b: T| b.min(val)));
                    }
                }
            });
        }
    }
    for (node, b) in field.nodes.iter_mut().zip(best) {
        if *node != NodeState::Outside {
            *node = b.map_or(NodeState::Missing, NodeState::Value);
        }
    }
    field.convexify(T::lit(1e-10));
    Ok(field)
}

fn for_each_product(c: &[Vec<i64>], f: &mut dyn FnMut(&[i64])) {
    fn rec(c: &[Vec<i64>], acc: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
        if acc.len() == c.len() {
            f(acc);
            return;
        }
        for &x in &c[acc.len()] {
            acc.push(x);
            rec(c, acc, f);
            acc.pop();
        }
    }
    rec(c, &mut Vec::new(), f);
}

/// Sequence `F(mα, mk₀)/(mk₀)` along a ray.
#[derive(Clone, Debug, Serialize)]
pub struct RayReport<T> {
    pub alpha: Vec<i64>,
    pub k0: u32,
    pub values: Vec<T>,
    /// Largest increase between consecutive terms (≤ 0 for a nonincreasing sequence).
    pub max_increase: T,
    pub monotone: bool,
    pub limit_estimate: T,
}

/// Reports the normalized values along the ray through `(α, k₀)` up to level `k_max`.
pub fn ray_monotonicity_report<T: Real>(
    tab: &SubadditiveTable<T>,
    alpha: &[i64],
    k0: u32,
    k_max: u32,
) -> Result<RayReport<T>> {
    let mut values = Vec::new();
    let mut m = 1u32;
    while m * k0 <= k_max.min(tab.horizon) {
        let a: Vec<i64> = alpha.iter().map(|&x| x * m as i64).collect();
        let v = tab
            .value(&a, m * k0)
            .ok_or_else(|| Error::Input(format!("point {a:?} at level {} is not in the table", m * k0)))?;
        values.push(v / T::of_usize((m * k0) as usize));
        m += 1;
    }
    if values.is_empty() {
        return Err(Error::Input("ray has no cached multiple".into()));
    }
    let max_increase = values.windows(2).map(|w| w[1] - w[0]).fold(T::neg_infinity(), T::max);
    let max_increase = if values.len() < 2 { T::zero() } else { max_increase };
    Ok(RayReport {
        alpha: alpha.to_vec(),
        k0,
        monotone: max_increase <= T::lit(1e-9),
        limit_estimate: tail_limit(&values),
        max_increase,
        values,
    })
}

/// Fits `v_m ≈ L + a/m + b·ln(m)/m` on the second half of a sequence indexed from 1.
pub fn tail_limit<T: Real>(values: &[T]) -> T {
    let n = values.len();
    let start = n / 2;
    if n - start < 4 {
        return values[n - 1];
    }
    let rows: Vec<Vec<T>> = (start..n)
        .map(|i| {
            let m = T::of_usize(i + 1);
            vec![T::one(), T::one() / m, m.ln() / m]
        })
        .collect();
    least_squares(&rows, &values[start..]).map_or(values[n - 1], |c| c[0])
}

/// Midpoint-convexity audit over all collinear grid triples.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityAudit<T> {
    pub passed: bool,
    pub triples_checked: usize,
    /// Largest `v(p) − (v(p−sd) + v(p+sd))/2`.
    pub worst_violation: T,
    pub worst_triple: Option<[Vec<T>; 3]>,
}

pub fn convexity_audit<T: Real>(field: &ChebyshevField<T>, tol: T) -> ConvexityAudit<T> {
    let dirs = directions(field.dim());
    let mut audit = ConvexityAudit { passed: true, triples_checked: 0, worst_violation: T::zero(), worst_triple: None };
    for i in 0..field.nodes.len() {
        let Some(v) = field.nodes[i].value() else { continue };
        let mi: Vec<i64> = field.multi_index(i).iter().map(|&x| x as i64).collect();
        for d in &dirs {
            for s in 1.. {
                let p: Vec<i64> = mi.iter().zip(d).map(|(a, b)| a + s * b).collect();
                let q: Vec<i64> = mi.iter().zip(d).map(|(a, b)| a - s * b).collect();
                let (Some(ip), Some(iq)) = (field.flat_index(&p), field.flat_index(&q)) else { break };
                if let (Some(a), Some(b)) = (field.nodes[ip].value(), field.nodes[iq].value()) {
                    audit.triples_checked += 1;
                    let viol = v - (a + b) / T::lit(2.0);
                    if viol > audit.worst_violation {
                        audit.worst_violation = viol;
                        audit.worst_triple = Some([field.coords(iq), field.coords(i), field.coords(ip)]);
                    }
                }
            }
        }
    }
    audit.passed = audit.worst_violation <= tol;
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ln_binomial;

    fn p1(k: u32) -> GradedSemigroup {
        GradedSemigroup::projective(1, 1).unwrap().with_levels(k).unwrap()
    }

    fn entropy(p: f64) -> f64 {
        p * p.ln() + (1.0 - p) * (1.0 - p).ln()
    }

    fn unit() -> Body {
        Body::interval(0.0, 1.0)
    }

    #[test]
    fn binomial_table_converges_to_entropy() {
        let sg = p1(200);
        let tab = SubadditiveTable::from_fn(&sg, 200, |a, k| -ln_binomial(k as u64, a[0] as u64)).unwrap();
        let rep = tab.subadditivity(200_000);
        assert!(rep.worst_defect <= 1e-9, "{:?}", rep.worst_defect);
        let grid = GridSpec::new(1.0 / 200.0, 2);
        let field = envelope_estimate(&tab, 200, &unit(), grid, LevelFilter::All).unwrap();
        assert_eq!(field.missing_count(), 0);
        let err = field.max_error(|x| entropy(x[0]));
        assert!(err <= 0.02, "max error {err}");
        assert!(convexity_audit(&field, 1e-8).passed);
    }

    #[test]
    fn convex_homogeneous_table_is_reproduced() {
        let sg = p1(40);
        let tab = SubadditiveTable::from_fn(&sg, 40, |a, k| {
            let x = a[0] as f64 / k as f64;
            k as f64 * x * x
        })
        .unwrap();
        let h = 1.0 / 40.0;
        let field = envelope_estimate(&tab, 40, &unit(), GridSpec::new(h, 2), LevelFilter::All).unwrap();
        assert!(field.max_error(|x| x[0] * x[0]) <= h * h);
        let zero = SubadditiveTable::from_fn(&sg, 40, |_, _| 0.0).unwrap();
        let f0 = envelope_estimate(&zero, 40, &unit(), GridSpec::new(h, 2), LevelFilter::All).unwrap();
        assert_eq!(f0.max_error(|_| 0.0), 0.0);
    }

    #[test]
    fn sparse_semigroup_leaves_missing_nodes() {
        let gens = vec![
            crate::semigroup::GradedPoint { alpha: vec![0], level: 1 },
            crate::semigroup::GradedPoint { alpha: vec![1], level: 1 },
        ];
        let sg = GradedSemigroup::new(1, gens).unwrap().with_levels(4).unwrap();
        let tab = SubadditiveTable::from_fn(&sg, 4, |_, _| 0.0).unwrap();
        let f = envelope_estimate(&tab, 4, &unit(), GridSpec::new(0.01, 2), LevelFilter::All).unwrap();
        assert!(f.missing_count() > 0);
        let wide = GridSpec { window_cells: 0.5, ..GridSpec::new(0.01, 2) };
        let f = envelope_estimate(&tab, 4, &unit(), wide, LevelFilter::All).unwrap();
        assert!(f.missing_count() > 0 && f.missing_count() < 97);
    }

    #[test]
    fn rays_are_monotone() {
        let sg = p1(200);
        let tab = SubadditiveTable::from_fn(&sg, 200, |a, k| -ln_binomial(k as u64, a[0] as u64)).unwrap();
        let r = ray_monotonicity_report(&tab, &[1], 2, 200).unwrap();
        assert!(r.monotone && r.values.len() == 100);
        assert!((r.limit_estimate + 2f64.ln()).abs() < 1e-3, "{}", r.limit_estimate);
        let lin = SubadditiveTable::from_fn(&sg, 60, |a, k| 3.0 * k as f64 - a[0] as f64).unwrap();
        let r = ray_monotonicity_report(&lin, &[1], 2, 60).unwrap();
        assert!(r.values.iter().all(|v: &f64| (v - 2.5).abs() < 1e-15) && r.monotone);
        let noisy = SubadditiveTable::from_fn(&sg, 60, |_, k| 2.0 * k as f64 + 1.0 / k as f64).unwrap();
        let r = ray_monotonicity_report(&noisy, &[1], 2, 60).unwrap();
        assert!(r.monotone && (r.limit_estimate - 2.0).abs() < 1e-3);
    }

    #[test]
    fn audit_locates_a_corrupted_node() {
        let body = unit();
        let mut f = ChebyshevField::<f64>::grid(&body, GridSpec::new(0.125, 0)).unwrap().fill(|x| Some(2.0 * x[0]));
        let a = convexity_audit(&f, 1e-12);
        assert!(a.passed && a.worst_violation == 0.0);
        f.nodes[4] = NodeState::Value(3.0);
        let a = convexity_audit(&f, 1e-8);
        assert!(!a.passed);
        assert!((a.worst_triple.unwrap()[1][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_relaxation_reaches_convexity() {
        let body = Body::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let mut f = ChebyshevField::grid(&body, GridSpec::new(0.05, 0))
            .unwrap()
            .fill(|x: &[f64]| Some((x[0] - 0.5).powi(2) + (x[1] * 7.0).sin() * 0.05));
        let raw = f.clone();
        f.convexify(1e-12);
        assert!(convexity_audit(&f, 1e-8).passed);
        assert!(f.nodes.iter().zip(&raw.nodes).all(|(a, b)| a.value().unwrap() <= b.value().unwrap() + 1e-15));
    }

    #[test]
    fn direction_sets() {
        assert_eq!(directions(1), vec![vec![1]]);
        assert_eq!(directions(2).len(), 8);
        assert_eq!(directions(3).len(), 13);
    }
}
