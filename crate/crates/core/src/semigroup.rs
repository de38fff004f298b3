//! Graded subsemigroups of ℕ^{d+1}: level slices, Okounkov bodies and the
//! Khovanskii inclusion probe.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hull_2d, hull_3d, ConvexBody};
use crate::scalar::binomial;
use crate::{Body, ExactBody};

/// Per-axis coordinate cap for enumerated points.
pub const COORD_CAP: i64 = 1 << 31;

/// A point `(α, k)` of a graded semigroup.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GradedPoint {
    pub alpha: Vec<i64>,
    pub level: u32,
}

/// JSON form `{"d": n, "generators": [[a1, ..., an, k], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupSpec {
    pub d: usize,
    pub generators: Vec<Vec<i64>>,
}

/// Section space whose monomial basis defines the semigroup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionSpace {
    /// `𝒪(degree)` on `ℙⁿ`.
    Projective { n: usize, degree: u32 },
    /// Toric line bundle of a lattice polytope given by its vertices.
    Toric { vertices: Vec<Vec<i64>> },
}

impl SectionSpace {
    /// `dim H⁰(kL)` from the monomial count.
    pub fn dimension(&self, k: u32) -> Result<u64> {
        match self {
            Self::Projective { n, degree } => binomial(k as u64 * *degree as u64 + *n as u64, *n as u64)
                .ok_or_else(|| Error::Input("dimension overflows u64".into())),
            Self::Toric { vertices } => Ok(exact_polytope(vertices)?.lattice_points_scaled(k).len() as u64),
        }
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn exact_polytope(vertices: &[Vec<i64>]) -> Result<ExactBody> {
    let d = vertices.first().map(Vec::len).ok_or_else(|| Error::Input("empty polytope".into()))?;
    let pts: Vec<Vec<BigRational>> = vertices.iter().map(|v| v.iter().map(|&c| rat(c)).collect()).collect();
    ConvexBody::hull(d, &pts)
}

/// Generators and cached level slices of a graded semigroup.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSemigroup {
    pub d: usize,
    pub generators: Vec<GradedPoint>,
    levels: BTreeMap<u32, Vec<Vec<i64>>>,
    horizon: u32,
    space: Option<SectionSpace>,
}

impl GradedSemigroup {
    pub fn new(d: usize, generators: Vec<GradedPoint>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Input("generator list is empty".into()));
        }
        for g in &generators {
            if g.alpha.len() != d {
                return Err(Error::Input(format!("generator {g:?} does not have {d} coordinates")));
            }
            if g.level == 0 {
                return Err(Error::Input(format!("generator {g:?} has level 0")));
            }
            if let Some(&c) = g.alpha.iter().find(|&&c| !(0..COORD_CAP).contains(&c)) {
                return Err(if c < 0 {
                    Error::Input(format!("generator {g:?} has a negative coordinate"))
                } else {
                    Error::Overflow { value: c as i128, cap: COORD_CAP }
                });
            }
        }
        let mut generators = generators;
        generators.sort();
        generators.dedup();
        Ok(Self { d, generators, levels: BTreeMap::new(), horizon: 0, space: None })
    }

    pub fn from_spec(spec: &SemigroupSpec) -> Result<Self> {
        let gens = spec
            .generators
            .iter()
            .map(|g| {
                if g.len() != spec.d + 1 {
                    return Err(Error::Input(format!("generator {g:?} must have d+1 = {} entries", spec.d + 1)));
                }
                let level = u32::try_from(g[spec.d]).map_err(|_| Error::Input(format!("bad level in {g:?}")))?;
                Ok(GradedPoint { alpha: g[..spec.d].to_vec(), level })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(spec.d, gens)
    }

    pub fn to_spec(&self) -> SemigroupSpec {
        SemigroupSpec {
            d: self.d,
            generators: self
                .generators
                .iter()
                .map(|g| g.alpha.iter().copied().chain([g.level as i64]).collect())
                .collect(),
        }
    }

    /// Semigroup of monomials of `𝒪(degree)` on `ℙⁿ` in affine exponents.
    pub fn projective(n: usize, degree: u32) -> Result<Self> {
        let space = SectionSpace::Projective { n, degree };
        let mut vertices = vec![vec![0i64; n]];
        for i in 0..n {
            let mut e = vec![0i64; n];
            e[i] = degree as i64;
            vertices.push(e);
        }
        let mut sg = Self::toric(&vertices)?;
        sg.space = Some(space);
        Ok(sg)
    }

    /// Semigroup of the toric line bundle of a lattice polytope (generated in level one,
    /// which holds for every lattice polygon and every lattice interval).
    pub fn toric(vertices: &[Vec<i64>]) -> Result<Self> {
        let body = exact_polytope(vertices)?;
        let d = body.dim;
        let gens = body.lattice_points_scaled(1).into_iter().map(|alpha| GradedPoint { alpha, level: 1 }).collect();
        let mut sg = Self::new(d, gens)?;
        sg.space = Some(SectionSpace::Toric { vertices: vertices.to_vec() });
        Ok(sg)
    }

    pub fn section_space(&self) -> Option<&SectionSpace> {
        self.space.as_ref()
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Level-`k` slice scaled by `k`, sorted lexicographically.
    pub fn slice(&self, k: u32) -> Option<&[Vec<i64>]> {
        self.levels.get(&k).map(Vec::as_slice)
    }

    /// Fills the cached slices up to `k_max` by dynamic programming over levels.
    pub fn enumerate_levels(&mut self, k_max: u32) -> Result<()> {
        if k_max == 0 {
            return Err(Error::Input("k_max must be at least 1".into()));
        }
        let zero = vec![0i64; self.d];
        for k in self.horizon + 1..=k_max {
            let mut set: BTreeSet<Vec<i64>> = BTreeSet::new();
            for g in &self.generators {
                if g.level > k {
                    continue;
                }
                let base: &[Vec<i64>] =
                    if g.level == k { std::slice::from_ref(&zero) } else { &self.levels[&(k - g.level)] };
                for b in base {
                    let mut p = Vec::with_capacity(self.d);
                    for (x, y) in b.iter().zip(&g.alpha) {
                        let s = x + y;
                        if s >= COORD_CAP {
                            return Err(Error::Overflow { value: s as i128, cap: COORD_CAP });
                        }
                        p.push(s);
                    }
                    set.insert(p);
                }
            }
            self.levels.insert(k, set.into_iter().collect());
            self.horizon = k;
        }
        Ok(())
    }

    /// Builder form of [`Self::enumerate_levels`].
    pub fn with_levels(mut self, k_max: u32) -> Result<Self> {
        self.enumerate_levels(k_max)?;
        Ok(self)
    }

    /// Semigroup of `mL`: level `j` is the cached level `mj` of `self`.
    pub fn rescaled(&self, m: u32) -> Result<Self> {
        if m == 0 || self.horizon < m {
            return Err(Error::Input(format!("rescaling by {m} needs levels cached to at least {m}")));
        }
        let top = self.horizon / m;
        let mut levels = BTreeMap::new();
        let mut gens = Vec::new();
        for j in 1..=top {
            let s = self.levels[&(j * m)].clone();
            gens.extend(s.iter().map(|a| GradedPoint { alpha: a.clone(), level: j }));
            levels.insert(j, s);
        }
        let space = match &self.space {
            Some(SectionSpace::Projective { n, degree }) => Some(SectionSpace::Projective { n: *n, degree: degree * m }),
            Some(SectionSpace::Toric { vertices }) => Some(SectionSpace::Toric {
                vertices: vertices.iter().map(|v| v.iter().map(|c| c * m as i64).collect()).collect(),
            }),
            None => None,
        };
        Ok(Self { d: self.d, generators: gens, levels, horizon: top, space })
    }

    /// Points `α/k` of all cached slices up to `k_max`.
    pub fn normalized_points(&self, k_max: u32) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self
            .levels
            .range(1..=k_max)
            .flat_map(|(k, s)| s.iter().map(move |a| a.iter().map(|&c| c as f64 / *k as f64).collect()))
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Hull of the generator points `α_g / k_g`, i.e. the body of the whole semigroup.
    pub fn cone_body(&self) -> Result<(Body, Option<ExactBody>)> {
        let pts: Vec<(Vec<i64>, u32)> = self.generators.iter().map(|g| (g.alpha.clone(), g.level)).collect();
        scaled_hull(self.d, &pts)
    }

    /// Checks that the generators span `ℤ^{d+1}` as a group.
    pub fn check_group_generation(&self) -> Result<()> {
        let rows: Vec<Vec<i128>> = self
            .generators
            .iter()
            .map(|g| g.alpha.iter().map(|&c| c as i128).chain([g.level as i128]).collect())
            .collect();
        let factors = smith_invariants(rows, self.d + 1);
        let torsion: Vec<i128> = factors.iter().copied().filter(|&f| f > 1).collect();
        let free = self.d + 1 - factors.len();
        if torsion.is_empty() && free == 0 {
            return Ok(());
        }
        let mut parts: Vec<String> = torsion.iter().map(|t| format!("Z/{t}")).collect();
        if free > 0 {
            parts.push(format!("Z^{free}"));
        }
        Err(Error::NotGroupGenerating { quotient: parts.join(" + ") })
    }
}

/// Invariant factors (nonzero diagonal of the Smith normal form) of an integer matrix.
pub fn smith_invariants(mut a: Vec<Vec<i128>>, cols: usize) -> Vec<i128> {
    let rows = a.len();
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot: smallest nonzero magnitude in the trailing block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for r in a.iter_mut().skip(t) {
                        r[j] -= q * r[t];
                    }
                }
                if a[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                // Divisibility of the trailing block by the pivot.
                let bad = (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            a[t][j] += a[i][j];
                        }
                        continue;
                    }
                }
            }
            // Move the smallest nonzero entry of row/column t to the pivot.
            let mut bi = (t, t);
            for i in t..rows {
                if a[i][t] != 0 && a[i][t].abs() < a[bi.0][bi.1].abs() {
                    bi = (i, t);
                }
            }
            for j in t..cols {
                if a[t][j] != 0 && a[t][j].abs() < a[bi.0][bi.1].abs() {
                    bi = (t, j);
                }
            }
            a.swap(t, bi.0);
            for r in a.iter_mut() {
                r.swap(t, bi.1);
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

/// Exact hull of points `α / k`; returns the floating body and, for `d ≤ 2`, the rational one.
fn scaled_hull(d: usize, pts: &[(Vec<i64>, u32)]) -> Result<(Body, Option<ExactBody>)> {
    if pts.is_empty() {
        return Err(Error::Input("empty semigroup".into()));
    }
    if d <= 2 {
        let rp: Vec<Vec<BigRational>> = pts
            .iter()
            .map(|(a, k)| a.iter().map(|&c| BigRational::new(BigInt::from(c), BigInt::from(*k))).collect())
            .collect();
        let exact = ConvexBody::hull(d, &rp)?;
        Ok((exact.to_f64(), Some(exact)))
    } else {
        let fp: Vec<Vec<f64>> =
            pts.iter().map(|(a, k)| a.iter().map(|&c| c as f64 / *k as f64).collect()).collect();
        Ok((hull_3d(&fp)?, None))
    }
}

/// Okounkov body of the truncated semigroup with its monotonicity certificate.
#[derive(Clone, Debug, Serialize)]
pub struct OkounkovBody {
    pub body: Body,
    #[serde(skip)]
    pub exact: Option<ExactBody>,
    pub horizon: u32,
    pub volume: f64,
    pub degenerate: bool,
    /// Volume of the hull at each horizon `k ≤ k_max`.
    pub volume_by_horizon: Vec<(u32, f64)>,
    /// Every intermediate hull is contained in the final one.
    pub monotone: bool,
}

fn level_extremes(d: usize, slice: &[Vec<i64>]) -> Vec<Vec<i64>> {
    match d {
        1 => {
            let lo = slice.iter().min().cloned();
            let hi = slice.iter().max().cloned();
            lo.into_iter().chain(hi).collect()
        }
        2 => {
            let pts: Vec<Vec<i128>> = slice.iter().map(|a| a.iter().map(|&c| c as i128).collect()).collect();
            hull_2d(&pts).into_iter().map(|v| v.into_iter().map(|c| c as i64).collect()).collect()
        }
        _ => slice.to_vec(),
    }
}

/// Convex hull of `∪_{k ≤ k_max} (1/k)·Δ_k`.
pub fn okounkov_body(sg: &GradedSemigroup, k_max: u32) -> Result<OkounkovBody> {
    if sg.horizon < k_max {
        return Err(Error::Input(format!("levels cached to {} but k_max = {k_max}", sg.horizon)));
    }
    let mut acc: Vec<(Vec<i64>, u32)> = Vec::new();
    let mut hulls: Vec<(u32, Body)> = Vec::new();
    for k in 1..=k_max {
        let slice = sg.slice(k).unwrap_or(&[]);
        acc.extend(level_extremes(sg.d, slice).into_iter().map(|a| (a, k)));
        if acc.is_empty() {
            continue;
        }
        let (body, exact) = scaled_hull(sg.d, &acc)?;
        // Keep only the extreme points for the next round.
        acc = match &exact {
            Some(e) => e
                .vertices
                .iter()
                .map(|v| {
                    let den = v.iter().fold(BigInt::from(1), |l, c| num_integer_lcm(&l, c.denom()));
                    let a = v
                        .iter()
                        .map(|c| i64::try_from(c.numer() * (&den / c.denom())).unwrap_or(i64::MAX))
                        .collect();
                    (a, u32::try_from(den).unwrap_or(u32::MAX))
                })
                .collect(),
            None => acc,
        };
        hulls.push((k, body));
    }
    let (kk, last) = hulls.pop().ok_or_else(|| Error::Input("empty semigroup".into()))?;
    let exact = if sg.d <= 2 { scaled_hull(sg.d, &acc)?.1 } else { None };
    let monotone = hulls.iter().all(|(_, b)| b.is_within(&last, 1e-12));
    let mut volume_by_horizon: Vec<(u32, f64)> = hulls.iter().map(|(k, b)| (*k, b.volume().value)).collect();
    let vol = last.volume();
    volume_by_horizon.push((kk, vol.value));
    Ok(OkounkovBody {
        volume: vol.value,
        degenerate: vol.degenerate,
        body: last,
        exact,
        horizon: k_max,
        volume_by_horizon,
        monotone,
    })
}

fn num_integer_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

/// One level of the Khovanskii probe.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeLevel {
    pub k: u32,
    pub lattice_points: usize,
    pub missing: usize,
    /// Largest `k · dist(α/k, ∂Δ)` over missing points.
    pub worst_scaled_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeViolation {
    pub k: u32,
    pub alpha: Vec<i64>,
    pub scaled_distance: f64,
}

/// Empirical inclusion threshold on a range of levels.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub k_range: (u32, u32),
    /// Smallest `C` such that every lattice point at distance `> C/k` from the
    /// boundary lies in `Δ_k` for all tested `k`.
    pub c_min: f64,
    pub c_cap: f64,
    pub levels: Vec<ProbeLevel>,
    pub violations: Vec<ProbeViolation>,
}

/// Probes the smallest constant for which interior lattice points far from the
/// boundary belong to the level slices.
pub fn khovanskii_threshold_probe(sg: &GradedSemigroup, k_lo: u32, k_hi: u32, c_cap: f64) -> Result<ProbeReport> {
    if k_lo == 0 || k_lo > k_hi {
        return Err(Error::Input(format!("bad level range [{k_lo}, {k_hi}]")));
    }
    if sg.horizon < k_hi {
        return Err(Error::Input(format!("levels cached to {} but range ends at {k_hi}", sg.horizon)));
    }
    sg.check_group_generation()?;
    let (body, exact) = sg.cone_body()?;
    let mut levels = Vec::new();
    let mut candidates = Vec::new();
    for k in k_lo..=k_hi {
        let pts = match &exact {
            Some(e) => e.lattice_points_scaled(k),
            None => body.lattice_points_scaled(k),
        };
        let slice = sg.slice(k).unwrap_or(&[]);
        let mut worst = 0.0f64;
        let mut missing = 0;
        for p in &pts {
            if slice.binary_search(p).is_ok() {
                continue;
            }
            missing += 1;
            let x: Vec<f64> = p.iter().map(|&c| c as f64 / k as f64).collect();
            let dist = (body.boundary_distance(&x) * k as f64).max(0.0);
            worst = worst.max(dist);
            candidates.push(ProbeViolation { k, alpha: p.clone(), scaled_distance: dist });
        }
        levels.push(ProbeLevel { k, lattice_points: pts.len(), missing, worst_scaled_distance: worst });
    }
    let c_min = levels.iter().map(|l| l.worst_scaled_distance).fold(0.0, f64::max);
    let violations = candidates.into_iter().filter(|v| v.scaled_distance > c_cap).collect();
    Ok(ProbeReport { k_range: (k_lo, k_hi), c_min, c_cap, levels, violations })
}

/// Volume of a body with its degeneracy flag.
pub fn body_volume(body: &Body) -> crate::geometry::Volume<f64> {
    body.volume()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeCountReport {
    pub k: u32,
    pub slice_count: usize,
    pub expected: u64,
    pub ok: bool,
}

/// Compares `|Δ_k|` with the dimension of the section space.
pub fn lattice_point_count_check(sg: &GradedSemigroup, k: u32) -> Result<LatticeCountReport> {
    let space = sg
        .section_space()
        .ok_or_else(|| Error::Input("semigroup is not attached to an explicit section space".into()))?;
    let slice_count = sg.slice(k).map_or(0, <[_]>::len);
    let expected = space.dimension(k)?;
    Ok(LatticeCountReport { k, slice_count, expected, ok: slice_count as u64 == expected })
}

/// Largest distance from a sample of the body to the normalized points of levels `≤ k_max`.
pub fn fill_distance(sg: &GradedSemigroup, body: &Body, k_max: u32, samples_per_axis: usize) -> f64 {
    let pts = sg.normalized_points(k_max);
    let (lo, hi) = body.bounding_box();
    let n = body.dim;
    let mut samples: Vec<Vec<f64>> = body.vertices.clone();
    let total = samples_per_axis.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = rem % samples_per_axis;
                rem /= samples_per_axis;
                lo[i] + (hi[i] - lo[i]) * t as f64 / (samples_per_axis.max(2) - 1) as f64
            })
            .collect();
        if body.contains(&x) {
            samples.push(x);
        }
    }
    samples
        .iter()
        .map(|s| {
            pts.iter()
                .map(|p| p.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sg1(gens: &[i64]) -> GradedSemigroup {
        let g = gens.iter().map(|&a| GradedPoint { alpha: vec![a], level: 1 }).collect();
        GradedSemigroup::new(1, g).unwrap()
    }

    /// Brute force over multisets of `k` level-one generators.
    fn brute_slice(gens: &[i64], k: u32) -> Vec<Vec<i64>> {
        let mut out = BTreeSet::new();
        fn rec(gens: &[i64], start: usize, left: u32, acc: i64, out: &mut BTreeSet<Vec<i64>>) {
            if left == 0 {
                out.insert(vec![acc]);
                return;
            }
            for i in start..gens.len() {
                rec(gens, i, left - 1, acc + gens[i], out);
            }
        }
        rec(gens, 0, k, 0, &mut out);
        out.into_iter().collect()
    }

    #[test]
    fn slices_match_brute_force() {
        let s = sg1(&[0, 1]).with_levels(3).unwrap();
        assert_eq!(s.slice(3).unwrap(), &[vec![0], vec![1], vec![2], vec![3]]);
        let s = sg1(&[0, 2, 3]).with_levels(6).unwrap();
        assert_eq!(s.slice(2).unwrap(), &[vec![0], vec![2], vec![3], vec![4], vec![5], vec![6]]);
        for k in 1..=6 {
            assert_eq!(s.slice(k).unwrap(), brute_slice(&[0, 2, 3], k).as_slice());
        }
    }

    #[test]
    fn level_one_slice_is_generator_set() {
        let gens: Vec<GradedPoint> = [[1, 1, 1], [2, 1, 1], [1, 2, 1], [1, 1, 2]]
            .iter()
            .map(|a| GradedPoint { alpha: a.to_vec(), level: 1 })
            .collect();
        let s = GradedSemigroup::new(3, gens.clone()).unwrap().with_levels(1).unwrap();
        let mut expected: Vec<Vec<i64>> = gens.into_iter().map(|g| g.alpha).collect();
        expected.sort();
        assert_eq!(s.slice(1).unwrap(), expected.as_slice());
    }

    #[test]
    fn overflow_is_rejected() {
        let mut s = sg1(&[COORD_CAP - 1]);
        let err = s.enumerate_levels(2).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
        assert!(GradedSemigroup::new(1, vec![]).is_err());
    }

    #[test]
    fn bodies_of_basic_semigroups() {
        let s = sg1(&[0, 1]).with_levels(5).unwrap();
        let b = okounkov_body(&s, 5).unwrap();
        assert!(b.monotone && b.volume == 1.0);
        assert_eq!(b.body.vertices, vec![vec![0.0], vec![1.0]]);
        let point = sg1(&[1]).with_levels(3).unwrap();
        let b = okounkov_body(&point, 3).unwrap();
        assert!(b.degenerate && b.body.vertices == vec![vec![1.0]]);
        let sq = GradedSemigroup::toric(&[vec![0, 0], vec![1, 0], vec![1, 1], vec![0, 1]]).unwrap().with_levels(3).unwrap();
        let b = okounkov_body(&sq, 3).unwrap();
        assert!(b.body.approx_eq(&Body::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1e-15));
        let p2 = GradedSemigroup::projective(2, 3).unwrap().with_levels(2).unwrap();
        assert_eq!(okounkov_body(&p2, 2).unwrap().volume, 4.5);
    }

    #[test]
    fn non_normal_generators_have_growing_hull() {
        // Hull of α/k for generators at different levels.
        let gens = vec![GradedPoint { alpha: vec![0], level: 1 }, GradedPoint { alpha: vec![3], level: 2 }];
        let s = GradedSemigroup::new(1, gens).unwrap().with_levels(4).unwrap();
        let b = okounkov_body(&s, 4).unwrap();
        assert!(b.monotone);
        assert!((b.volume - 1.5).abs() < 1e-15);
        assert_eq!(b.volume_by_horizon[0], (1, 0.0));
    }

    #[test]
    fn probe_thresholds() {
        let s = sg1(&[0, 1]).with_levels(50).unwrap();
        let r = khovanskii_threshold_probe(&s, 1, 50, 5.0).unwrap();
        assert_eq!(r.c_min, 0.0);
        let s = sg1(&[0, 2, 3]).with_levels(50).unwrap();
        let r = khovanskii_threshold_probe(&s, 2, 50, 5.0).unwrap();
        assert!((r.c_min - 1.0).abs() < 1e-12, "{}", r.c_min);
        assert!(r.levels.iter().all(|l| l.missing == 1));
        let r = khovanskii_threshold_probe(&s, 2, 50, 0.5).unwrap();
        assert_eq!(r.violations.len(), 49);
    }

    #[test]
    fn probe_on_a_cone_with_holes() {
        // Cone strictly inside the quadrant; the enumeration oracle is the slice itself.
        let gens: Vec<GradedPoint> = [[1, 1], [2, 1], [1, 2], [3, 3], [2, 3]]
            .iter()
            .map(|a| GradedPoint { alpha: a.to_vec(), level: 1 })
            .chain([GradedPoint { alpha: vec![3, 2], level: 2 }])
            .collect();
        let s = GradedSemigroup::new(2, gens).unwrap().with_levels(20).unwrap();
        let r = khovanskii_threshold_probe(&s, 1, 20, 50.0).unwrap();
        assert!(r.c_min.is_finite() && r.violations.is_empty());
        let late = r.levels.iter().filter(|l| l.k > 10).map(|l| l.worst_scaled_distance).fold(0.0, f64::max);
        assert!(late <= r.c_min);
    }

    #[test]
    fn group_generation_failure_names_quotient() {
        let s = sg1(&[0, 2]);
        match s.check_group_generation() {
            Err(Error::NotGroupGenerating { quotient }) => assert_eq!(quotient, "Z/2"),
            other => panic!("unexpected {other:?}"),
        }
        let s = GradedSemigroup::new(2, vec![GradedPoint { alpha: vec![1, 0], level: 1 }]).unwrap();
        match s.check_group_generation() {
            Err(Error::NotGroupGenerating { quotient }) => assert_eq!(quotient, "Z^2"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(smith_invariants(vec![vec![2, 4], vec![6, 8]], 2), vec![2, 4]);
    }

    #[test]
    fn lattice_counts_match_dimensions() {
        let p1 = GradedSemigroup::projective(1, 1).unwrap().with_levels(7).unwrap();
        for k in 1..=7 {
            let r = lattice_point_count_check(&p1, k).unwrap();
            assert!(r.ok && r.expected == k as u64 + 1);
        }
        let p2 = GradedSemigroup::projective(2, 1).unwrap().with_levels(6).unwrap();
        for k in 1..=6 {
            let r = lattice_point_count_check(&p2, k).unwrap();
            assert!(r.ok && r.expected == ((k + 1) * (k + 2) / 2) as u64);
        }
        let sq = GradedSemigroup::toric(&[vec![0, 0], vec![1, 0], vec![1, 1], vec![0, 1]]).unwrap().with_levels(2).unwrap();
        assert_eq!(lattice_point_count_check(&sq, 2).unwrap().slice_count, 9);
    }

    #[test]
    fn fill_distance_shrinks() {
        let p2 = GradedSemigroup::projective(2, 1).unwrap().with_levels(16).unwrap();
        let body = okounkov_body(&p2, 16).unwrap().body;
        let d4 = fill_distance(&p2, &body, 4, 25);
        let d16 = fill_distance(&p2, &body, 16, 25);
        assert!(d16 < d4 && d16 <= 1.0 / 16.0);
    }

    #[test]
    fn rescaling_scales_body() {
        let p2 = GradedSemigroup::projective(2, 1).unwrap().with_levels(12).unwrap();
        let r = p2.rescaled(3).unwrap();
        assert_eq!(r.horizon(), 4);
        let body = okounkov_body(&r, 4).unwrap().body;
        assert!(body.approx_eq(&okounkov_body(&p2, 12).unwrap().body.scaled(3.0), 1e-12));
        assert_eq!(lattice_point_count_check(&r, 2).unwrap().expected, 28);
    }
}
