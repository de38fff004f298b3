//! Leja sequences with coordinate polish, and transfinite-diameter ladders.

use num_complex::Complex64;
use serde::Serialize;

use super::{CompactSet, SetDescriptor};
use crate::error::{Error, Result};
use crate::scalar::least_squares;

const POLISH_SWEEPS: usize = 200;

/// `k` near-Fekete points drawn from a discretization, with `ln d_k = Σ_{i<j} ln|x_i − x_j|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeketePoints {
    pub k: usize,
    pub points: Vec<Complex64>,
    pub ln_d_greedy: f64,
    pub ln_d: f64,
    pub sweeps: usize,
}

fn ln_d(points: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..points.len() {
        for j in 0..i {
            s += (points[i] - points[j]).norm().ln();
        }
    }
    s
}

fn argmax(u: &[f64]) -> usize {
    u.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap()
}

/// Greedy Leja sequence started at the node of largest modulus, then coordinate ascent:
/// each point in turn moves to the node maximizing its potential against the others,
/// until a full sweep changes nothing.
pub fn leja_fekete(set: &CompactSet, k: usize) -> Result<FeketePoints> {
    if k < 2 {
        return Err(Error::Input("Fekete configurations need k ≥ 2".into()));
    }
    let nodes = &set.points;
    if nodes.len() < k {
        return Err(Error::Input(format!("{} nodes cannot hold {k} distinct points", nodes.len())));
    }
    // Potential of each node against the chosen points, split into the finite part and
    // the number of chosen points sitting on the node (where the potential is −∞).
    let pot = |z: Complex64, x: Complex64| {
        let d = (z - x).norm();
        if d > 0.0 { d.ln() } else { 0.0 }
    };
    let mut finite = vec![0.0; nodes.len()];
    let mut hits = vec![0usize; nodes.len()];
    let add = |finite: &mut [f64], hits: &mut [usize], at: usize, sign: f64| {
        for (i, (f, z)) in finite.iter_mut().zip(nodes).enumerate() {
            *f += sign * pot(*z, nodes[at]);
            if i == at {
                if sign > 0.0 { hits[i] += 1 } else { hits[i] -= 1 }
            }
        }
    };
    let best_node = |finite: &[f64], hits: &[usize]| -> usize {
        (0..nodes.len()).filter(|&i| hits[i] == 0).max_by(|&a, &b| finite[a].total_cmp(&finite[b])).unwrap()
    };
    let start = argmax(&nodes.iter().map(|z| z.norm()).collect::<Vec<_>>());
    let mut chosen = vec![start];
    add(&mut finite, &mut hits, start, 1.0);
    while chosen.len() < k {
        let next = best_node(&finite, &hits);
        chosen.push(next);
        add(&mut finite, &mut hits, next, 1.0);
    }
    let greedy: Vec<Complex64> = chosen.iter().map(|&i| nodes[i]).collect();
    let ln_d_greedy = ln_d(&greedy);

    let mut sweeps = 0;
    for _ in 0..POLISH_SWEEPS {
        sweeps += 1;
        let mut moved = false;
        for slot in 0..k {
            let old = chosen[slot];
            add(&mut finite, &mut hits, old, -1.0);
            let cand = best_node(&finite, &hits);
            let new = if finite[cand] > finite[old] + 1e-12 * finite[old].abs().max(1.0) { cand } else { old };
            if new != old {
                moved = true;
                chosen[slot] = new;
            }
            add(&mut finite, &mut hits, new, 1.0);
        }
        if !moved {
            break;
        }
    }
    let points: Vec<Complex64> = chosen.iter().map(|&i| nodes[i]).collect();
    let ln_d = ln_d(&points);
    Ok(FeketePoints { k, points, ln_d_greedy, ln_d, sweeps })
}

/// Ladder of `T_k^{1/binom(k,2)}` with an extrapolated limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransfiniteReport {
    pub k: Vec<usize>,
    pub ln_d: Vec<f64>,
    pub root: Vec<f64>,
    pub last: f64,
    pub limit: f64,
    /// Fewer distinct points than the ladder asks for.
    pub degenerate: bool,
    pub convention: String,
    pub warnings: Vec<String>,
}

/// Node count used for `k` Fekete points.
fn resolution_for(descriptor: &SetDescriptor, k: usize) -> usize {
    match descriptor {
        SetDescriptor::Interval { .. } => 32 * k,
        _ => 64 * k,
    }
}

/// `ln T_k / binom(k,2) ≈ L + a ln k/(k−1) + b/(k−1)` fitted over the upper half of `2..=k_max`.
pub fn transfinite_diameter(descriptor: &SetDescriptor, k_max: usize) -> Result<TransfiniteReport> {
    if k_max < 2 {
        return Err(Error::Input("transfinite ladder needs k_max ≥ 2".into()));
    }
    use rayon::prelude::*;
    let cloud_size = match descriptor {
        SetDescriptor::Cloud { .. } => Some(CompactSet::new(descriptor.clone(), 1)?.len()),
        _ => None,
    };
    let top = cloud_size.map_or(k_max, |n| n.min(k_max));
    let degenerate = top < k_max;
    let ks: Vec<usize> = (2..=top).collect();
    let ln_ds: Vec<f64> = ks
        .par_iter()
        .map(|&k| leja_fekete(&CompactSet::new(descriptor.clone(), resolution_for(descriptor, k))?, k).map(|f| f.ln_d))
        .collect::<Result<_>>()?;
    let y: Vec<f64> = ks.iter().zip(&ln_ds).map(|(&k, l)| l / (k * (k - 1) / 2) as f64).collect();
    let mut warnings = Vec::new();
    let last = y.last().copied().unwrap_or(f64::NAN);
    let limit = if degenerate {
        warnings.push(format!("only {top} distinct points: T_k undefined past k = {top}"));
        f64::NAN
    } else {
        let lo = ks.len() / 2;
        let rows: Vec<Vec<f64>> =
            ks[lo..].iter().map(|&k| vec![1.0, (k as f64).ln() / (k - 1) as f64, 1.0 / (k - 1) as f64]).collect();
        match least_squares(&rows, &y[lo..]) {
            Some(c) if rows.len() >= 4 => c[0],
            _ => {
                warnings.push("ladder too short to extrapolate".into());
                last
            }
        }
    };
    Ok(TransfiniteReport {
        k: ks,
        ln_d: ln_ds,
        root: y.iter().map(|v| v.exp()).collect(),
        last: last.exp(),
        limit: limit.exp(),
        degenerate,
        convention: "T_k = max over k points of prod_{i<j}|x_i - x_j|, normalized by the exponent binom(k,2)".into(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(n: usize) -> CompactSet {
        CompactSet::new(SetDescriptor::Interval { a: -1.0, b: 1.0 }, n).unwrap()
    }

    #[test]
    fn small_interval_configurations() {
        let f2 = leja_fekete(&interval(64), 2).unwrap();
        assert!((f2.ln_d - 2f64.ln()).abs() < 1e-15);
        let f3 = leja_fekete(&interval(64), 3).unwrap();
        assert!((f3.ln_d - 2f64.ln()).abs() < 1e-12);
        let mut xs: Vec<f64> = f3.points.iter().map(|z| z.re).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] + 1.0).abs() < 1e-15 && xs[1].abs() < 1e-15 && (xs[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn roots_of_unity_on_circle() {
        for k in [2, 3, 5, 8, 13] {
            let set = CompactSet::new(SetDescriptor::Circle { r: 1.0, center: [0.0, 0.0] }, 64 * k).unwrap();
            let f = leja_fekete(&set, k).unwrap();
            let exact = k as f64 / 2.0 * (k as f64).ln();
            assert!((f.ln_d - exact).abs() < 1e-9, "{k}: {} vs {exact}", f.ln_d);
        }
    }

    fn brute_force(nodes: &[Complex64], k: usize) -> f64 {
        fn rec(nodes: &[Complex64], k: usize, from: usize, cur: &mut Vec<Complex64>, best: &mut f64) {
            if cur.len() == k {
                *best = best.max(ln_d(cur));
                return;
            }
            for i in from..nodes.len() {
                cur.push(nodes[i]);
                rec(nodes, k, i + 1, cur, best);
                cur.pop();
            }
        }
        let mut best = f64::NEG_INFINITY;
        rec(nodes, k, 0, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn leja_bounded_by_brute_force() {
        let sets = [
            interval(16),
            CompactSet::new(SetDescriptor::Circle { r: 1.0, center: [0.0, 0.0] }, 14).unwrap(),
            CompactSet::new(
                SetDescriptor::Cloud {
                    points: (0..15).map(|i| [((i * 7) % 11) as f64 / 5.0, ((i * 3) % 5) as f64 / 4.0]).collect(),
                },
                1,
            )
            .unwrap(),
        ];
        for set in &sets {
            for k in 2..=6 {
                let f = leja_fekete(set, k).unwrap();
                let bf = brute_force(&set.points, k);
                assert!(f.ln_d_greedy <= f.ln_d + 1e-12);
                assert!(f.ln_d <= bf + 1e-12, "{k}");
            }
        }
    }

    #[test]
    fn transfinite_limits() {
        let d = transfinite_diameter(&SetDescriptor::Disc { r: 1.0, center: [0.0, 0.0] }, 24).unwrap();
        assert!((d.limit - 1.0).abs() < 0.01, "{}", d.limit);
        let i = transfinite_diameter(&SetDescriptor::Interval { a: -1.0, b: 1.0 }, 40).unwrap();
        assert!((i.limit - 0.5).abs() < 0.02, "{}", i.limit);
        let two = transfinite_diameter(&SetDescriptor::Cloud { points: vec![[-1.0, 0.0], [1.0, 0.0]] }, 5).unwrap();
        assert!(two.degenerate && two.limit.is_nan());
        assert!((two.ln_d[0] - 2f64.ln()).abs() < 1e-15);
    }
}
