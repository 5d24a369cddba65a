//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracktopo::embedding::PointCloud;
use tracktopo::persistence::{pairwise_distances, DistanceMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points uniform in `[0, 1)^dim`.
pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointCloud {
    let coords = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    PointCloud::from_flat(dim, coords).expect("well-formed cloud")
}

/// Points snapped to a coarse grid, so equal distances and duplicates occur.
pub fn lattice_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointCloud {
    let coords = (0..n * dim).map(|_| f64::from(rng.random_range(0..4u8))).collect();
    PointCloud::from_flat(dim, coords).expect("well-formed cloud")
}

pub fn distances(cloud: &PointCloud) -> DistanceMatrix {
    pairwise_distances(cloud)
}

/// Connected components of the graph with an edge wherever `d(i, j) <= t`,
/// by depth-first search.
pub fn components_at(dist: &DistanceMatrix, t: f64, strict: bool) -> usize {
    let n = dist.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for (v, seen_v) in seen.iter_mut().enumerate() {
                let d = dist.get(u, v);
                let linked = if strict { d < t } else { d <= t };
                if !*seen_v && linked {
                    *seen_v = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Finite H0 deaths from component counts of threshold graphs: at each
/// distinct pairwise distance `t`, `c(< t) - c(<= t)` components die.
pub fn threshold_graph_deaths(dist: &DistanceMatrix) -> Vec<f64> {
    let n = dist.len();
    let mut levels: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| dist.get(i, j))
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut deaths = Vec::new();
    for t in levels {
        let died = components_at(dist, t, true) - components_at(dist, t, false);
        deaths.extend(std::iter::repeat_n(t, died));
    }
    deaths
}

/// Edge weights of a minimum spanning tree by Prim's algorithm, sorted.
pub fn prim_mst_weights(dist: &DistanceMatrix) -> Vec<f64> {
    let n = dist.len();
    if n == 0 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut weights = Vec::with_capacity(n - 1);
    for step in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .expect("a vertex remains");
        in_tree[u] = true;
        if step > 0 {
            weights.push(best[u]);
        }
        for v in 0..n {
            if !in_tree[v] && dist.get(u, v) < best[v] {
                best[v] = dist.get(u, v);
            }
        }
    }
    weights.sort_by(f64::total_cmp);
    weights
}

/// Dimension-1 Rips pairs `(birth, death)` with positive length, by the
/// textbook reduction of the full boundary matrix (vertices, edges and
/// triangles with diameter `<= max_scale`) stored as dense Z/2 columns.
/// Unpaired cycle edges are reported with death `f64::INFINITY`.
pub fn dense_h1_pairs(dist: &DistanceMatrix, max_scale: f64) -> Vec<(f64, f64)> {
    let n = dist.len();
    // (value, dimension, vertices)
    let mut simplices: Vec<(f64, usize, Vec<usize>)> = (0..n).map(|v| (0.0, 0, vec![v])).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if dist.get(i, j) <= max_scale {
                simplices.push((dist.get(i, j), 1, vec![i, j]));
            }
            for k in (j + 1)..n {
                let diam = dist.get(i, j).max(dist.get(i, k)).max(dist.get(j, k));
                if diam <= max_scale {
                    simplices.push((diam, 2, vec![i, j, k]));
                }
            }
        }
    }
    simplices.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let m = simplices.len();
    let position = |verts: &[usize]| {
        simplices
            .iter()
            .position(|s| s.2 == verts)
            .expect("face is in the filtration")
    };
    let mut columns: Vec<Vec<bool>> = simplices
        .iter()
        .map(|s| {
            let mut col = vec![false; m];
            if s.1 > 0 {
                for skip in 0..s.2.len() {
                    let face: Vec<usize> = s.2.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    col[position(&face)] = true;
                }
            }
            col
        })
        .collect();
    let low = |c: &[bool]| c.iter().rposition(|&b| b);
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        while let Some(l) = low(&columns[j]) {
            match owner[l] {
                Some(k) => {
                    let other = columns[k].clone();
                    for (a, b) in columns[j].iter_mut().zip(other) {
                        *a ^= b;
                    }
                }
                None => {
                    owner[l] = Some(j);
                    break;
                }
            }
        }
    }
    let mut pairs = Vec::new();
    for (i, s) in simplices.iter().enumerate() {
        if s.1 != 1 || low(&columns[i]).is_some() {
            continue; // not an edge, or a destroyer of a component
        }
        match owner[i] {
            Some(t) => {
                if simplices[t].0 > s.0 {
                    pairs.push((s.0, simplices[t].0));
                }
            }
            None => pairs.push((s.0, f64::INFINITY)),
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs
}

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals.is_multiple_of(2));
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

pub fn gaussian_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Exhaustive false-nearest-neighbor fraction: for every point of the
/// `dim`-dimensional embedding that has a `(dim + 1)`-th coordinate, find
/// the nearest other such point by full distance scan and test the ratio
/// of the extra-coordinate gap to that distance against `rtol`.
pub fn fnn_oracle(series: &[f64], tau: usize, dim: usize, rtol: f64) -> f64 {
    let m = series.len() - dim * tau;
    let vec_at = |n: usize| -> Vec<f64> { (0..dim).map(|k| series[n + k * tau]).collect() };
    let mut false_count = 0;
    for i in 0..m {
        let vi = vec_at(i);
        let (nn, r) = (0..m)
            .filter(|&j| j != i)
            .map(|j| {
                let d = vi.iter().zip(vec_at(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                (j, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("at least two points");
        let gap = (series[i + dim * tau] - series[nn + dim * tau]).abs();
        if (r > 0.0 && gap / r > rtol) || (r == 0.0 && gap > 0.0) {
            false_count += 1;
        }
    }
    false_count as f64 / m as f64
}

pub fn assert_close_sorted(mut a: Vec<f64>, mut b: Vec<f64>, tol: f64) {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert_eq!(a.len(), b.len(), "multiset sizes differ: {a:?} vs {b:?}");
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= tol, "{x} vs {y}\n{a:?}\n{b:?}");
    }
}

/// Histogram mutual information between `z[n]` and `z[n + tau]` from a
/// sparse map of joint bin counts.
pub fn mi_oracle(z: &[f64], tau: usize, bins: usize) -> f64 {
    use std::collections::HashMap;
    let lo = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bin = |v: f64| {
        let b = ((v - lo) / (hi - lo) * bins as f64).floor() as usize;
        b.min(bins - 1)
    };
    let pairs = z.len() - tau;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut left: HashMap<usize, f64> = HashMap::new();
    let mut right: HashMap<usize, f64> = HashMap::new();
    for n in 0..pairs {
        let (a, b) = (bin(z[n]), bin(z[n + tau]));
        *joint.entry((a, b)).or_default() += 1.0;
        *left.entry(a).or_default() += 1.0;
        *right.entry(b).or_default() += 1.0;
    }
    let total = pairs as f64;
    let mut keys: Vec<_> = joint.keys().copied().collect();
    keys.sort();
    keys.iter()
        .map(|k| {
            let p = joint[k] / total;
            p * (p / ((left[&k.0] / total) * (right[&k.1] / total))).ln()
        })
        .sum::<f64>()
        .max(0.0)
}
