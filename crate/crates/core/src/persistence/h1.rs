use super::h0::UnionFind;
use super::{DistanceMatrix, PersistenceDiagram, PersistenceError, PersistencePair};

pub const DEFAULT_H1_POINT_CAP: usize = 400;

/// Dimension-1 barcode of the Rips filtration truncated at `max_scale`.
///
/// Edges and triangles with diameter `<= max_scale` are ordered by diameter
/// (ties lexicographic on vertex indices). Triangle boundary columns are
/// reduced over Z/2; each nonzero reduced column pairs its lowest edge
/// (birth) with the triangle (death). Edges that close a cycle but are never
/// paired are reported as essential at the cutoff. Zero-length bars are
/// dropped.
pub fn vr_persistence_h1(
    dist: &DistanceMatrix,
    max_scale: f64,
    point_cap: usize,
) -> Result<PersistenceDiagram, PersistenceError> {
    if !(max_scale.is_finite() && max_scale >= 0.0) {
        return Err(PersistenceError::InvalidScale(max_scale));
    }
    let n = dist.len();
    if n > point_cap {
        return Err(PersistenceError::CapExceeded { n, cap: point_cap });
    }
    if n < 3 {
        return Ok(PersistenceDiagram::new(1, Vec::new()));
    }

    let edges: Vec<(f64, usize, usize)> = dist
        .sorted_edges()
        .into_iter()
        .take_while(|e| e.0 <= max_scale)
        .collect();
    let mut edge_index = vec![u32::MAX; n * n];
    for (k, &(_, i, j)) in edges.iter().enumerate() {
        edge_index[i * n + j] = k as u32;
    }

    // edges that merge components never create cycles
    let mut creates_cycle = vec![false; edges.len()];
    let mut uf = UnionFind::new(n);
    for (k, &(_, i, j)) in edges.iter().enumerate() {
        creates_cycle[k] = !uf.union(i, j);
    }

    let mut triangles: Vec<(f64, [u32; 3])> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = dist.get(i, j);
            if dij > max_scale {
                continue;
            }
            for k in (j + 1)..n {
                let diam = dij.max(dist.get(i, k)).max(dist.get(j, k));
                if diam <= max_scale {
                    let mut col = [
                        edge_index[i * n + j],
                        edge_index[i * n + k],
                        edge_index[j * n + k],
                    ];
                    col.sort_unstable();
                    triangles.push((diam, col));
                }
            }
        }
    }
    // stable: equal diameters keep (i, j, k) order
    triangles.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut pivot_owner: Vec<Option<usize>> = vec![None; edges.len()];
    let mut reduced: Vec<Vec<u32>> = Vec::with_capacity(triangles.len());
    let mut killed = vec![false; edges.len()];
    let mut pairs = Vec::new();

    for (diam, boundary) in &triangles {
        let mut col: Vec<u32> = boundary.to_vec();
        while let Some(&low) = col.last() {
            match pivot_owner[low as usize] {
                Some(other) => col = symmetric_difference(&col, &reduced[other]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            let low = low as usize;
            pivot_owner[low] = Some(reduced.len());
            killed[low] = true;
            let birth = edges[low].0;
            if *diam > birth {
                pairs.push(PersistencePair { birth, death: *diam });
            }
        }
        reduced.push(col);
    }

    for (k, &(w, _, _)) in edges.iter().enumerate() {
        if creates_cycle[k] && !killed[k] {
            pairs.push(PersistencePair {
                birth: w,
                death: f64::INFINITY,
            });
        }
    }
    Ok(PersistenceDiagram::new(1, pairs))
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
