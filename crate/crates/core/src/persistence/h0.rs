use super::{DistanceMatrix, PersistenceDiagram, PersistencePair};

/// Disjoint-set forest with path halving and union by size.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merge the sets of `a` and `b`; false if they were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Dimension-0 barcode of the Rips filtration.
///
/// Every vertex is born at 0. Edges are processed by increasing weight (ties
/// in `(i, j)` order); each edge joining two components kills one of them at
/// its weight, so the finite deaths are exactly the minimum spanning tree
/// weights. The last surviving component is reported as `(0, inf)`.
/// Zero-length bars from coincident points are kept.
pub fn vr_persistence_h0(dist: &DistanceMatrix) -> PersistenceDiagram {
    let n = dist.len();
    let mut pairs = Vec::with_capacity(n);
    if n > 1 {
        let mut uf = UnionFind::new(n);
        let mut merges = 0;
        for (w, i, j) in dist.sorted_edges() {
            if uf.union(i, j) {
                pairs.push(PersistencePair { birth: 0.0, death: w });
                merges += 1;
                if merges == n - 1 {
                    break;
                }
            }
        }
    }
    if n > 0 {
        pairs.push(PersistencePair {
            birth: 0.0,
            death: f64::INFINITY,
        });
    }
    PersistenceDiagram::new(0, pairs)
}
