//! Implicit balanced k-d tree.
//!
//! Points are stored in tree order: the node covering `[lo, hi)` sits at
//! `mid = (lo + hi) / 2`, its left subtree at `[lo, mid)` and right subtree at
//! `[mid + 1, hi)`. Ties in distance resolve to the lowest original index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{squared_distance, GeometryError, PointCloud};

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    dim: usize,
    /// Coordinates in tree order.
    coords: Vec<f64>,
    /// Original index of each tree slot.
    ids: Vec<usize>,
    /// Split axis of each tree slot.
    axes: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    id: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.id.cmp(&other.id))
    }
}

impl SpatialIndex {
    pub fn new(cloud: &PointCloud) -> Self {
        Self::from_coords(cloud.dim(), cloud.coords())
    }

    /// Builds from flat `dim`-vectors.
    pub fn from_coords(dim: usize, coords: &[f64]) -> Self {
        let n = coords.len() / dim;
        let mut ids: Vec<usize> = (0..n).collect();
        let mut axes = vec![0u8; n];
        build(coords, dim, &mut ids, &mut axes);
        let mut sorted = Vec::with_capacity(coords.len());
        for &i in &ids {
            sorted.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
        }
        Self {
            dim,
            coords: sorted,
            ids,
            axes,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nearest indexed point to `q` as `(index, squared distance)`.
    pub fn nearest(&self, q: &[f64]) -> Result<(usize, f64), GeometryError> {
        if self.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        if q.len() != self.dim {
            return Err(GeometryError::DimensionMismatch(q.len(), self.dim));
        }
        let mut best = Candidate {
            dist: f64::INFINITY,
            id: usize::MAX,
        };
        self.nearest_in(q, 0, self.len(), &mut best);
        Ok((best.id, best.dist))
    }

    fn nearest_in(&self, q: &[f64], lo: usize, hi: usize, best: &mut Candidate) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let p = &self.coords[mid * self.dim..(mid + 1) * self.dim];
        let c = Candidate {
            dist: squared_distance(p, q),
            id: self.ids[mid],
        };
        if c < *best {
            *best = c;
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.nearest_in(q, near.0, near.1, best);
        if diff * diff <= best.dist {
            self.nearest_in(q, far.0, far.1, best);
        }
    }

    /// The `k` nearest indexed points in ascending `(distance, index)` order.
    pub fn k_nearest(&self, q: &[f64], k: usize) -> Result<Vec<(usize, f64)>, GeometryError> {
        if q.len() != self.dim {
            return Err(GeometryError::DimensionMismatch(q.len(), self.dim));
        }
        let k = k.min(self.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.k_nearest_in(q, k, 0, self.len(), &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        Ok(out.into_iter().map(|c| (c.id, c.dist)).collect())
    }

    fn k_nearest_in(
        &self,
        q: &[f64],
        k: usize,
        lo: usize,
        hi: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let p = &self.coords[mid * self.dim..(mid + 1) * self.dim];
        let c = Candidate {
            dist: squared_distance(p, q),
            id: self.ids[mid],
        };
        if heap.len() < k {
            heap.push(c);
        } else if c < *heap.peek().unwrap() {
            heap.pop();
            heap.push(c);
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.k_nearest_in(q, k, near.0, near.1, heap);
        if heap.len() < k || diff * diff <= heap.peek().unwrap().dist {
            self.k_nearest_in(q, k, far.0, far.1, heap);
        }
    }
}

fn build(coords: &[f64], dim: usize, ids: &mut [usize], axes: &mut [u8]) {
    if ids.len() <= 1 {
        if let Some(a) = axes.first_mut() {
            *a = 0;
        }
        return;
    }
    // Split on the axis of largest spread.
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in ids.iter() {
        for d in 0..dim {
            let v = coords[i * dim + d];
            lo[d] = lo[d].min(v);
            hi[d] = hi[d].max(v);
        }
    }
    let axis = (0..dim)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(0);
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| {
        coords[a * dim + axis]
            .total_cmp(&coords[b * dim + axis])
            .then(a.cmp(&b))
    });
    axes[mid] = axis as u8;
    let (left, rest) = ids.split_at_mut(mid);
    let (axes_left, axes_rest) = axes.split_at_mut(mid);
    build(coords, dim, left, axes_left);
    build(coords, dim, &mut rest[1..], &mut axes_rest[1..]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_nearest(coords: &[f64], dim: usize, q: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            let d = squared_distance(p, q);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    #[test]
    fn single_point() {
        let idx = SpatialIndex::from_coords(3, &[1.0, 2.0, 3.0]);
        assert_eq!(idx.nearest(&[1.0, 2.0, 4.0]).unwrap(), (0, 1.0));
        assert_eq!(idx.nearest(&[1.0, 2.0, 3.0]).unwrap(), (0, 0.0));
    }

    #[test]
    fn empty_index_errors() {
        let idx = SpatialIndex::from_coords(2, &[]);
        assert!(idx.nearest(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn matches_linear_scan_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coords: Vec<f64> = (0..3000).map(|_| rng.random::<f64>()).collect();
        let idx = SpatialIndex::from_coords(3, &coords);
        for _ in 0..1000 {
            let q = [rng.random(), rng.random(), rng.random()];
            assert_eq!(idx.nearest(&q).unwrap(), brute_nearest(&coords, 3, &q));
        }
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        // Four corners of a square, query at the center.
        let coords = [1.0, 1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0];
        let idx = SpatialIndex::from_coords(2, &coords);
        assert_eq!(idx.nearest(&[0.0, 0.0]).unwrap(), (0, 2.0));
        let knn = idx.k_nearest(&[1.0, 1.0], 2).unwrap();
        assert_eq!(knn, vec![(0, 0.0), (4, 0.0)]);
    }

    proptest! {
        #[test]
        fn nearest_equals_linear_scan(
            pts in prop::collection::vec(prop::array::uniform2(-4i32..4), 1..60),
            q in prop::array::uniform2(-5i32..5),
        ) {
            // Integer lattice coordinates create many exact ties.
            let coords: Vec<f64> = pts.iter().flatten().map(|&v| v as f64 * 0.5).collect();
            let q = [q[0] as f64 * 0.5, q[1] as f64 * 0.5];
            let idx = SpatialIndex::from_coords(2, &coords);
            prop_assert_eq!(idx.nearest(&q).unwrap(), brute_nearest(&coords, 2, &q));
        }

        #[test]
        fn k_nearest_equals_sorted_scan(
            pts in prop::collection::vec(prop::array::uniform3(-3i32..3), 1..50),
            q in prop::array::uniform3(-3i32..3),
            k in 1usize..8,
        ) {
            let coords: Vec<f64> = pts.iter().flatten().map(|&v| v as f64).collect();
            let q = [q[0] as f64, q[1] as f64, q[2] as f64];
            let idx = SpatialIndex::from_coords(3, &coords);
            let mut all: Vec<(usize, f64)> = coords
                .chunks_exact(3)
                .enumerate()
                .map(|(i, p)| (i, squared_distance(p, &q)))
                .collect();
            all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            all.truncate(k);
            prop_assert_eq!(idx.k_nearest(&q, k).unwrap(), all);
        }
    }
}
