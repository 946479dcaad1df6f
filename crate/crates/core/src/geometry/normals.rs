use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{GeometryError, PointCloud, SpatialIndex};

/// Normals estimated leniently, with the points whose neighborhoods were
/// degenerate.
#[derive(Debug, Clone)]
pub struct NormalEstimate {
    pub cloud: PointCloud,
    pub degenerate: Vec<usize>,
}

/// PCA normals over the `k` nearest neighbors (the point included), oriented
/// consistently by propagation along a minimum spanning tree of the k-NN graph.
/// Fails on the first degenerate neighborhood.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud, GeometryError> {
    let est = estimate_normals_lenient(cloud, k)?;
    match est.degenerate.first() {
        Some(&i) => Err(GeometryError::DegenerateNeighborhood(i)),
        None => Ok(est.cloud),
    }
}

/// Like [`estimate_normals`] but reports degenerate neighborhoods instead of
/// failing. Their normals are still the smallest principal direction.
pub fn estimate_normals_lenient(
    cloud: &PointCloud,
    k: usize,
) -> Result<NormalEstimate, GeometryError> {
    if k < 3 || k >= cloud.len() {
        return Err(GeometryError::InvalidArgument(format!(
            "normal estimation needs 3 <= k < point count, got k={k} for {} points",
            cloud.len()
        )));
    }
    let dim = cloud.dim();
    let index = SpatialIndex::new(cloud);
    let n = cloud.len();
    let mut normals = vec![0.0; n * dim];
    let mut neighbors = Vec::with_capacity(n);
    let mut degenerate = Vec::new();
    for i in 0..n {
        let knn = index.k_nearest(cloud.point(i), k)?;
        let mut mean = vec![0.0; dim];
        for &(j, _) in &knn {
            for d in 0..dim {
                mean[d] += cloud.point(j)[d] / k as f64;
            }
        }
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for &(j, _) in &knn {
            let p = cloud.point(j);
            for a in 0..dim {
                for b in 0..dim {
                    cov[(a, b)] += (p[a] - mean[a]) * (p[b] - mean[b]);
                }
            }
        }
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let largest = eig.eigenvalues[order[dim - 1]];
        // The tangent space needs rank dim - 1.
        let second = eig.eigenvalues[order[1]];
        if largest <= 0.0 || second <= 1e-12 * largest {
            degenerate.push(i);
        }
        let v = eig.eigenvectors.column(order[0]);
        let len = v.norm();
        for d in 0..dim {
            normals[i * dim + d] = v[d] / len;
        }
        neighbors.push(knn.into_iter().map(|(j, _)| j).filter(|&j| j != i).collect::<Vec<_>>());
    }
    orient(&mut normals, dim, cloud, &neighbors);
    Ok(NormalEstimate {
        cloud: cloud.clone().with_normals(normals)?,
        degenerate,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Prim's algorithm over the symmetrized k-NN graph with edge weight
/// `1 - |n_i · n_j|`, flipping each newly reached normal to agree with its
/// parent. Each component is seeded at its highest point, oriented upward.
fn orient(normals: &mut [f64], dim: usize, cloud: &PointCloud, neighbors: &[Vec<usize>]) {
    let n = cloud.len();
    let mut adjacency: Vec<Vec<usize>> = neighbors.to_vec();
    for (i, list) in neighbors.iter().enumerate() {
        for &j in list {
            adjacency[j].push(i);
        }
    }
    for list in adjacency.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let up = dim - 1;
    let mut by_height: Vec<usize> = (0..n).collect();
    by_height.sort_by(|&a, &b| {
        cloud.point(b)[up]
            .total_cmp(&cloud.point(a)[up])
            .then(a.cmp(&b))
    });
    let mut visited = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &root in &by_height {
        if visited[root] {
            continue;
        }
        if normals[root * dim + up] < 0.0 {
            for v in &mut normals[root * dim..(root + 1) * dim] {
                *v = -*v;
            }
        }
        visited[root] = true;
        push_edges(root, &adjacency, normals, dim, &visited, &mut heap);
        while let Some(Reverse((_, to, from))) = heap.pop() {
            if visited[to] {
                continue;
            }
            visited[to] = true;
            let agree = dot(
                &normals[from * dim..(from + 1) * dim],
                &normals[to * dim..(to + 1) * dim],
            );
            if agree < 0.0 {
                for v in &mut normals[to * dim..(to + 1) * dim] {
                    *v = -*v;
                }
            }
            push_edges(to, &adjacency, normals, dim, &visited, &mut heap);
        }
    }
}

type Edge = Reverse<(OrdF64, usize, usize)>;

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn push_edges(
    from: usize,
    adjacency: &[Vec<usize>],
    normals: &[f64],
    dim: usize,
    visited: &[bool],
    heap: &mut BinaryHeap<Edge>,
) {
    let nf = &normals[from * dim..(from + 1) * dim];
    for &to in &adjacency[from] {
        if !visited[to] {
            let w = 1.0 - dot(nf, &normals[to * dim..(to + 1) * dim]).abs();
            heap.push(Reverse((OrdF64(w), to, from)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn plane_normals_point_up() {
        let coords: Vec<f64> = (0..100)
            .flat_map(|i| [(i % 10) as f64 * 0.1, (i / 10) as f64 * 0.13 + 0.01 * (i % 3) as f64, 0.0])
            .collect();
        let cloud = PointCloud::new(3, coords).unwrap();
        let with = estimate_normals(&cloud, 8).unwrap();
        for i in 0..with.len() {
            let n = with.normal(i).unwrap();
            assert!(n[0].abs() < 1e-6 && n[1].abs() < 1e-6);
            assert!((n[2] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sphere_normals_are_radial_and_outward() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut coords = Vec::new();
        for _ in 0..2000 {
            let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            coords.extend(v.iter().map(|x| x / len));
        }
        let cloud = PointCloud::new(3, coords).unwrap();
        let with = estimate_normals(&cloud, 20).unwrap();
        let mut radial = 0;
        let mut outward = 0;
        for i in 0..with.len() {
            let d = dot(with.point(i), with.normal(i).unwrap());
            radial += (d.abs() > 0.99) as usize;
            outward += (d > 0.0) as usize;
        }
        assert!(radial as f64 >= 0.95 * 2000.0, "{radial}");
        assert_eq!(outward, 2000);
    }

    #[test]
    fn precondition_errors() {
        let cloud = PointCloud::new(3, (0..30).map(|i| (i * i % 7) as f64).collect()).unwrap();
        assert!(estimate_normals(&cloud, 2).is_err());
        assert!(estimate_normals(&cloud, 10).is_err());
    }

    #[test]
    fn collinear_neighborhood_is_degenerate() {
        let coords: Vec<f64> = (0..10).flat_map(|i| [i as f64, 2.0 * i as f64, 0.0]).collect();
        let cloud = PointCloud::new(3, coords).unwrap();
        assert!(matches!(
            estimate_normals(&cloud, 4),
            Err(GeometryError::DegenerateNeighborhood(0))
        ));
        let est = estimate_normals_lenient(&cloud, 4).unwrap();
        assert_eq!(est.degenerate.len(), 10);
    }

    #[test]
    fn circle_normals_in_2d() {
        let coords: Vec<f64> = (0..200)
            .flat_map(|i| {
                let t = i as f64 / 200.0 * std::f64::consts::TAU;
                [t.cos(), t.sin()]
            })
            .collect();
        let cloud = PointCloud::new(2, coords).unwrap();
        let with = estimate_normals(&cloud, 5).unwrap();
        for i in 0..with.len() {
            assert!(dot(with.point(i), with.normal(i).unwrap()) > 0.999);
        }
    }
}
