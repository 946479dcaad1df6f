use chartfit::geometry::{
    chamfer, chamfer_with, grid_to_mesh, marching_cubes, procedural_shape, sample_mesh,
    sample_mesh_with_faces, PointCloud, Reduction, ScalarGrid, ShapeKind, ShapeParams,
    SpatialIndex,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointCloud {
    PointCloud::new(dim, (0..n * dim).map(|_| rng.random::<f64>()).collect()).unwrap()
}

#[test]
fn chamfer_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let h = 1e-6;
    for trial in 0..10 {
        let dim = if trial % 2 == 0 { 3 } else { 2 };
        let a = random_cloud(&mut rng, 40, dim);
        let b = random_cloud(&mut rng, 55, dim);
        for reduction in [Reduction::Mean, Reduction::Sum] {
            let res = chamfer_with(&a, &b, reduction).unwrap();
            let mut num = Vec::new();
            for i in 0..a.coords().len() {
                let mut plus = a.coords().to_vec();
                plus[i] += h;
                let mut minus = a.coords().to_vec();
                minus[i] -= h;
                let lp = chamfer_with(&PointCloud::new(dim, plus).unwrap(), &b, reduction)
                    .unwrap()
                    .value;
                let lm = chamfer_with(&PointCloud::new(dim, minus).unwrap(), &b, reduction)
                    .unwrap()
                    .value;
                num.push((lp - lm) / (2.0 * h));
            }
            let diff: f64 = res.grad.iter().zip(&num).map(|(x, y)| (x - y).powi(2)).sum();
            let norm: f64 = num.iter().map(|x| x * x).sum();
            assert!(diff.sqrt() / norm.sqrt() < 1e-3, "trial {trial}");
        }
    }
}

#[test]
fn chamfer_of_sampled_sphere_shrinks_with_density() {
    let sphere = procedural_shape(ShapeKind::Sphere, &ShapeParams::default_for(ShapeKind::Sphere))
        .unwrap();
    let small = chamfer(
        &sample_mesh(&sphere, 1000, 1).unwrap(),
        &sample_mesh(&sphere, 1000, 2).unwrap(),
    )
    .unwrap()
    .value;
    let large = chamfer(
        &sample_mesh(&sphere, 4000, 3).unwrap(),
        &sample_mesh(&sphere, 4000, 4).unwrap(),
    )
    .unwrap()
    .value;
    // Nearest-neighbor spacing squared scales like 1/n on a surface.
    assert!(large < 0.4 * small, "{large} vs {small}");
}

#[test]
fn index_agrees_with_scan_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.random_range(1..200);
        let cloud = random_cloud(&mut rng, n, 3);
        let index = SpatialIndex::new(&cloud);
        for _ in 0..20 {
            let q: Vec<f64> = (0..3).map(|_| rng.random_range(-0.2..1.2)).collect();
            let mut best = (0, f64::INFINITY);
            for (i, p) in cloud.points().enumerate() {
                let d: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best.1 {
                    best = (i, d);
                }
            }
            assert_eq!(index.nearest(&q).unwrap(), best);
        }
    }
}

#[test]
fn square_sampling_density_is_uniform() {
    let square = grid_to_mesh(
        &[[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]],
        2,
    )
    .unwrap();
    let n = 64000;
    let (cloud, _) = sample_mesh_with_faces(&square, n, 5).unwrap();
    let mut hist = [0usize; 16];
    for p in cloud.points() {
        let i = ((p[0] * 4.0) as usize).min(3);
        let j = ((p[1] * 4.0) as usize).min(3);
        hist[4 * i + j] += 1;
    }
    let expected = n as f64 / 16.0;
    let sd = (n as f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
    for count in hist {
        assert!((count as f64 - expected).abs() < 4.0 * sd, "{hist:?}");
    }
}

#[test]
fn sphere_isosurface_stays_near_radius() {
    let n = 64;
    let h = 1.0 / (n - 1) as f64;
    let grid = ScalarGrid::from_fn([n, n, n], [0.0; 3], h, |p| {
        ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2)).sqrt() - 0.4
    })
    .unwrap();
    let mesh = marching_cubes(&grid, 0.0);
    assert!(mesh.faces.len() > 1000);
    assert_eq!(mesh.component_count(), 1);
    for v in &mesh.vertices {
        let r = ((v[0] - 0.5).powi(2) + (v[1] - 0.5).powi(2) + (v[2] - 0.5).powi(2)).sqrt();
        assert!((r - 0.4).abs() < 2.0 * h);
    }
}
