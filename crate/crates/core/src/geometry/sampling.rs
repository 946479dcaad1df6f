use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use super::mesh::{is_degenerate, norm, sub, triangle_area};
use super::{GeometryError, PointCloud, TriangleMesh};

/// `n` points sampled uniformly by area over the faces, or by length over the
/// segments when the mesh has no faces.
pub fn sample_mesh(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud, GeometryError> {
    sample_mesh_with_faces(mesh, n, seed).map(|(cloud, _)| cloud)
}

/// Like [`sample_mesh`], also returning the face (or segment) index of each
/// sample.
pub fn sample_mesh_with_faces(
    mesh: &TriangleMesh,
    n: usize,
    seed: u64,
) -> Result<(PointCloud, Vec<usize>), GeometryError> {
    let v = &mesh.vertices;
    let weights: Vec<f64> = if mesh.faces.is_empty() {
        mesh.segments
            .iter()
            .map(|s| norm(&sub(&v[s[1]], &v[s[0]])))
            .collect()
    } else {
        let w: Vec<f64> = mesh
            .faces
            .iter()
            .map(|f| {
                let (a, b, c) = (&v[f[0]], &v[f[1]], &v[f[2]]);
                if is_degenerate(a, b, c) {
                    0.0
                } else {
                    triangle_area(a, b, c)
                }
            })
            .collect();
        if w.iter().all(|&x| x == 0.0) {
            return Err(GeometryError::DegenerateMesh);
        }
        w
    };
    if n == 0 {
        return Ok((PointCloud::new(3, Vec::new())?, Vec::new()));
    }
    let picker = WeightedIndex::new(&weights).map_err(|_| GeometryError::DegenerateMesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(3 * n);
    let mut hits = Vec::with_capacity(n);
    for _ in 0..n {
        let e = picker.sample(&mut rng);
        hits.push(e);
        if mesh.faces.is_empty() {
            let s = mesh.segments[e];
            let t: f64 = rng.random();
            let (a, b) = (&v[s[0]], &v[s[1]]);
            coords.extend((0..3).map(|d| a[d] + t * (b[d] - a[d])));
        } else {
            let f = mesh.faces[e];
            let (mut r1, mut r2): (f64, f64) = (rng.random(), rng.random());
            if r1 + r2 > 1.0 {
                r1 = 1.0 - r1;
                r2 = 1.0 - r2;
            }
            let (a, b, c) = (&v[f[0]], &v[f[1]], &v[f[2]]);
            coords.extend((0..3).map(|d| a[d] + r1 * (b[d] - a[d]) + r2 * (c[d] - a[d])));
        }
    }
    Ok((PointCloud::new(3, coords)?, hits))
}

/// Adds independent `N(0, sigma²)` noise to every coordinate. Normals are dropped.
pub fn perturb(cloud: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud, GeometryError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(GeometryError::InvalidArgument(format!(
            "noise sigma {sigma} must be non-negative"
        )));
    }
    if sigma == 0.0 {
        return Ok(cloud.clone().without_normals());
    }
    let noise = Normal::new(0.0, sigma).expect("valid sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = cloud
        .coords()
        .iter()
        .map(|&x| x + noise.sample(&mut rng))
        .collect();
    PointCloud::new(cloud.dim(), coords)
}

/// Uniform selection of `n` distinct points, keeping normals.
pub fn subsample(cloud: &PointCloud, n: usize, seed: u64) -> Result<PointCloud, GeometryError> {
    if n == 0 || n > cloud.len() {
        return Err(GeometryError::InvalidArgument(format!(
            "cannot select {n} of {} points",
            cloud.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, cloud.len(), n);
    let dim = cloud.dim();
    let mut coords = Vec::with_capacity(n * dim);
    let mut normals = cloud.normals().map(|_| Vec::with_capacity(n * dim));
    for i in picked.iter() {
        coords.extend_from_slice(cloud.point(i));
        if let Some(ns) = normals.as_mut() {
            ns.extend_from_slice(cloud.normal(i).unwrap());
        }
    }
    let out = PointCloud::new(dim, coords)?;
    match normals {
        Some(ns) => out.with_normals(ns),
        None => Ok(out),
    }
}
