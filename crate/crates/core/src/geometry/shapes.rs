//! Analytic benchmark shapes centered in the unit cube.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use super::{GeometryError, TriangleMesh};

const CENTER: [f64; 3] = [0.5, 0.5, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Sphere,
    Torus,
    Plane,
    /// Circle in the `z = 0.5` plane.
    Ring,
    /// Helix around the vertical axis.
    Spiral,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Sphere,
        ShapeKind::Torus,
        ShapeKind::Plane,
        ShapeKind::Ring,
        ShapeKind::Spiral,
    ];

    /// Curves are 1-manifolds; the rest are surfaces.
    pub fn manifold_dim(self) -> usize {
        match self {
            ShapeKind::Ring | ShapeKind::Spiral => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Sphere => "sphere",
            ShapeKind::Torus => "torus",
            ShapeKind::Plane => "plane",
            ShapeKind::Ring => "ring",
            ShapeKind::Spiral => "spiral",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GeometryError::UnknownShape(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParams {
    /// Sphere radius, torus major radius, ring and helix radius, or plane half-width.
    pub radius: f64,
    /// Torus tube radius; helix height for the spiral.
    pub minor_radius: f64,
    /// Tessellation density: icosphere subdivisions, or segments along the
    /// main parameter for the other shapes.
    pub resolution: usize,
    /// Helix turns.
    pub turns: f64,
}

impl ShapeParams {
    pub fn default_for(kind: ShapeKind) -> Self {
        match kind {
            ShapeKind::Sphere => Self {
                radius: 0.5,
                minor_radius: 0.0,
                resolution: 4,
                turns: 0.0,
            },
            ShapeKind::Torus => Self {
                radius: 0.35,
                minor_radius: 0.12,
                resolution: 128,
                turns: 0.0,
            },
            ShapeKind::Plane => Self {
                radius: 0.5,
                minor_radius: 0.0,
                resolution: 16,
                turns: 0.0,
            },
            ShapeKind::Ring => Self {
                radius: 0.5,
                minor_radius: 0.0,
                resolution: 1024,
                turns: 0.0,
            },
            ShapeKind::Spiral => Self {
                radius: 0.3,
                minor_radius: 1.0,
                resolution: 2048,
                turns: 3.0,
            },
        }
    }
}

pub fn procedural_shape(kind: ShapeKind, params: &ShapeParams) -> Result<TriangleMesh, GeometryError> {
    let needs_minor = matches!(kind, ShapeKind::Torus | ShapeKind::Spiral);
    if !(params.radius > 0.0) || (needs_minor && !(params.minor_radius > 0.0)) {
        return Err(GeometryError::InvalidArgument(
            "shape radii must be positive".into(),
        ));
    }
    if kind != ShapeKind::Sphere && params.resolution < 3 {
        return Err(GeometryError::InvalidArgument(format!(
            "resolution {} is too small",
            params.resolution
        )));
    }
    Ok(match kind {
        ShapeKind::Sphere => icosphere(params.radius, params.resolution),
        ShapeKind::Torus => torus(params.radius, params.minor_radius, params.resolution),
        ShapeKind::Plane => plane(params.radius, params.resolution),
        ShapeKind::Ring => ring(params.radius, params.resolution),
        ShapeKind::Spiral => helix(params.radius, params.minor_radius, params.turns, params.resolution),
    })
}

fn icosphere(radius: f64, subdivisions: usize) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut unit: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    for v in unit.iter_mut() {
        *v = normalized(*v);
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, unit: &mut Vec<[f64; 3]>| {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (unit[a], unit[b]);
                unit.push(normalized([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                unit.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut unit);
            let bc = mid(b, c, &mut unit);
            let ca = mid(c, a, &mut unit);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = unit
        .into_iter()
        .map(|v| std::array::from_fn(|d| CENTER[d] + radius * v[d]))
        .collect();
    TriangleMesh {
        vertices,
        faces,
        segments: Vec::new(),
    }
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / len, v[1] / len, v[2] / len]
}

fn torus(major: f64, minor: f64, segments: usize) -> TriangleMesh {
    let m = segments;
    let k = (segments / 2).max(3);
    let mut vertices = Vec::with_capacity(m * k);
    for i in 0..m {
        let u = TAU * i as f64 / m as f64;
        for j in 0..k {
            let v = TAU * j as f64 / k as f64;
            let rho = major + minor * v.cos();
            vertices.push([
                CENTER[0] + rho * u.cos(),
                CENTER[1] + rho * u.sin(),
                CENTER[2] + minor * v.sin(),
            ]);
        }
    }
    let mut faces = Vec::with_capacity(2 * m * k);
    for i in 0..m {
        for j in 0..k {
            let a = i * k + j;
            let b = ((i + 1) % m) * k + j;
            let c = ((i + 1) % m) * k + (j + 1) % k;
            let d = i * k + (j + 1) % k;
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh {
        vertices,
        faces,
        segments: Vec::new(),
    }
}

fn plane(half: f64, r: usize) -> TriangleMesh {
    let h = 2.0 * half / (r - 1) as f64;
    let points: Vec<[f64; 3]> = (0..r)
        .flat_map(|i| {
            (0..r).map(move |j| {
                [
                    CENTER[0] - half + i as f64 * h,
                    CENTER[1] - half + j as f64 * h,
                    CENTER[2],
                ]
            })
        })
        .collect();
    super::grid_to_mesh(&points, r).expect("valid grid")
}

fn ring(radius: f64, n: usize) -> TriangleMesh {
    let vertices = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            [CENTER[0] + radius * t.cos(), CENTER[1] + radius * t.sin(), CENTER[2]]
        })
        .collect();
    let segments = (0..n).map(|i| [i, (i + 1) % n]).collect();
    TriangleMesh {
        vertices,
        faces: Vec::new(),
        segments,
    }
}

fn helix(radius: f64, height: f64, turns: f64, n: usize) -> TriangleMesh {
    let vertices = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            let t = TAU * turns * s;
            [
                CENTER[0] + radius * t.cos(),
                CENTER[1] + radius * t.sin(),
                CENTER[2] + height * (s - 0.5),
            ]
        })
        .collect();
    let segments = (0..n - 1).map(|i| [i, i + 1]).collect();
    TriangleMesh {
        vertices,
        faces: Vec::new(),
        segments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64; 3]) -> f64 {
        ((v[0] - 0.5).powi(2) + (v[1] - 0.5).powi(2) + (v[2] - 0.5).powi(2)).sqrt()
    }

    fn in_unit_cube(mesh: &TriangleMesh) -> bool {
        mesh.vertices
            .iter()
            .all(|v| v.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)))
    }

    #[test]
    fn sphere_vertices_on_radius() {
        let mesh = procedural_shape(ShapeKind::Sphere, &ShapeParams::default_for(ShapeKind::Sphere)).unwrap();
        assert_eq!(mesh.faces.len(), 20 * 4usize.pow(4));
        assert!(mesh.vertices.iter().all(|v| (dist(v) - 0.5).abs() < 1e-9));
        assert!(in_unit_cube(&mesh));
        let area = mesh.surface_area();
        let exact = 4.0 * std::f64::consts::PI * 0.25;
        assert!(area < exact && area > 0.99 * exact);
    }

    #[test]
    fn torus_satisfies_implicit_equation() {
        let mesh = procedural_shape(ShapeKind::Torus, &ShapeParams::default_for(ShapeKind::Torus)).unwrap();
        for v in &mesh.vertices {
            let (x, y, z) = (v[0] - 0.5, v[1] - 0.5, v[2] - 0.5);
            let residual = ((x * x + y * y).sqrt() - 0.35).powi(2) + z * z - 0.12f64.powi(2);
            assert!(residual.abs() < 1e-6);
        }
        assert!(in_unit_cube(&mesh));
    }

    #[test]
    fn curves_and_plane() {
        let ring = procedural_shape(ShapeKind::Ring, &ShapeParams::default_for(ShapeKind::Ring)).unwrap();
        assert!(ring.faces.is_empty());
        assert!(ring.vertices.iter().all(|v| (dist(v) - 0.5).abs() < 1e-12));
        let spiral = procedural_shape(ShapeKind::Spiral, &ShapeParams::default_for(ShapeKind::Spiral)).unwrap();
        assert!(in_unit_cube(&spiral));
        assert_eq!(spiral.segments.len(), 2047);
        let plane = procedural_shape(ShapeKind::Plane, &ShapeParams::default_for(ShapeKind::Plane)).unwrap();
        assert!((plane.surface_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for k in ShapeKind::ALL {
            assert_eq!(k.name().parse::<ShapeKind>().unwrap(), k);
        }
        assert!(matches!(
            "bunny".parse::<ShapeKind>(),
            Err(GeometryError::UnknownShape(_))
        ));
    }

    #[test]
    fn invalid_radii() {
        let mut p = ShapeParams::default_for(ShapeKind::Torus);
        p.minor_radius = 0.0;
        assert!(procedural_shape(ShapeKind::Torus, &p).is_err());
    }
}
