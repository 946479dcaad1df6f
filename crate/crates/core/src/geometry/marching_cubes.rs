//! Marching cubes with a case table derived from the cube's face topology.
//!
//! Corner `c` of a cell sits at offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
//! A corner is inside when its value is below the iso value. On every cube face
//! each run of inside corners contributes one directed segment between the two
//! crossing edges bounding it; the segments chain into closed polygons that are
//! fan-triangulated. Ambiguous faces always separate their inside corners, so
//! neighboring cells agree on shared faces and the surface is closed.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{GeometryError, TriangleMesh};

/// Scalar samples on a regular lattice, indexed `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub resolution: [usize; 3],
    pub origin: [f64; 3],
    pub cell_size: f64,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(
        resolution: [usize; 3],
        origin: [f64; 3],
        cell_size: f64,
        values: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        if values.len() != resolution.iter().product::<usize>() {
            return Err(GeometryError::InvalidArgument(format!(
                "{} values for a {}x{}x{} grid",
                values.len(),
                resolution[0],
                resolution[1],
                resolution[2]
            )));
        }
        if !(cell_size > 0.0) {
            return Err(GeometryError::InvalidArgument(format!(
                "cell size {cell_size} must be positive"
            )));
        }
        Ok(Self {
            resolution,
            origin,
            cell_size,
            values,
        })
    }

    /// Samples `f` at every lattice node.
    pub fn from_fn(
        resolution: [usize; 3],
        origin: [f64; 3],
        cell_size: f64,
        f: impl Fn([f64; 3]) -> f64,
    ) -> Result<Self, GeometryError> {
        let mut values = Vec::with_capacity(resolution.iter().product());
        for k in 0..resolution[2] {
            for j in 0..resolution[1] {
                for i in 0..resolution[0] {
                    values.push(f(node_position(origin, cell_size, [i, j, k])));
                }
            }
        }
        Self::new(resolution, origin, cell_size, values)
    }

    /// Lattice node positions in storage order.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let [nx, ny, nz] = self.resolution;
        let mut out = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    out.push(node_position(self.origin, self.cell_size, [i, j, k]));
                }
            }
        }
        out
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution[0] * (j + self.resolution[1] * k)
    }
}

fn node_position(origin: [f64; 3], h: f64, ijk: [usize; 3]) -> [f64; 3] {
    [
        origin[0] + ijk[0] as f64 * h,
        origin[1] + ijk[1] as f64 * h,
        origin[2] + ijk[2] as f64 * h,
    ]
}

/// Corner pairs of the twelve cube edges.
const EDGES: [(u8, u8); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Face corner cycles, counter-clockwise seen from outside the cube.
const FACES: [[u8; 4]; 6] = [
    [0, 2, 3, 1],
    [4, 5, 7, 6],
    [0, 4, 6, 2],
    [1, 3, 7, 5],
    [0, 1, 5, 4],
    [2, 6, 7, 3],
];

fn edge_between(a: u8, b: u8) -> u8 {
    let (a, b) = (a.min(b), a.max(b));
    EDGES.iter().position(|&e| e == (a, b)).expect("adjacent corners") as u8
}

fn case_triangles(mask: u8) -> Vec<[u8; 3]> {
    let inside = |c: u8| mask >> c & 1 == 1;
    let mut next = [u8::MAX; 12];
    for face in FACES {
        for s in 0..4 {
            let cur = face[s];
            let prev = face[(s + 3) % 4];
            if !inside(cur) || inside(prev) {
                continue;
            }
            // `cur` starts a run of inside corners; find where it ends.
            let mut e = s;
            while inside(face[(e + 1) % 4]) {
                e = (e + 1) % 4;
            }
            let entry = edge_between(prev, cur);
            let exit = edge_between(face[e], face[(e + 1) % 4]);
            next[entry as usize] = exit;
        }
    }
    let mut done = [false; 12];
    let mut triangles = Vec::new();
    for start in 0..12u8 {
        if next[start as usize] == u8::MAX || done[start as usize] {
            continue;
        }
        let mut polygon = vec![start];
        done[start as usize] = true;
        let mut e = next[start as usize];
        while e != start {
            done[e as usize] = true;
            polygon.push(e);
            e = next[e as usize];
        }
        for w in 1..polygon.len() - 1 {
            triangles.push([polygon[0], polygon[w], polygon[w + 1]]);
        }
    }
    triangles
}

fn case_table() -> &'static [Vec<[u8; 3]>] {
    static TABLE: OnceLock<Vec<Vec<[u8; 3]>>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=255u8).map(case_triangles).collect())
}

/// Extracts the `iso` level set with linear interpolation along cell edges.
/// Triangles are oriented with normals pointing toward increasing values.
pub fn marching_cubes(grid: &ScalarGrid, iso: f64) -> TriangleMesh {
    let [nx, ny, nz] = grid.resolution;
    let mut mesh = TriangleMesh::default();
    if nx < 2 || ny < 2 || nz < 2 {
        return mesh;
    }
    let table = case_table();
    let mut vertex_of: HashMap<usize, usize> = HashMap::new();
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corner = |c: u8| {
                    let c = c as usize;
                    [i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1)]
                };
                let mut mask = 0u8;
                for c in 0..8u8 {
                    let [a, b, d] = corner(c);
                    if grid.values[grid.index(a, b, d)] < iso {
                        mask |= 1 << c;
                    }
                }
                for tri in &table[mask as usize] {
                    let mut face = [0usize; 3];
                    for (slot, &edge) in face.iter_mut().zip(tri) {
                        let (ca, cb) = EDGES[edge as usize];
                        let (pa, pb) = (corner(ca), corner(cb));
                        let axis = (0..3).find(|&d| pa[d] != pb[d]).unwrap();
                        let key = 3 * grid.index(pa[0], pa[1], pa[2]) + axis;
                        *slot = *vertex_of.entry(key).or_insert_with(|| {
                            let va = grid.values[grid.index(pa[0], pa[1], pa[2])];
                            let vb = grid.values[grid.index(pb[0], pb[1], pb[2])];
                            let t = (iso - va) / (vb - va);
                            let mut p = node_position(grid.origin, grid.cell_size, pa);
                            p[axis] += t * grid.cell_size;
                            mesh.vertices.push(p);
                            mesh.vertices.len() - 1
                        });
                    }
                    mesh.faces.push(face);
                }
            }
        }
    }
    mesh.without_degenerate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signed_volume(mesh: &TriangleMesh) -> f64 {
        mesh.faces
            .iter()
            .map(|f| {
                let (a, b, c) = (mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
                (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]))
                    / 6.0
            })
            .sum()
    }

    fn edge_uses(mesh: &TriangleMesh) -> HashMap<(usize, usize), (usize, usize)> {
        let mut uses = HashMap::new();
        for f in &mesh.faces {
            for s in 0..3 {
                let (a, b) = (f[s], f[(s + 1) % 3]);
                let e = uses.entry((a.min(b), a.max(b))).or_insert((0, 0));
                if a < b {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        uses
    }

    #[test]
    fn every_case_uses_exactly_its_crossing_edges() {
        for mask in 0..=255u8 {
            let mut used = [false; 12];
            for tri in case_triangles(mask) {
                for e in tri {
                    used[e as usize] = true;
                }
            }
            for (e, &(a, b)) in EDGES.iter().enumerate() {
                let crossing = (mask >> a & 1) != (mask >> b & 1);
                assert_eq!(used[e], crossing, "case {mask} edge {e}");
            }
        }
    }

    #[test]
    fn uniform_field_is_empty() {
        let grid = ScalarGrid::from_fn([8, 8, 8], [0.0; 3], 0.1, |_| 1.0).unwrap();
        assert!(marching_cubes(&grid, 0.0).is_empty());
    }

    #[test]
    fn linear_field_is_exact() {
        let h = 2.0 / 9.0;
        let grid = ScalarGrid::from_fn([10, 10, 10], [-1.0; 3], h, |p| p[2]).unwrap();
        let mesh = marching_cubes(&grid, 0.0);
        assert!(!mesh.faces.is_empty());
        assert!(mesh.vertices.iter().all(|v| v[2].abs() < 1e-9));
        assert!((mesh.surface_area() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn sphere_is_closed_and_outward() {
        let n = 64;
        let h = 1.0 / (n - 1) as f64;
        let c = 0.5;
        let grid = ScalarGrid::from_fn([n, n, n], [0.0; 3], h, |p| {
            ((p[0] - c).powi(2) + (p[1] - c).powi(2) + (p[2] - c).powi(2)).sqrt() - 0.4
        })
        .unwrap();
        let mesh = marching_cubes(&grid, 0.0);
        for v in &mesh.vertices {
            let r = ((v[0] - c).powi(2) + (v[1] - c).powi(2) + (v[2] - c).powi(2)).sqrt();
            assert!((r - 0.4).abs() < 2.0 * h);
        }
        for (edge, (fwd, back)) in edge_uses(&mesh) {
            assert_eq!((fwd, back), (1, 1), "edge {edge:?}");
        }
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.4f64.powi(3);
        let vol = signed_volume(&mesh);
        assert!((vol - exact).abs() < 0.01 * exact, "{vol} vs {exact}");
    }

    #[test]
    fn saddle_field_is_closed() {
        let n = 24;
        let h = 1.0 / (n - 1) as f64;
        // Two nearly touching blobs exercise ambiguous faces.
        let grid = ScalarGrid::from_fn([n, n, n], [0.0; 3], h, |p| {
            let a = ((p[0] - 0.3).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2)).sqrt();
            let b = ((p[0] - 0.7).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2)).sqrt();
            a.min(b) - 0.2 + 0.02 * (37.0 * p[1]).sin() * (23.0 * p[2]).cos()
        })
        .unwrap();
        let mesh = marching_cubes(&grid, 0.0);
        assert!(!mesh.faces.is_empty());
        for (_, (fwd, back)) in edge_uses(&mesh) {
            assert_eq!((fwd, back), (1, 1));
        }
        assert!(signed_volume(&mesh) > 0.0);
    }

    #[test]
    fn tiny_grids_do_not_panic() {
        let grid = ScalarGrid::from_fn([2, 2, 2], [0.0; 3], 1.0, |p| p[0] - 0.5).unwrap();
        assert_eq!(marching_cubes(&grid, 0.0).faces.len(), 2);
        let flat = ScalarGrid::from_fn([1, 3, 3], [0.0; 3], 1.0, |p| p[1] - 0.5).unwrap();
        assert!(marching_cubes(&flat, 0.0).is_empty());
    }
}
