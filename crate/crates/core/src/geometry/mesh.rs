use super::GeometryError;

/// Indexed triangle mesh. Curves are stored as line segments with no faces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub segments: Vec<[usize; 2]>,
}

pub fn triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    0.5 * norm(&cross(&sub(b, a), &sub(c, a)))
}

pub(crate) fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// A face counts as degenerate when its area is negligible relative to its
/// longest edge.
pub(crate) fn is_degenerate(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> bool {
    let longest = [sub(b, a), sub(c, b), sub(a, c)]
        .iter()
        .map(norm)
        .fold(0.0, f64::max);
    longest == 0.0 || 2.0 * triangle_area(a, b, c) <= 1e-12 * longest * longest
}

impl TriangleMesh {
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        let mesh = Self {
            vertices,
            faces,
            segments: Vec::new(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn polyline(
        vertices: Vec<[f64; 3]>,
        segments: Vec<[usize; 2]>,
    ) -> Result<Self, GeometryError> {
        let mesh = Self {
            vertices,
            faces: Vec::new(),
            segments,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub(crate) fn validate(&self) -> Result<(), GeometryError> {
        let n = self.vertices.len();
        let bad = self.faces.iter().flatten().chain(self.segments.iter().flatten());
        if let Some(&i) = bad.clone().find(|&&i| i >= n) {
            return Err(GeometryError::InvalidArgument(format!(
                "vertex index {i} out of range for {n} vertices"
            )));
        }
        if self.vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidArgument(
                "mesh vertex is not finite".into(),
            ));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty() && self.segments.is_empty()
    }

    /// Drops zero-area faces and zero-length segments.
    pub fn without_degenerate(mut self) -> Self {
        let v = &self.vertices;
        self.faces
            .retain(|f| !is_degenerate(&v[f[0]], &v[f[1]], &v[f[2]]));
        self.segments.retain(|s| v[s[0]] != v[s[1]]);
        self
    }

    pub fn surface_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| triangle_area(&self.vertices[f[0]], &self.vertices[f[1]], &self.vertices[f[2]]))
            .sum()
    }

    pub fn total_length(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| norm(&sub(&self.vertices[s[1]], &self.vertices[s[0]])))
            .sum()
    }

    /// Appends `other` as a disjoint component.
    pub fn append(&mut self, other: &TriangleMesh) {
        let offset = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces.extend(
            other
                .faces
                .iter()
                .map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]),
        );
        self.segments
            .extend(other.segments.iter().map(|s| [s[0] + offset, s[1] + offset]));
    }

    /// Number of connected components among vertices referenced by faces or
    /// segments.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut used = vec![false; self.vertices.len()];
        let union = |a: usize, b: usize, parent: &mut Vec<usize>| {
            let (ra, rb) = (find(parent, a), find(parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        };
        for f in &self.faces {
            for &i in f {
                used[i] = true;
            }
            union(f[0], f[1], &mut parent);
            union(f[1], f[2], &mut parent);
        }
        for s in &self.segments {
            used[s[0]] = true;
            used[s[1]] = true;
            union(s[0], s[1], &mut parent);
        }
        (0..self.vertices.len())
            .filter(|&i| used[i] && find(&mut parent, i) == i)
            .count()
    }
}

/// Triangulates an `r × r` row-major grid of points, splitting each cell along
/// the diagonal from its first to its last corner. Degenerate faces are dropped.
pub fn grid_to_mesh(points: &[[f64; 3]], r: usize) -> Result<TriangleMesh, GeometryError> {
    if r < 2 {
        return Err(GeometryError::InvalidArgument(format!(
            "grid resolution {r} is below 2"
        )));
    }
    if points.len() != r * r {
        return Err(GeometryError::InvalidArgument(format!(
            "{} points do not form a {r}x{r} grid",
            points.len()
        )));
    }
    let mut faces = Vec::with_capacity(2 * (r - 1) * (r - 1));
    for i in 0..r - 1 {
        for j in 0..r - 1 {
            let v00 = i * r + j;
            let v01 = v00 + 1;
            let v10 = v00 + r;
            let v11 = v10 + 1;
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    Ok(TriangleMesh::new(points.to_vec(), faces)?.without_degenerate())
}

/// Scales uniformly and translates so the bounding box's longest side spans
/// `[0, 1]` and the box is centered at `(0.5, 0.5, 0.5)`.
pub fn normalize_to_unit_cube(mesh: &TriangleMesh) -> Result<TriangleMesh, GeometryError> {
    let mut vertices = mesh.vertices.clone();
    normalize_points(&mut vertices)?;
    Ok(TriangleMesh {
        vertices,
        faces: mesh.faces.clone(),
        segments: mesh.segments.clone(),
    })
}

pub(crate) fn normalize_points(points: &mut [[f64; 3]]) -> Result<(), GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points.iter() {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let extent = (0..3).map(|d| hi[d] - lo[d]).fold(0.0, f64::max);
    if extent <= 0.0 {
        return Err(GeometryError::DegenerateMesh);
    }
    let scale = 1.0 / extent;
    for p in points.iter_mut() {
        for d in 0..3 {
            p[d] = (p[d] - 0.5 * (lo[d] + hi[d])) * scale + 0.5;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar_grid(r: usize, size: f64) -> Vec<[f64; 3]> {
        let h = size / (r - 1) as f64;
        (0..r)
            .flat_map(|i| (0..r).map(move |j| [i as f64 * h, j as f64 * h, 0.0]))
            .collect()
    }

    #[test]
    fn grid_face_counts() {
        assert_eq!(grid_to_mesh(&planar_grid(2, 1.0), 2).unwrap().faces.len(), 2);
        assert_eq!(
            grid_to_mesh(&planar_grid(64, 1.0), 64).unwrap().faces.len(),
            7938
        );
        assert!(grid_to_mesh(&planar_grid(2, 1.0), 1).is_err());
    }

    #[test]
    fn planar_grid_area() {
        let mesh = grid_to_mesh(&planar_grid(17, 0.7), 17).unwrap();
        assert!((mesh.surface_area() - 0.49).abs() < 1e-9);
    }

    #[test]
    fn constant_grid_is_empty() {
        let mesh = grid_to_mesh(&[[0.3, 0.3, 0.3]; 16], 4).unwrap();
        assert!(mesh.faces.is_empty());
    }

    #[test]
    fn rejects_out_of_range_faces() {
        assert!(TriangleMesh::new(vec![[0.0; 3]; 2], vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn append_keeps_components_disjoint() {
        let mut a = grid_to_mesh(&planar_grid(3, 1.0), 3).unwrap();
        let b = a.clone();
        a.append(&b);
        assert_eq!(a.faces.len(), 16);
        assert_eq!(a.component_count(), 2);
    }

    #[test]
    fn normalization_fits_unit_cube() {
        let mesh = TriangleMesh::new(
            vec![[-2.0, 0.0, 1.0], [2.0, 1.0, 1.0], [0.0, 0.0, 3.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let n = normalize_to_unit_cube(&mesh).unwrap();
        assert_eq!(n.vertices[0], [0.0, 0.375, 0.25]);
        assert_eq!(n.vertices[1], [1.0, 0.625, 0.25]);
        assert_eq!(n.vertices[2], [0.5, 0.375, 0.75]);
    }
}
