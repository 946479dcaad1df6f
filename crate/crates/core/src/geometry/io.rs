//! ASCII XYZ point clouds and OBJ meshes.
//!
//! Files are written to a temporary sibling and renamed into place, so a failed
//! write never leaves a partial file behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::{GeometryError, PointCloud, TriangleMesh};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GeometryError + '_ {
    move |source| GeometryError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Fixed-point decimal with at least nine significant digits.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0.000000000".to_string();
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (8 - magnitude).clamp(9, 330) as usize;
    format!("{v:.decimals$}")
}

/// Writes `contents` atomically.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), GeometryError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(contents).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

fn parse_fields(path: &Path, line_no: usize, fields: &[&str]) -> Result<Vec<f64>, GeometryError> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| GeometryError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("`{f}` is not a number"),
            })
        })
        .collect()
}

/// Reads `x y z [nx ny nz]` lines; `#` lines and blank lines are skipped.
/// Normals are kept only when every line carries them.
pub fn read_xyz(path: &Path) -> Result<PointCloud, GeometryError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut coords = Vec::new();
    let mut normals = Vec::new();
    let mut all_normals = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 && fields.len() != 6 {
            return Err(GeometryError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected 3 or 6 values, found {}", fields.len()),
            });
        }
        let values = parse_fields(path, i + 1, &fields)?;
        coords.extend_from_slice(&values[..3]);
        if values.len() == 6 {
            normals.extend_from_slice(&values[3..]);
        } else {
            all_normals = false;
        }
    }
    let cloud = PointCloud::new(3, coords)?;
    if all_normals && !cloud.is_empty() {
        cloud.with_normals(normals)
    } else {
        Ok(cloud)
    }
}

/// Writes a cloud as XYZ, padding 2D points with `z = 0`.
pub fn write_xyz(path: &Path, cloud: &PointCloud) -> Result<(), GeometryError> {
    let mut out = String::with_capacity(cloud.len() * 48);
    for i in 0..cloud.len() {
        let mut fields: Vec<f64> = cloud.point(i).to_vec();
        fields.resize(3, 0.0);
        if let Some(n) = cloud.normal(i) {
            fields.extend_from_slice(n);
            fields.resize(6, 0.0);
        }
        let line: Vec<String> = fields.into_iter().map(format_number).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    write_atomic(path, out.as_bytes())
}

/// Reads `v`, `f` and `l` elements. Polygonal faces are fan-triangulated and
/// `v/vt/vn` references use their vertex index. Other directives are ignored.
pub fn read_obj(path: &Path) -> Result<TriangleMesh, GeometryError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut segments = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        let Some(tag) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        let bad = |message: String| GeometryError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        match tag {
            "v" => {
                if rest.len() < 3 {
                    return Err(bad("vertex needs three coordinates".into()));
                }
                let v = parse_fields(path, i + 1, &rest[..3])?;
                vertices.push([v[0], v[1], v[2]]);
            }
            "f" | "l" => {
                let mut idx = Vec::with_capacity(rest.len());
                for r in &rest {
                    let head = r.split('/').next().unwrap_or("");
                    let k: i64 = head
                        .parse()
                        .map_err(|_| bad(format!("`{r}` is not a vertex reference")))?;
                    let resolved = if k > 0 {
                        k - 1
                    } else {
                        vertices.len() as i64 + k
                    };
                    if k == 0 || resolved < 0 {
                        return Err(bad(format!("vertex reference {k} is invalid")));
                    }
                    idx.push(resolved as usize);
                }
                if tag == "f" {
                    if idx.len() < 3 {
                        return Err(bad("face needs three vertices".into()));
                    }
                    for w in 1..idx.len() - 1 {
                        faces.push([idx[0], idx[w], idx[w + 1]]);
                    }
                } else {
                    segments.extend(idx.windows(2).map(|w| [w[0], w[1]]));
                }
            }
            _ => {}
        }
    }
    let mesh = TriangleMesh {
        vertices,
        faces,
        segments,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Writes `v`, `f` and `l` elements with 1-based indices.
pub fn write_obj(path: &Path, mesh: &TriangleMesh) -> Result<(), GeometryError> {
    let mut out = String::with_capacity(mesh.vertices.len() * 40 + mesh.faces.len() * 20);
    for v in &mesh.vertices {
        let _ = writeln!(
            out,
            "v {} {} {}",
            format_number(v[0]),
            format_number(v[1]),
            format_number(v[2])
        );
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    for s in &mesh.segments {
        let _ = writeln!(out, "l {} {}", s[0] + 1, s[1] + 1);
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_keeps_nine_significant_digits() {
        assert_eq!(format_number(0.0), "0.000000000");
        assert_eq!(format_number(1.0), "1.000000000");
        assert_eq!(format_number(-0.5), "-0.500000000");
        assert_eq!(format_number(123456.789), "123456.789000000");
        assert_eq!(format_number(1.234567891234e-5), "0.0000123456789");
        let v = 0.123456789012345;
        let back: f64 = format_number(v).parse().unwrap();
        assert!((back - v).abs() < 1e-9 * v);
    }

    #[test]
    fn xyz_round_trip_with_normals() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.xyz");
        let cloud = PointCloud::new(3, vec![0.1, 0.2, 0.3, -1.5, 2.0, 1e-4])
            .unwrap()
            .with_normals(vec![0.0, 0.0, 1.0, 0.6, 0.8, 0.0])
            .unwrap();
        write_xyz(&path, &cloud).unwrap();
        let back = read_xyz(&path).unwrap();
        assert_eq!(back, cloud);
    }

    #[test]
    fn xyz_skips_comments_and_reports_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.xyz");
        fs::write(&path, "# header\n1 2 3\n\n4 5 6\n").unwrap();
        assert_eq!(read_xyz(&path).unwrap().len(), 2);
        fs::write(&path, "1 2 3\n4 five 6\n").unwrap();
        assert!(matches!(
            read_xyz(&path),
            Err(GeometryError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_xyz(&dir.path().join("missing.xyz")),
            Err(GeometryError::Io { .. })
        ));
    }

    #[test]
    fn obj_round_trip_and_foreign_directives() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.obj");
        let mesh = TriangleMesh {
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            faces: vec![[0, 1, 2]],
            segments: vec![[2, 3]],
        };
        write_obj(&path, &mesh).unwrap();
        assert_eq!(read_obj(&path).unwrap(), mesh);

        fs::write(
            &path,
            "# c\nmtllib x.mtl\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\ng quad\nf 1//1 2//1 3//1 -1//1\n",
        )
        .unwrap();
        let quad = read_obj(&path).unwrap();
        assert_eq!(quad.faces, vec![[0, 1, 2], [0, 2, 3]]);
        fs::write(&path, "v 0 0 0\nf 1 2 3\n").unwrap();
        assert!(read_obj(&path).is_err());
    }

    #[test]
    fn failed_write_leaves_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing_dir").join("m.obj");
        assert!(write_obj(&path, &TriangleMesh::default()).is_err());
        assert!(!path.exists());
    }
}
