//! Indexed triangle meshes and primitive tessellation.

use nalgebra::{Point3, Vector3};
use thiserror::Error;

use crate::transform::RigidTransform;

/// An indexed triangle mesh in meters. Facet normals are never stored; the
/// renderer derives whatever it needs from vertex positions.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {index} but mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        vertex_count: usize,
    },
    #[error("vertex {index} has a non-finite coordinate")]
    NonFiniteVertex { index: usize },
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl TriangleMesh {
    /// Builds a mesh, checking index bounds and coordinate finiteness.
    pub fn new(
        vertices: Vec<Point3<f64>>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self, MeshError> {
        for (i, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(MeshError::NonFiniteVertex { index: i });
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &idx in tri {
                if idx as usize >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        index: idx,
                        vertex_count: vertices.len(),
                    });
                }
            }
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// The three corner positions of triangle `t`.
    #[inline]
    pub fn triangle_vertices(&self, t: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Bounding box; `None` for a mesh with no vertices.
    pub fn aabb(&self) -> Option<Aabb> {
        let first = *self.vertices.first()?;
        let mut min = first;
        let mut max = first;
        for v in &self.vertices[1..] {
            for k in 0..3 {
                min[k] = min[k].min(v[k]);
                max[k] = max[k].max(v[k]);
            }
        }
        Some(Aabb { min, max })
    }

    /// Returns a copy with every vertex transformed.
    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| t.transform_point(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Scales vertices componentwise in place (URDF mesh `scale` attribute).
    pub fn apply_scale(&mut self, scale: Vector3<f64>) {
        for v in &mut self.vertices {
            v.x *= scale.x;
            v.y *= scale.y;
            v.z *= scale.z;
        }
    }

    /// Appends another mesh, offsetting its indices.
    pub fn merge(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
    }
}

/// Axis-aligned box of the given full extents, centered at the origin.
pub fn box_mesh(sx: f64, sy: f64, sz: f64) -> TriangleMesh {
    let (hx, hy, hz) = (sx / 2.0, sy / 2.0, sz / 2.0);
    let vertices = vec![
        Point3::new(-hx, -hy, -hz),
        Point3::new(hx, -hy, -hz),
        Point3::new(hx, hy, -hz),
        Point3::new(-hx, hy, -hz),
        Point3::new(-hx, -hy, hz),
        Point3::new(hx, -hy, hz),
        Point3::new(hx, hy, hz),
        Point3::new(-hx, hy, hz),
    ];
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2], // -z
        [4, 5, 6],
        [4, 6, 7], // +z
        [0, 1, 5],
        [0, 5, 4], // -y
        [2, 3, 7],
        [2, 7, 6], // +y
        [0, 4, 7],
        [0, 7, 3], // -x
        [1, 2, 6],
        [1, 6, 5], // +x
    ];
    TriangleMesh {
        vertices,
        triangles,
    }
}

/// Cylinder along +z of the given radius and full length, centered at the
/// origin, tessellated with `segments` side facets plus two cap fans.
pub fn cylinder_mesh(radius: f64, length: f64, segments: u32) -> TriangleMesh {
    assert!(segments >= 3, "cylinder needs at least 3 segments");
    let hz = length / 2.0;
    let n = segments as usize;
    let mut vertices = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        vertices.push(Point3::new(radius * a.cos(), radius * a.sin(), -hz));
    }
    for i in 0..n {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        vertices.push(Point3::new(radius * a.cos(), radius * a.sin(), hz));
    }
    let bottom_center = vertices.len() as u32;
    vertices.push(Point3::new(0.0, 0.0, -hz));
    let top_center = vertices.len() as u32;
    vertices.push(Point3::new(0.0, 0.0, hz));

    let mut triangles = Vec::with_capacity(4 * n);
    for i in 0..n as u32 {
        let j = (i + 1) % segments;
        let (b0, b1) = (i, j);
        let (t0, t1) = (i + segments, j + segments);
        // side quad
        triangles.push([b0, b1, t1]);
        triangles.push([b0, t1, t0]);
        // caps
        triangles.push([bottom_center, b1, b0]);
        triangles.push([top_center, t0, t1]);
    }
    TriangleMesh {
        vertices,
        triangles,
    }
}

/// UV sphere of the given radius centered at the origin with `segments`
/// meridians and `segments / 2` parallels.
pub fn sphere_mesh(radius: f64, segments: u32) -> TriangleMesh {
    assert!(segments >= 4, "sphere needs at least 4 segments");
    let n = segments as usize;
    let rings = (segments / 2).max(2) as usize;
    let mut vertices = Vec::new();
    vertices.push(Point3::new(0.0, 0.0, radius)); // north pole
    for r in 1..rings {
        let phi = std::f64::consts::PI * r as f64 / rings as f64;
        let (sp, cp) = phi.sin_cos();
        for i in 0..n {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vertices.push(Point3::new(
                radius * sp * a.cos(),
                radius * sp * a.sin(),
                radius * cp,
            ));
        }
    }
    let south = vertices.len() as u32;
    vertices.push(Point3::new(0.0, 0.0, -radius));

    let ring_start = |r: usize| 1 + (r - 1) * n;
    let mut triangles = Vec::new();
    // pole fans
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([0, (ring_start(1) + i) as u32, (ring_start(1) + j) as u32]);
        let last = ring_start(rings - 1);
        triangles.push([south, (last + j) as u32, (last + i) as u32]);
    }
    // quads between rings
    for r in 1..rings - 1 {
        let a = ring_start(r);
        let b = ring_start(r + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            triangles.push([(a + i) as u32, (b + i) as u32, (b + j) as u32]);
            triangles.push([(a + i) as u32, (b + j) as u32, (a + j) as u32]);
        }
    }
    TriangleMesh {
        vertices,
        triangles,
    }
}
