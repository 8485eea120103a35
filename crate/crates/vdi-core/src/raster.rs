//! Depth-only software rasterizer producing the virtual depth image.
//!
//! Every posed mesh runs through the same model → view → projection math a
//! GPU pipeline would apply: vertices move to the camera frame, triangles
//! are clipped against the near plane, projected to pixel coordinates, and
//! scan-converted with a z-buffer keeping the minimum depth per pixel.
//! Depth interpolates perspective-correctly (1/Z is affine in screen space).
//!
//! Determinism matters more here than raw speed: the image is binned into
//! horizontal tile bands, each band is rasterized by exactly one worker, and
//! per-pixel min composition is order-independent, so the output is bitwise
//! identical run to run regardless of thread scheduling.

use nalgebra::Point3;
use rayon::prelude::*;

use crate::camera::CameraModel;
use crate::depth::{DepthImage, INVALID_DEPTH};
use crate::kinematics::{forward_kinematics, posed_meshes, JointState, KinematicsError};
use crate::mesh::TriangleMesh;
use crate::transform::RigidTransform;
use crate::urdf::RobotModel;

/// Rows per z-buffer band. Small enough to feed every core at 480p, large
/// enough that binning overhead stays negligible.
const BAND_ROWS: u32 = 16;

/// A camera-frame triangle that survived near clipping.
#[derive(Debug, Clone, Copy)]
struct CamTriangle {
    v: [Point3<f64>; 3],
}

/// Screen-space triangle ready for scan conversion: pixel coordinates plus
/// inverse depth at each vertex.
#[derive(Debug, Clone, Copy)]
struct ScreenTriangle {
    // (u, v, 1/z) per vertex
    p: [[f64; 3]; 3],
    min_y: u32,
    max_y: u32, // inclusive
    min_x: u32,
    max_x: u32, // inclusive
}

/// Renders the virtual depth image of world-posed meshes.
///
/// Each pixel center covered by at least one triangle holds the minimum
/// camera-frame Z over the covering fragments, restricted to the camera's
/// `[near, far]` range; everything else stays at the invalid sentinel.
/// Degenerate (zero-area) triangles are skipped. An empty mesh list renders
/// an all-invalid image.
pub fn render_vdi(
    meshes: &[(&TriangleMesh, RigidTransform)],
    cam: &CameraModel,
) -> DepthImage {
    let screen_tris = setup_triangles(meshes, cam);
    let mut out = DepthImage::new_invalid(cam.width, cam.height);
    if screen_tris.is_empty() {
        return out;
    }

    // Bin triangles to row bands.
    let bands = cam.height.div_ceil(BAND_ROWS) as usize;
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); bands];
    for (i, t) in screen_tris.iter().enumerate() {
        let b0 = (t.min_y / BAND_ROWS) as usize;
        let b1 = (t.max_y / BAND_ROWS) as usize;
        for bin in &mut bins[b0..=b1] {
            bin.push(i);
        }
    }

    let width = cam.width;
    let near = cam.near;
    let far = cam.far;
    out.data_mut()
        .par_chunks_mut(BAND_ROWS as usize * width as usize)
        .enumerate()
        .for_each(|(band, rows)| {
            let y0 = band as u32 * BAND_ROWS;
            let y1 = (y0 + BAND_ROWS).min(cam.height); // exclusive
            for &ti in &bins[band] {
                rasterize_into(&screen_tris[ti], rows, width, y0, y1, near, far);
            }
        });
    out
}

/// Full pipeline: forward kinematics, mesh posing, rasterization.
pub fn render_frame(
    model: &RobotModel,
    q: &JointState,
    cam: &CameraModel,
) -> Result<DepthImage, KinematicsError> {
    let poses = forward_kinematics(model, q)?;
    let pairs = posed_meshes(model, &poses)?;
    Ok(render_vdi(&pairs, cam))
}

/// Transform, clip, and project all triangles. Returns screen-space
/// triangles with inverse depth per vertex.
fn setup_triangles(
    meshes: &[(&TriangleMesh, RigidTransform)],
    cam: &CameraModel,
) -> Vec<ScreenTriangle> {
    let mut out = Vec::new();
    let mut clipped = Vec::with_capacity(4);
    for (mesh, pose) in meshes {
        let to_camera = cam.world_to_camera * pose;
        let cam_vertices: Vec<Point3<f64>> = mesh
            .vertices
            .iter()
            .map(|v| to_camera.transform_point(v))
            .collect();
        for tri in &mesh.triangles {
            let v = [
                cam_vertices[tri[0] as usize],
                cam_vertices[tri[1] as usize],
                cam_vertices[tri[2] as usize],
            ];
            // Beyond the far plane entirely: depth across a triangle stays
            // within the vertex range, so nothing could survive the clamp.
            if v[0].z > cam.far && v[1].z > cam.far && v[2].z > cam.far {
                continue;
            }
            clipped.clear();
            clip_near(&v, cam.near, &mut clipped);
            for t in &clipped {
                if let Some(s) = project_triangle(t, cam) {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Clips one triangle against the plane z = near, re-triangulating the
/// resulting polygon (0, 1, or 2 triangles). True clipping happens before
/// projection because screen-space interpolation is meaningless for
/// vertices at or behind the camera.
fn clip_near(tri: &[Point3<f64>; 3], near: f64, out: &mut Vec<CamTriangle>) {
    let inside = |p: &Point3<f64>| p.z >= near;
    let count = tri.iter().filter(|p| inside(p)).count();
    match count {
        3 => out.push(CamTriangle { v: *tri }),
        0 => {}
        _ => {
            // Sutherland-Hodgman against a single plane.
            let mut poly: Vec<Point3<f64>> = Vec::with_capacity(4);
            for i in 0..3 {
                let a = tri[i];
                let b = tri[(i + 1) % 3];
                let (ia, ib) = (inside(&a), inside(&b));
                if ia {
                    poly.push(a);
                }
                if ia != ib {
                    let t = (near - a.z) / (b.z - a.z);
                    poly.push(Point3::new(
                        a.x + t * (b.x - a.x),
                        a.y + t * (b.y - a.y),
                        near,
                    ));
                }
            }
            // Fan triangulation of the 3- or 4-gon.
            for i in 1..poly.len().saturating_sub(1) {
                out.push(CamTriangle {
                    v: [poly[0], poly[i], poly[i + 1]],
                });
            }
        }
    }
}

fn project_triangle(tri: &CamTriangle, cam: &CameraModel) -> Option<ScreenTriangle> {
    let mut p = [[0.0f64; 3]; 3];
    for (i, v) in tri.v.iter().enumerate() {
        // z >= near > 0 after clipping
        p[i] = [
            cam.fx * v.x / v.z + cam.cx,
            cam.fy * v.y / v.z + cam.cy,
            1.0 / v.z,
        ];
    }
    // Consistent winding lets the fill rule treat all triangles alike; the
    // scene is not culled (collision meshes are not reliably wound).
    let area = orient2d(&p[0], &p[1], &p[2]);
    if area == 0.0 {
        return None;
    }
    if area < 0.0 {
        p.swap(1, 2);
    }

    let min_xf = p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min);
    let max_xf = p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max);
    let min_yf = p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min);
    let max_yf = p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max);
    if max_xf < 0.5 || max_yf < 0.5 {
        return None; // entirely left of / above all pixel centers
    }
    let wmax = (cam.width - 1) as f64;
    let hmax = (cam.height - 1) as f64;
    if min_xf > wmax + 0.5 || min_yf > hmax + 0.5 {
        return None;
    }
    // First and last pixel centers the bounding box can touch.
    let min_x = ((min_xf - 0.5).ceil().max(0.0)) as u32;
    let max_x = ((max_xf - 0.5).floor().min(wmax)) as u32;
    let min_y = ((min_yf - 0.5).ceil().max(0.0)) as u32;
    let max_y = ((max_yf - 0.5).floor().min(hmax)) as u32;
    if min_x > max_x || min_y > max_y {
        return None;
    }
    Some(ScreenTriangle {
        p,
        min_x,
        max_x,
        min_y,
        max_y,
    })
}

#[inline]
fn orient2d(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Is this edge a "top" or "left" edge under y-down screen coordinates?
/// With counter-clockwise winding in those coordinates (positive orient2d),
/// a top edge runs leftward at constant y and a left edge goes upward.
#[inline]
fn is_top_left(a: &[f64; 3], b: &[f64; 3]) -> bool {
    let dy = b[1] - a[1];
    if dy == 0.0 {
        b[0] < a[0] // top edge
    } else {
        dy < 0.0 // left edge
    }
}

/// Rasterizes one triangle into a band of the z-buffer (`rows` holds rows
/// `y0..y1`). Pixel centers sample at (x + 0.5, y + 0.5); edge ties resolve
/// with the top-left fill convention so shared edges paint exactly once.
fn rasterize_into(
    t: &ScreenTriangle,
    rows: &mut [f64],
    width: u32,
    y0: u32,
    y1: u32,
    near: f64,
    far: f64,
) {
    let ys = t.min_y.max(y0);
    let ye = t.max_y.min(y1 - 1);
    if ys > ye {
        return;
    }
    let [a, b, c] = &t.p;
    let area = orient2d(a, b, c);
    let inv_area = 1.0 / area;
    // Edge functions: e0 opposes vertex a (edge b->c), etc.
    let accept0 = is_top_left(b, c);
    let accept1 = is_top_left(c, a);
    let accept2 = is_top_left(a, b);

    for y in ys..=ye {
        let py = y as f64 + 0.5;
        let row = &mut rows[((y - y0) * width) as usize..((y - y0 + 1) * width) as usize];
        for x in t.min_x..=t.max_x {
            let px = x as f64 + 0.5;
            let p = [px, py, 0.0];
            let e0 = orient2d(b, c, &p);
            let e1 = orient2d(c, a, &p);
            let e2 = orient2d(a, b, &p);
            let covered = (e0 > 0.0 || (e0 == 0.0 && accept0))
                && (e1 > 0.0 || (e1 == 0.0 && accept1))
                && (e2 > 0.0 || (e2 == 0.0 && accept2));
            if !covered {
                continue;
            }
            // Perspective-correct depth: 1/z is affine over the triangle.
            let w = (e0 * a[2] + e1 * b[2] + e2 * c[2]) * inv_area;
            let z = 1.0 / w;
            if z > far {
                continue; // far plane discards per fragment
            }
            let z = z.max(near); // guard rounding just below the near plane
            let cell = &mut row[x as usize];
            if *cell == INVALID_DEPTH || z < *cell {
                *cell = z;
            }
        }
    }
}
