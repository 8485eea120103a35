//! Property suites over the pipeline invariants.

use nalgebra::{Point3, Translation3, UnitQuaternion};
use proptest::prelude::*;

use vdi_core::camera::CameraModel;
use vdi_core::depth::INVALID_DEPTH;
use vdi_core::kinematics::{forward_kinematics, posed_meshes, JointState};
use vdi_core::mesh::{box_mesh, TriangleMesh};
use vdi_core::occlusion::{classify_pixel, OcclusionConfig, OcclusionLabel};
use vdi_core::raster::render_vdi;
use vdi_core::stl::{parse_stl, write_binary_stl};
use vdi_core::transform::RigidTransform;
use vdi_core::urdf::parse_urdf;

fn centered_camera(width: u32, height: u32) -> CameraModel {
    CameraModel::new(
        width,
        height,
        0.8 * width as f64,
        0.8 * width as f64,
        width as f64 / 2.0,
        height as f64 / 2.0,
        0.5,
        3.0,
        RigidTransform::identity(),
    )
    .unwrap()
}

fn arm6() -> vdi_core::urdf::RobotModel {
    vdi_core::fixtures::arm6()
}

proptest! {
    /// Raising ε can only grow the occluded set: a pixel occluded at ε0
    /// stays occluded at any ε1 ≥ ε0, and a pixel visible at ε1 was visible
    /// at ε0.
    #[test]
    fn epsilon_monotonicity(
        d in prop_oneof![Just(0.0), 0.01f64..4.0],
        dv in prop_oneof![Just(0.0), 0.01f64..4.0],
        eps0 in 0.0f64..0.2,
        extra in 0.0f64..0.2,
    ) {
        let eps1 = eps0 + extra;
        let l0 = classify_pixel(d, dv, &OcclusionConfig { epsilon: eps0 });
        let l1 = classify_pixel(d, dv, &OcclusionConfig { epsilon: eps1 });
        if l0 == OcclusionLabel::Occluded {
            prop_assert_eq!(l1, OcclusionLabel::Occluded);
        }
        if l1 == OcclusionLabel::Visible {
            prop_assert_eq!(l0, OcclusionLabel::Visible);
        }
        // The robot-coverage labels do not depend on ε at all.
        if matches!(l0, OcclusionLabel::NoRobot | OcclusionLabel::Unknown) {
            prop_assert_eq!(l0, l1);
        }
    }

    /// Projection then de-projection reproduces pixel coordinates and depth.
    #[test]
    fn project_deproject_round_trip(
        u in 0.0f64..640.0,
        v in 0.0f64..480.0,
        depth in 0.5f64..3.0,
    ) {
        let cam = CameraModel::new(
            640, 480, 612.0, 611.5, 318.6, 242.3, 0.5, 3.0,
            RigidTransform::identity(),
        ).unwrap();
        let p = cam.deproject(u, v, depth).unwrap();
        let (u2, v2, d2) = cam.project_camera_frame(&p).unwrap();
        prop_assert!((u - u2).abs() < 1e-9);
        prop_assert!((v - v2).abs() < 1e-9);
        prop_assert!((depth - d2).abs() < 1e-9);
    }

    /// Incremental FK equals the explicit product of chain transforms.
    #[test]
    fn fk_matches_chain_product(values in proptest::collection::vec(-1.5f64..1.5, 6)) {
        let model = arm6();
        let q = JointState::new(
            0.0,
            model
                .joints()
                .iter()
                .zip(&values)
                .map(|(j, &v)| (j.name.clone(), v)),
        );
        let poses = forward_kinematics(&model, &q).unwrap();
        let mut explicit = RigidTransform::identity();
        for joint in model.joints_parent_first() {
            let motion = RigidTransform::from_parts(
                Translation3::identity(),
                UnitQuaternion::from_axis_angle(&joint.axis, q.get(&joint.name).unwrap()),
            );
            explicit = explicit * joint.origin * motion;
            let got = poses.pose(&joint.child_link).unwrap();
            prop_assert!((got.translation.vector - explicit.translation.vector).norm() < 1e-12);
            prop_assert!(got.rotation.angle_to(&explicit.rotation) < 1e-12);
        }
    }

    /// Binary STL round-trip preserves every vertex bitwise (coordinates are
    /// f32 in the format, so inputs are drawn from f32).
    #[test]
    fn stl_binary_round_trip_bitwise(
        facets in proptest::collection::vec(
            proptest::array::uniform9(-100.0f32..100.0), 1..24,
        )
    ) {
        let vertices: Vec<Point3<f64>> = facets
            .iter()
            .flat_map(|f| {
                [
                    Point3::new(f[0] as f64, f[1] as f64, f[2] as f64),
                    Point3::new(f[3] as f64, f[4] as f64, f[5] as f64),
                    Point3::new(f[6] as f64, f[7] as f64, f[8] as f64),
                ]
            })
            .collect();
        let triangles = (0..facets.len() as u32).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
        let mesh = TriangleMesh { vertices, triangles };
        let bytes = write_binary_stl(&mesh);
        let parsed = parse_stl(&bytes).unwrap();
        prop_assert_eq!(&parsed.vertices, &mesh.vertices);
        prop_assert_eq!(&parsed.triangles, &mesh.triangles);
        // Determinism: same bytes, same structure.
        let again = parse_stl(&bytes).unwrap();
        prop_assert_eq!(parsed.vertices, again.vertices);
    }

    /// Adding geometry to a scene never raises any already-valid pixel.
    #[test]
    fn zbuffer_min_composition(
        bx in -0.4f64..0.4,
        by in -0.3f64..0.3,
        bz in 0.8f64..2.5,
        size in 0.1f64..0.5,
    ) {
        let cam = centered_camera(64, 48);
        let base_box = box_mesh(0.6, 0.5, 0.4);
        let base_pose = RigidTransform::translation(0.0, 0.0, 1.5);
        let extra = box_mesh(size, size, size);
        let extra_pose = RigidTransform::translation(bx, by, bz);

        let before = render_vdi(&[(&base_box, base_pose)], &cam);
        let after = render_vdi(&[(&base_box, base_pose), (&extra, extra_pose)], &cam);
        for ((_, _, d0), (_, _, d1)) in before.pixels().zip(after.pixels()) {
            if d0 != INVALID_DEPTH {
                prop_assert!(d1 != INVALID_DEPTH);
                prop_assert!(d1 <= d0 + 1e-12);
            }
        }
    }

    /// Every valid rendered pixel stays inside the camera's depth range.
    #[test]
    fn frustum_containment(
        values in proptest::collection::vec(-1.2f64..1.2, 6),
    ) {
        let model = arm6();
        let cam = vdi_core::fixtures::camera_sim();
        let q = JointState::new(
            0.0,
            model.joints().iter().zip(&values).map(|(j, &v)| (j.name.clone(), v)),
        );
        let poses = forward_kinematics(&model, &q).unwrap();
        let pairs = posed_meshes(&model, &poses).unwrap();
        let img = render_vdi(&pairs, &cam);
        for (_, _, d) in img.pixels() {
            if d != INVALID_DEPTH {
                prop_assert!(d >= cam.near - 1e-9);
                prop_assert!(d <= cam.far + 1e-9);
            }
        }
    }
}

/// FK is continuous: a tiny joint perturbation moves vertices by no more
/// than the kinematic chain length times the perturbation.
#[test]
fn fk_continuity_bound() {
    let model = arm6();
    // Generous bound: total link extent plus mesh radii.
    let chain_bound = 3.0;
    let delta = 1e-6;
    let base = JointState::new(
        0.0,
        model.joints().iter().map(|j| (j.name.clone(), 0.4)),
    );
    let base_poses = forward_kinematics(&model, &base).unwrap();
    let base_pairs = posed_meshes(&model, &base_poses).unwrap();

    for joint in model.joints() {
        let mut qp = base.clone();
        qp.positions.insert(joint.name.clone(), 0.4 + delta);
        let poses = forward_kinematics(&model, &qp).unwrap();
        let pairs = posed_meshes(&model, &poses).unwrap();
        for ((mesh_a, pose_a), (_, pose_b)) in base_pairs.iter().zip(&pairs) {
            for v in &mesh_a.vertices {
                let a = pose_a.transform_point(v);
                let b = pose_b.transform_point(v);
                assert!(
                    (a - b).norm() <= chain_bound * delta,
                    "perturbing {} moved a vertex {:.3e}",
                    joint.name,
                    (a - b).norm()
                );
            }
        }
    }
}

/// Classifying a full frame and then reading pixels matches calling the
/// classifier directly, everywhere.
#[test]
fn mask_lookup_consistent_with_classifier() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let (w, h) = (80u32, 60u32);
    let mut actual = vdi_core::DepthImage::new_invalid(w, h);
    let mut vdi = vdi_core::DepthImage::new_invalid(w, h);
    for y in 0..h {
        for x in 0..w {
            if rng.random::<f64>() < 0.8 {
                actual.set(x, y, rng.random_range(0.5..3.0));
            }
            if rng.random::<f64>() < 0.8 {
                vdi.set(x, y, rng.random_range(0.5..3.0));
            }
        }
    }
    let cfg = OcclusionConfig::default();
    let mask = vdi_core::occlusion::occlusion_mask(&actual, &vdi, &cfg).unwrap();
    for _ in 0..1000 {
        let x = rng.random_range(0..w);
        let y = rng.random_range(0..h);
        assert_eq!(
            mask.get(x, y),
            classify_pixel(actual.get(x, y), vdi.get(x, y), &cfg)
        );
    }
    assert_eq!(mask.label_counts().total(), (w * h) as usize);
}

/// Parsing the same URDF twice produces structurally identical models.
#[test]
fn urdf_parse_deterministic() {
    let a = parse_urdf(vdi_core::fixtures::ARM6_URDF, std::path::Path::new(".")).unwrap();
    let b = parse_urdf(vdi_core::fixtures::ARM6_URDF, std::path::Path::new(".")).unwrap();
    assert_eq!(a.links().len(), b.links().len());
    assert_eq!(a.root_link(), b.root_link());
    for (ja, jb) in a.joints().iter().zip(b.joints()) {
        assert_eq!(ja.name, jb.name);
        assert_eq!(ja.kind, jb.kind);
        assert_eq!(ja.origin, jb.origin);
        assert_eq!(ja.axis, jb.axis);
    }
    for (la, lb) in a.links().iter().zip(b.links()) {
        assert_eq!(la.name, lb.name);
        match (&la.collision, &lb.collision) {
            (Some(ca), Some(cb)) => {
                assert_eq!(ca.mesh.vertices, cb.mesh.vertices);
                assert_eq!(ca.mesh.triangles, cb.mesh.triangles);
                assert_eq!(ca.origin, cb.origin);
            }
            (None, None) => {}
            _ => panic!("collision presence differs for {}", la.name),
        }
    }
}

/// A depth-first walk from the root visits every link exactly once.
#[test]
fn depth_first_walk_is_a_permutation_of_links() {
    let model = arm6();
    let mut walk = model.depth_first_links();
    assert_eq!(walk.len(), model.links().len());
    walk.sort_unstable();
    let mut names: Vec<&str> = model.links().iter().map(|l| l.name.as_str()).collect();
    names.sort_unstable();
    assert_eq!(walk, names);
}

/// Rendering is bitwise deterministic across repeated calls (parallel tiles
/// must not introduce scheduling dependence).
#[test]
fn render_bitwise_deterministic() {
    let model = arm6();
    let cam = vdi_core::fixtures::camera_sim();
    let q = JointState::new(
        0.0,
        model.joints().iter().enumerate().map(|(i, j)| (j.name.clone(), 0.2 * i as f64)),
    );
    let imgs: Vec<_> = (0..3)
        .map(|_| vdi_core::raster::render_frame(&model, &q, &cam).unwrap())
        .collect();
    assert_eq!(imgs[0], imgs[1]);
    assert_eq!(imgs[1], imgs[2]);
}

/// Scale covariance: doubling a camera-frame point leaves its pixel fixed
/// and doubles its depth.
#[test]
fn projection_scale_covariant() {
    let cam = centered_camera(640, 480);
    let p = Point3::new(0.3, -0.2, 1.1);
    let q = Point3::from(p.coords * 2.0);
    let (u1, v1, d1) = cam.project_camera_frame(&p).unwrap();
    let (u2, v2, d2) = cam.project_camera_frame(&q).unwrap();
    assert!((u1 - u2).abs() < 1e-9 && (v1 - v2).abs() < 1e-9);
    assert!((2.0 * d1 - d2).abs() < 1e-12);
}

/// Perturbation sanity for the whole pipeline: moving one joint slightly
/// moves silhouette pixels, not the whole image (locality smoke check).
#[test]
fn small_joint_change_small_silhouette_change() {
    let model = arm6();
    let cam = vdi_core::fixtures::camera_sim();
    let q0 = JointState::zeros(&model);
    let mut q1 = q0.clone();
    q1.positions.insert("wrist_3".into(), 0.02);
    let a = vdi_core::raster::render_frame(&model, &q0, &cam).unwrap();
    let b = vdi_core::raster::render_frame(&model, &q1, &cam).unwrap();
    let diff = a
        .data()
        .iter()
        .zip(b.data())
        .filter(|(x, y)| {
            let vx = **x != INVALID_DEPTH;
            let vy = **y != INVALID_DEPTH;
            vx != vy
        })
        .count();
    let total = (cam.width * cam.height) as usize;
    assert!(diff < total / 100, "tiny wrist move flipped {diff} pixels");
}

#[test]
fn velocity_vector_finite_after_long_tracking_run() {
    use vdi_core::track::{cv_update, PolicyConfig, TrackState};
    let cfg = PolicyConfig {
        occlusion_threshold: 0.05,
        velocity_smoothing: 0.3,
    };
    let mut state = TrackState::empty();
    for k in 0..1000 {
        let t = k as f64 * 0.033;
        let p = Point3::new((0.3 * t).sin(), 0.1 * t, 1.0);
        state = cv_update(&state, Some(p), 0.0, t, &cfg).unwrap();
    }
    assert!(state.velocity.iter().all(|c| c.is_finite()));
    assert!(state.velocity.norm() < 10.0);
}
