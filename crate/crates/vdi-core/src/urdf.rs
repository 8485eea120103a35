//! URDF robot descriptions: parsing and the kinematic tree model.
//!
//! Only the parts of URDF the renderer needs are read: links, joints, and
//! `collision` geometry. Collision shapes are deliberately preferred over
//! `visual` ones — they are slightly inflated convex hulls on most robots,
//! which over-marks occlusion a little and absorbs small calibration error.
//! `visual`, `inertial`, `transmission`, and `gazebo` blocks are skipped
//! without complaint.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use nalgebra::{Unit, Vector3};
use thiserror::Error;

use crate::mesh::{box_mesh, cylinder_mesh, sphere_mesh, MeshError, TriangleMesh};
use crate::stl::{parse_stl, StlError};
use crate::transform::{transform_from_xyz_rpy, unit_axis, RigidTransform};

/// Segment count used when tessellating cylinder and sphere primitives.
pub const PRIMITIVE_SEGMENTS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
}

impl JointKind {
    pub fn is_fixed(self) -> bool {
        matches!(self, JointKind::Fixed)
    }
}

impl std::fmt::Display for JointKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            JointKind::Revolute => "revolute",
            JointKind::Continuous => "continuous",
            JointKind::Prismatic => "prismatic",
            JointKind::Fixed => "fixed",
        };
        f.write_str(s)
    }
}

/// A joint connecting a parent link to a child link.
#[derive(Debug, Clone)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    pub parent_link: String,
    pub child_link: String,
    /// Child-frame origin relative to the parent link frame, before motion.
    pub origin: RigidTransform,
    /// Motion axis in the child frame, unit length.
    pub axis: Unit<Vector3<f64>>,
    /// `[lower, upper]` position limits (radians or meters), when declared.
    pub limits: Option<(f64, f64)>,
}

/// Collision geometry attached to a link.
#[derive(Debug, Clone)]
pub struct Collision {
    pub mesh: TriangleMesh,
    /// Mesh-to-link transform.
    pub origin: RigidTransform,
}

#[derive(Debug, Clone)]
pub struct Link {
    pub name: String,
    pub collision: Option<Collision>,
}

/// An immutable kinematic tree: links plus the joints connecting them.
///
/// Construction validates the tree invariant (single root, exactly one
/// parent joint per non-root link, no cycles), so any `RobotModel` in hand
/// is safe to traverse.
#[derive(Debug, Clone)]
pub struct RobotModel {
    links: Vec<Link>,
    joints: Vec<Joint>,
    root_link: String,
    link_index: HashMap<String, usize>,
    /// Joint indices ordered parent-before-child for single-pass FK.
    traversal: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum UrdfError {
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("document root is <{0}>, expected <robot>")]
    NotARobot(String),
    #[error("<{element}> is missing required attribute '{attribute}'")]
    MissingAttribute {
        element: &'static str,
        attribute: &'static str,
    },
    #[error("<{element}> has a missing required child <{child}>")]
    MissingChild {
        element: String,
        child: &'static str,
    },
    #[error("cannot parse '{value}' in <{element}> as numbers")]
    BadNumber { element: String, value: String },
    #[error("duplicate link name '{0}'")]
    DuplicateLink(String),
    #[error("duplicate joint name '{0}'")]
    DuplicateJoint(String),
    #[error("joint '{joint}' references undeclared link '{link}'")]
    UnknownLink { joint: String, link: String },
    #[error("joint graph contains a cycle: {0}")]
    Cycle(String),
    #[error("link '{link}' has multiple parent joints")]
    MultipleParents { link: String },
    #[error("model has multiple root links: {0:?}")]
    MultipleRoots(Vec<String>),
    #[error("model declares no links")]
    NoLinks,
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("joint '{joint}' has a zero-length axis")]
    ZeroAxis { joint: String },
    #[error("invalid geometry on link '{link}': {detail}")]
    InvalidGeometry { link: String, detail: String },
    #[error("collision mesh of link '{link}' has no triangles")]
    EmptyMesh { link: String },
    #[error("reading mesh file '{path}': {source}")]
    MeshIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing mesh file '{path}': {source}")]
    MeshParse { path: PathBuf, source: StlError },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

impl RobotModel {
    /// Assembles and validates a model from parts.
    pub fn from_parts(links: Vec<Link>, joints: Vec<Joint>) -> Result<Self, UrdfError> {
        if links.is_empty() {
            return Err(UrdfError::NoLinks);
        }
        let mut link_index = HashMap::new();
        for (i, link) in links.iter().enumerate() {
            if link_index.insert(link.name.clone(), i).is_some() {
                return Err(UrdfError::DuplicateLink(link.name.clone()));
            }
        }
        let mut joint_names = HashMap::new();
        let mut parent_joint: Vec<Option<usize>> = vec![None; links.len()];
        for (j, joint) in joints.iter().enumerate() {
            if joint_names.insert(joint.name.clone(), j).is_some() {
                return Err(UrdfError::DuplicateJoint(joint.name.clone()));
            }
            if joint.parent_link == joint.child_link {
                return Err(UrdfError::Cycle(format!(
                    "joint '{}' connects link '{}' to itself",
                    joint.name, joint.parent_link
                )));
            }
            for link in [&joint.parent_link, &joint.child_link] {
                if !link_index.contains_key(link) {
                    return Err(UrdfError::UnknownLink {
                        joint: joint.name.clone(),
                        link: link.clone(),
                    });
                }
            }
            let child = link_index[&joint.child_link];
            if parent_joint[child].replace(j).is_some() {
                return Err(UrdfError::MultipleParents {
                    link: joint.child_link.clone(),
                });
            }
        }

        let roots: Vec<&Link> = links
            .iter()
            .enumerate()
            .filter(|(i, _)| parent_joint[*i].is_none())
            .map(|(_, l)| l)
            .collect();
        let root_link = match roots.as_slice() {
            [] => {
                return Err(UrdfError::Cycle(
                    "every link has a parent joint".to_string(),
                ))
            }
            [root] => root.name.clone(),
            many => {
                return Err(UrdfError::MultipleRoots(
                    many.iter().map(|l| l.name.clone()).collect(),
                ))
            }
        };

        // Breadth-first walk from the root; traversal order doubles as the
        // cycle check (a cycle leaves its links unreached).
        let mut children: HashMap<&str, Vec<usize>> = HashMap::new();
        for (j, joint) in joints.iter().enumerate() {
            children.entry(&joint.parent_link).or_default().push(j);
        }
        let mut traversal = Vec::with_capacity(joints.len());
        let mut queue = std::collections::VecDeque::from([root_link.as_str()]);
        let mut reached = 1usize;
        while let Some(link) = queue.pop_front() {
            if let Some(js) = children.get(link) {
                for &j in js {
                    traversal.push(j);
                    reached += 1;
                    queue.push_back(&joints[j].child_link);
                }
            }
        }
        if reached != links.len() {
            let unreachable: Vec<&str> = {
                let mut seen = vec![false; links.len()];
                seen[link_index[&root_link]] = true;
                for &j in &traversal {
                    seen[link_index[&joints[j].child_link]] = true;
                }
                links
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !seen[*i])
                    .map(|(_, l)| l.name.as_str())
                    .collect()
            };
            return Err(UrdfError::Cycle(format!(
                "links not reachable from root '{root_link}': {unreachable:?}"
            )));
        }

        Ok(Self {
            links,
            joints,
            root_link,
            link_index,
            traversal,
        })
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn root_link(&self) -> &str {
        &self.root_link
    }

    pub fn link(&self, name: &str) -> Option<&Link> {
        self.link_index.get(name).map(|&i| &self.links[i])
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    /// Joints ordered so that a parent link's pose is always computed before
    /// any of its children.
    pub fn joints_parent_first(&self) -> impl Iterator<Item = &Joint> {
        self.traversal.iter().map(|&j| &self.joints[j])
    }

    /// Link names in depth-first order from the root; visits each exactly once.
    pub fn depth_first_links(&self) -> Vec<&str> {
        let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
        for joint in &self.joints {
            children
                .entry(joint.parent_link.as_str())
                .or_default()
                .push(joint.child_link.as_str());
        }
        let mut out = Vec::with_capacity(self.links.len());
        let mut stack = vec![self.root_link.as_str()];
        while let Some(link) = stack.pop() {
            out.push(link);
            if let Some(cs) = children.get(link) {
                for &c in cs.iter().rev() {
                    stack.push(c);
                }
            }
        }
        out
    }
}

/// Parses a URDF document. Mesh filenames inside `collision` blocks are
/// resolved relative to `mesh_base`.
pub fn parse_urdf(xml_text: &str, mesh_base: &Path) -> Result<RobotModel, UrdfError> {
    let doc = roxmltree::Document::parse(xml_text)?;
    let robot = doc.root_element();
    if robot.tag_name().name() != "robot" {
        return Err(UrdfError::NotARobot(robot.tag_name().name().to_string()));
    }

    let mut links = Vec::new();
    let mut joints = Vec::new();
    for node in robot.children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "link" => links.push(parse_link(node, mesh_base)?),
            "joint" => joints.push(parse_joint(node)?),
            // materials, transmissions, gazebo extensions, ...
            _ => {}
        }
    }
    RobotModel::from_parts(links, joints)
}

/// Reads and parses a URDF file; meshes resolve relative to its directory.
pub fn load_urdf(path: &Path) -> Result<RobotModel, UrdfError> {
    let text = std::fs::read_to_string(path).map_err(|source| UrdfError::MeshIo {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_urdf(&text, base)
}

fn req_attr<'a>(
    node: roxmltree::Node<'a, 'a>,
    element: &'static str,
    attribute: &'static str,
) -> Result<&'a str, UrdfError> {
    node.attribute(attribute).ok_or(UrdfError::MissingAttribute {
        element,
        attribute,
    })
}

fn parse_floats(node: roxmltree::Node, attr: &str, n: usize) -> Result<Vec<f64>, UrdfError> {
    let element = node.tag_name().name().to_string();
    let Some(raw) = node.attribute(attr) else {
        return Ok(vec![0.0; n]);
    };
    let vals: Result<Vec<f64>, _> = raw.split_whitespace().map(str::parse::<f64>).collect();
    match vals {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(UrdfError::BadNumber {
            element,
            value: raw.to_string(),
        }),
    }
}

fn parse_origin(parent: roxmltree::Node) -> Result<RigidTransform, UrdfError> {
    match parent.children().find(|n| n.has_tag_name("origin")) {
        Some(node) => {
            let xyz = parse_floats(node, "xyz", 3)?;
            let rpy = parse_floats(node, "rpy", 3)?;
            Ok(transform_from_xyz_rpy(
                [xyz[0], xyz[1], xyz[2]],
                [rpy[0], rpy[1], rpy[2]],
            ))
        }
        None => Ok(RigidTransform::identity()),
    }
}

fn parse_link(node: roxmltree::Node, mesh_base: &Path) -> Result<Link, UrdfError> {
    let name = req_attr(node, "link", "name")?.to_string();

    let mut collisions: Vec<Collision> = Vec::new();
    for coll in node.children().filter(|n| n.has_tag_name("collision")) {
        let origin = parse_origin(coll)?;
        let geometry = coll
            .children()
            .find(|n| n.has_tag_name("geometry"))
            .ok_or_else(|| UrdfError::MissingChild {
                element: format!("collision of link '{name}'"),
                child: "geometry",
            })?;
        let mesh = parse_geometry(geometry, &name, mesh_base)?;
        if mesh.triangle_count() == 0 {
            return Err(UrdfError::EmptyMesh { link: name });
        }
        collisions.push(Collision { mesh, origin });
    }

    // Several collision blocks collapse into one mesh in the link frame.
    let collision = match collisions.len() {
        0 => None,
        1 => collisions.pop(),
        _ => {
            let mut merged = TriangleMesh {
                vertices: Vec::new(),
                triangles: Vec::new(),
            };
            for c in &collisions {
                merged.merge(&c.mesh.transformed(&c.origin));
            }
            Some(Collision {
                mesh: merged,
                origin: RigidTransform::identity(),
            })
        }
    };

    Ok(Link { name, collision })
}

fn parse_geometry(
    geometry: roxmltree::Node,
    link: &str,
    mesh_base: &Path,
) -> Result<TriangleMesh, UrdfError> {
    let shape = geometry
        .children()
        .find(|n| n.is_element())
        .ok_or_else(|| UrdfError::MissingChild {
            element: format!("geometry of link '{link}'"),
            child: "box|cylinder|sphere|mesh",
        })?;
    let positive = |vals: &[f64], what: &str| -> Result<(), UrdfError> {
        if vals.iter().all(|&v| v > 0.0) {
            Ok(())
        } else {
            Err(UrdfError::InvalidGeometry {
                link: link.to_string(),
                detail: format!("{what} must be positive"),
            })
        }
    };
    match shape.tag_name().name() {
        "box" => {
            let size = parse_floats(shape, "size", 3)?;
            positive(&size, "box size")?;
            Ok(box_mesh(size[0], size[1], size[2]))
        }
        "cylinder" => {
            let radius = parse_floats(shape, "radius", 1)?[0];
            let length = parse_floats(shape, "length", 1)?[0];
            positive(&[radius, length], "cylinder radius/length")?;
            Ok(cylinder_mesh(radius, length, PRIMITIVE_SEGMENTS))
        }
        "sphere" => {
            let radius = parse_floats(shape, "radius", 1)?[0];
            positive(&[radius], "sphere radius")?;
            Ok(sphere_mesh(radius, PRIMITIVE_SEGMENTS))
        }
        "mesh" => {
            let filename = req_attr(shape, "mesh", "filename")?;
            let scale = if shape.attribute("scale").is_some() {
                parse_floats(shape, "scale", 3)?
            } else {
                vec![1.0, 1.0, 1.0]
            };
            let mut mesh = load_mesh_file(filename, mesh_base)?;
            mesh.apply_scale(Vector3::new(scale[0], scale[1], scale[2]));
            Ok(mesh)
        }
        other => Err(UrdfError::Unsupported(format!(
            "geometry <{other}> on link '{link}'"
        ))),
    }
}

fn load_mesh_file(filename: &str, mesh_base: &Path) -> Result<TriangleMesh, UrdfError> {
    if filename.starts_with("package://") {
        return Err(UrdfError::Unsupported(format!(
            "package:// mesh URI '{filename}' (resolve it to a path first)"
        )));
    }
    let stripped = filename.strip_prefix("file://").unwrap_or(filename);
    let path = {
        let p = Path::new(stripped);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            mesh_base.join(p)
        }
    };
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    if ext.as_deref() != Some("stl") {
        return Err(UrdfError::Unsupported(format!(
            "mesh format of '{filename}' (only STL is supported)"
        )));
    }
    let bytes = std::fs::read(&path).map_err(|source| UrdfError::MeshIo {
        path: path.clone(),
        source,
    })?;
    parse_stl(&bytes).map_err(|source| UrdfError::MeshParse { path, source })
}

fn parse_joint(node: roxmltree::Node) -> Result<Joint, UrdfError> {
    let name = req_attr(node, "joint", "name")?.to_string();
    let kind = match req_attr(node, "joint", "type")? {
        "revolute" => JointKind::Revolute,
        "continuous" => JointKind::Continuous,
        "prismatic" => JointKind::Prismatic,
        "fixed" => JointKind::Fixed,
        other => {
            return Err(UrdfError::Unsupported(format!(
                "joint type '{other}' on joint '{name}'"
            )))
        }
    };
    let link_ref = |child: &'static str| -> Result<String, UrdfError> {
        let n = node
            .children()
            .find(|n| n.has_tag_name(child))
            .ok_or_else(|| UrdfError::MissingChild {
                element: format!("joint '{name}'"),
                child,
            })?;
        Ok(req_attr(n, "parent/child", "link")?.to_string())
    };
    let parent_link = link_ref("parent")?;
    let child_link = link_ref("child")?;
    let origin = parse_origin(node)?;

    let axis = match node.children().find(|n| n.has_tag_name("axis")) {
        Some(a) => {
            let v = parse_floats(a, "xyz", 3)?;
            unit_axis(Vector3::new(v[0], v[1], v[2]))
                .ok_or_else(|| UrdfError::ZeroAxis { joint: name.clone() })?
        }
        None => Unit::new_unchecked(Vector3::x()),
    };

    let limits = node
        .children()
        .find(|n| n.has_tag_name("limit"))
        .and_then(|l| {
            let lower = l.attribute("lower")?.parse::<f64>().ok()?;
            let upper = l.attribute("upper")?.parse::<f64>().ok()?;
            Some((lower, upper))
        });

    Ok(Joint {
        name,
        kind,
        parent_link,
        child_link,
        origin,
        axis,
        limits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::write_binary_stl;

    const MINIMAL: &str = r#"<robot name="r"><link name="only"/></robot>"#;

    #[test]
    fn minimal_single_link() {
        let model = parse_urdf(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(model.links().len(), 1);
        assert_eq!(model.joints().len(), 0);
        assert_eq!(model.root_link(), "only");
    }

    #[test]
    fn rejects_non_robot_root() {
        let err = parse_urdf("<model/>", Path::new(".")).unwrap_err();
        assert!(matches!(err, UrdfError::NotARobot(_)));
    }

    #[test]
    fn rejects_malformed_xml() {
        let err = parse_urdf("<robot><link", Path::new(".")).unwrap_err();
        assert!(matches!(err, UrdfError::Xml(_)));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let xml = r#"<robot name="r">
            <link name="a"/>
            <joint name="j" type="revolute">
              <parent link="a"/><child link="a"/><axis xyz="0 0 1"/>
            </joint>
        </robot>"#;
        let err = parse_urdf(xml, Path::new(".")).unwrap_err();
        assert!(matches!(err, UrdfError::Cycle(_)));
    }

    #[test]
    fn two_link_loop_is_a_cycle() {
        let xml = r#"<robot name="r">
            <link name="a"/><link name="b"/>
            <joint name="j1" type="fixed"><parent link="a"/><child link="b"/></joint>
            <joint name="j2" type="fixed"><parent link="b"/><child link="a"/></joint>
        </robot>"#;
        let err = parse_urdf(xml, Path::new(".")).unwrap_err();
        assert!(matches!(err, UrdfError::Cycle(_)));
    }

    #[test]
    fn unknown_link_reference() {
        let xml = r#"<robot name="r">
            <link name="a"/>
            <joint name="j" type="fixed"><parent link="a"/><child link="ghost"/></joint>
        </robot>"#;
        let err = parse_urdf(xml, Path::new(".")).unwrap_err();
        assert!(matches!(err, UrdfError::UnknownLink { .. }));
    }

    #[test]
    fn planar_joint_unsupported() {
        let xml = r#"<robot name="r">
            <link name="a"/><link name="b"/>
            <joint name="j" type="planar"><parent link="a"/><child link="b"/></joint>
        </robot>"#;
        let err = parse_urdf(xml, Path::new(".")).unwrap_err();
        assert!(matches!(err, UrdfError::Unsupported(_)));
    }

    #[test]
    fn visual_and_inertial_are_skipped() {
        let xml = r#"<robot name="r">
            <link name="a">
              <inertial><mass value="1.0"/></inertial>
              <visual><geometry><box size="9 9 9"/></geometry></visual>
              <collision><geometry><box size="0.1 0.2 0.3"/></geometry></collision>
            </link>
        </robot>"#;
        let model = parse_urdf(xml, Path::new(".")).unwrap();
        let mesh = &model.link("a").unwrap().collision.as_ref().unwrap().mesh;
        let bb = mesh.aabb().unwrap();
        assert!((bb.max.z - 0.15).abs() < 1e-12); // collision, not visual, size
    }

    #[test]
    fn primitives_tessellate() {
        let xml = r#"<robot name="r">
            <link name="a"><collision><geometry><cylinder radius="0.05" length="0.2"/></geometry></collision></link>
            <link name="b"><collision><geometry><sphere radius="0.07"/></geometry></collision></link>
            <joint name="j" type="fixed"><parent link="a"/><child link="b"/></joint>
        </robot>"#;
        let model = parse_urdf(xml, Path::new(".")).unwrap();
        let cyl = &model.link("a").unwrap().collision.as_ref().unwrap().mesh;
        assert_eq!(cyl.triangle_count(), 4 * PRIMITIVE_SEGMENTS as usize);
        assert!(model.link("b").unwrap().collision.is_some());
    }

    #[test]
    fn mesh_file_with_scale() {
        let dir = std::env::temp_dir().join("vdi_urdf_mesh_test");
        std::fs::create_dir_all(&dir).unwrap();
        let stl = write_binary_stl(&box_mesh(1.0, 1.0, 1.0));
        std::fs::write(dir.join("part.stl"), stl).unwrap();
        let xml = r#"<robot name="r">
            <link name="a"><collision>
              <origin xyz="0 0 1" rpy="0 0 0"/>
              <geometry><mesh filename="part.stl" scale="2 2 2"/></geometry>
            </collision></link>
        </robot>"#;
        let model = parse_urdf(xml, &dir).unwrap();
        let coll = model.link("a").unwrap().collision.as_ref().unwrap();
        let bb = coll.mesh.aabb().unwrap();
        assert!((bb.max.x - 1.0).abs() < 1e-12); // scaled from 0.5
        let top = coll.origin.transform_point(&bb.max);
        assert!((top.z - 2.0).abs() < 1e-12); // origin shifts +1
    }

    #[test]
    fn empty_stl_cannot_attach_to_a_link() {
        let dir = std::env::temp_dir().join("vdi_urdf_empty_mesh");
        std::fs::create_dir_all(&dir).unwrap();
        let empty = TriangleMesh {
            vertices: vec![],
            triangles: vec![],
        };
        std::fs::write(dir.join("empty.stl"), write_binary_stl(&empty)).unwrap();
        let xml = r#"<robot name="r">
            <link name="a"><collision>
              <geometry><mesh filename="empty.stl"/></geometry>
            </collision></link>
        </robot>"#;
        let err = parse_urdf(xml, &dir).unwrap_err();
        assert!(matches!(err, UrdfError::EmptyMesh { .. }));
    }

    #[test]
    fn package_uri_rejected() {
        let xml = r#"<robot name="r">
            <link name="a"><collision>
              <geometry><mesh filename="package://pkg/mesh.stl"/></geometry>
            </collision></link>
        </robot>"#;
        let err = parse_urdf(xml, Path::new(".")).unwrap_err();
        assert!(matches!(err, UrdfError::Unsupported(_)));
    }

    #[test]
    fn missing_mesh_file_names_path() {
        let xml = r#"<robot name="r">
            <link name="a"><collision>
              <geometry><mesh filename="nope.stl"/></geometry>
            </collision></link>
        </robot>"#;
        let err = parse_urdf(xml, Path::new("/definitely/absent")).unwrap_err();
        match err {
            UrdfError::MeshIo { path, .. } => {
                assert!(path.to_string_lossy().contains("nope.stl"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multiple_collisions_merge_into_link_frame() {
        let xml = r#"<robot name="r">
            <link name="a">
              <collision><origin xyz="1 0 0"/><geometry><box size="0.2 0.2 0.2"/></geometry></collision>
              <collision><origin xyz="-1 0 0"/><geometry><box size="0.2 0.2 0.2"/></geometry></collision>
            </link>
        </robot>"#;
        let model = parse_urdf(xml, Path::new(".")).unwrap();
        let coll = model.link("a").unwrap().collision.as_ref().unwrap();
        assert_eq!(coll.mesh.triangle_count(), 24);
        let bb = coll.mesh.aabb().unwrap();
        assert!((bb.min.x + 1.1).abs() < 1e-12);
        assert!((bb.max.x - 1.1).abs() < 1e-12);
    }

    #[test]
    fn depth_first_walk_visits_each_link_once() {
        let xml = r#"<robot name="r">
            <link name="a"/><link name="b"/><link name="c"/><link name="d"/>
            <joint name="j1" type="fixed"><parent link="a"/><child link="b"/></joint>
            <joint name="j2" type="fixed"><parent link="a"/><child link="c"/></joint>
            <joint name="j3" type="fixed"><parent link="c"/><child link="d"/></joint>
        </robot>"#;
        let model = parse_urdf(xml, Path::new(".")).unwrap();
        let walk = model.depth_first_links();
        assert_eq!(walk.len(), 4);
        let mut sorted = walk.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }
}
