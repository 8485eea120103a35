//! Forward kinematics: joint positions to world-frame link poses.
//!
//! The world frame is the robot root-link frame. Every pose produced here is
//! the per-link model transform that the renderer composes with the camera
//! view and projection.

use std::collections::BTreeMap;

use nalgebra::{Translation3, UnitQuaternion};
use thiserror::Error;

use crate::mesh::TriangleMesh;
use crate::transform::RigidTransform;
use crate::urdf::{JointKind, RobotModel};

/// Joint positions at an instant. Revolute/continuous values are radians,
/// prismatic values meters; fixed joints need no entry.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub timestamp: f64,
    pub positions: BTreeMap<String, f64>,
}

impl JointState {
    pub fn new(timestamp: f64, positions: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self {
            timestamp,
            positions: positions.into_iter().collect(),
        }
    }

    /// All of `model`'s non-fixed joints at position zero.
    pub fn zeros(model: &RobotModel) -> Self {
        Self::new(
            0.0,
            model
                .joints()
                .iter()
                .filter(|j| !j.kind.is_fixed())
                .map(|j| (j.name.clone(), 0.0)),
        )
    }

    pub fn get(&self, joint: &str) -> Option<f64> {
        self.positions.get(joint).copied()
    }
}

/// World-frame pose of every link, plus names of joints whose commanded
/// position fell outside their declared limits. Out-of-limit positions are
/// rendered as measured — the physical robot is the source of truth — but
/// flagged so callers can surface the mismatch.
#[derive(Debug, Clone)]
pub struct LinkPoses {
    poses: BTreeMap<String, RigidTransform>,
    pub out_of_limits: Vec<String>,
}

impl LinkPoses {
    /// Wraps externally computed poses (recorded FK, another solver).
    pub fn from_poses(poses: impl IntoIterator<Item = (String, RigidTransform)>) -> Self {
        Self {
            poses: poses.into_iter().collect(),
            out_of_limits: Vec::new(),
        }
    }

    pub fn pose(&self, link: &str) -> Option<&RigidTransform> {
        self.poses.get(link)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &RigidTransform)> {
        self.poses.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("joint state is missing a value for joint '{0}'")]
    MissingJointValue(String),
    #[error("joint '{0}' has a non-finite position")]
    NonFinitePosition(String),
    #[error("no pose for link '{0}' (collision geometry present)")]
    MissingLinkPose(String),
}

/// Computes world-frame poses for all links. The root link is the identity;
/// each child pose is `parent ∘ joint.origin ∘ motion(q)`.
pub fn forward_kinematics(
    model: &RobotModel,
    q: &JointState,
) -> Result<LinkPoses, KinematicsError> {
    let mut poses: BTreeMap<String, RigidTransform> = BTreeMap::new();
    poses.insert(model.root_link().to_string(), RigidTransform::identity());
    let mut out_of_limits = Vec::new();

    for joint in model.joints_parent_first() {
        let motion = match joint.kind {
            JointKind::Fixed => RigidTransform::identity(),
            kind => {
                let value = q
                    .get(&joint.name)
                    .ok_or_else(|| KinematicsError::MissingJointValue(joint.name.clone()))?;
                if !value.is_finite() {
                    return Err(KinematicsError::NonFinitePosition(joint.name.clone()));
                }
                if let Some((lower, upper)) = joint.limits {
                    if value < lower || value > upper {
                        out_of_limits.push(joint.name.clone());
                    }
                }
                match kind {
                    JointKind::Revolute | JointKind::Continuous => RigidTransform::from_parts(
                        Translation3::identity(),
                        UnitQuaternion::from_axis_angle(&joint.axis, value),
                    ),
                    JointKind::Prismatic => RigidTransform::from_parts(
                        Translation3::from(joint.axis.into_inner() * value),
                        UnitQuaternion::identity(),
                    ),
                    JointKind::Fixed => unreachable!(),
                }
            }
        };
        // Parent pose exists: traversal is parent-before-child.
        let parent = poses[&joint.parent_link];
        poses.insert(joint.child_link.clone(), parent * joint.origin * motion);
    }

    Ok(LinkPoses {
        poses,
        out_of_limits,
    })
}

/// Pairs every link that has collision geometry with its world-frame mesh
/// transform (`link pose ∘ mesh-to-link origin`). Links without collision
/// geometry are omitted.
pub fn posed_meshes<'m>(
    model: &'m RobotModel,
    poses: &LinkPoses,
) -> Result<Vec<(&'m TriangleMesh, RigidTransform)>, KinematicsError> {
    let mut out = Vec::new();
    for link in model.links() {
        let Some(collision) = &link.collision else {
            continue;
        };
        let pose = poses
            .pose(&link.name)
            .ok_or_else(|| KinematicsError::MissingLinkPose(link.name.clone()))?;
        out.push((&collision.mesh, pose * collision.origin));
    }
    Ok(out)
}

/// Parses a joint trajectory CSV: header `t,<joint1>,...,<jointN>`, one row
/// per frame, seconds in the first column.
pub fn parse_trajectory(text: &str) -> Result<Vec<JointState>, TrajectoryError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (_, header) = lines.next().ok_or(TrajectoryError::Empty)?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"t") {
        return Err(TrajectoryError::BadHeader {
            found: header.to_string(),
        });
    }
    let joints: Vec<String> = columns[1..].iter().map(|s| s.to_string()).collect();
    if joints.is_empty() {
        return Err(TrajectoryError::BadHeader {
            found: header.to_string(),
        });
    }

    let mut states = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(TrajectoryError::BadRow {
                row,
                detail: format!(
                    "expected {} fields, found {}",
                    columns.len(),
                    fields.len()
                ),
            });
        }
        let mut values = Vec::with_capacity(fields.len());
        for f in &fields {
            let v: f64 = f.parse().map_err(|_| TrajectoryError::BadRow {
                row,
                detail: format!("cannot parse '{f}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(TrajectoryError::BadRow {
                    row,
                    detail: format!("non-finite value '{f}'"),
                });
            }
            values.push(v);
        }
        states.push(JointState::new(
            values[0],
            joints.iter().cloned().zip(values[1..].iter().copied()),
        ));
    }
    Ok(states)
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("trajectory file is empty")]
    Empty,
    #[error("trajectory header must start with 't' and name at least one joint, found '{found}'")]
    BadHeader { found: String },
    #[error("trajectory row {row}: {detail}")]
    BadRow { row: usize, detail: String },
}
