use nalgebra::{Matrix3, Rotation3, Vector3};

use super::{Channel, Skeleton};
use crate::error::{Error, Result};

/// Euler rotation of one bone, composed in the bone's declared channel order.
fn bone_rotation(channels: &[Channel], angles: &[f64]) -> Matrix3<f64> {
    let mut rotation = Matrix3::identity();
    for (channel, &angle) in channels.iter().filter(|c| c.is_rotation()).zip(angles) {
        let axis = match channel.axis() {
            0 => Vector3::x_axis(),
            1 => Vector3::y_axis(),
            _ => Vector3::z_axis(),
        };
        rotation *= Rotation3::from_axis_angle(&axis, angle).into_inner();
    }
    rotation
}

/// Bone-end positions of every bone for one pose, in the root's coordinate
/// system (root translation is not applied).
///
/// Each bone contributes the rigid map `x -> R_b (x + offset_b)`; the
/// position of bone `b` is the image of the origin under the composition of
/// these maps from the root down to `b`.
///
/// # Panics
///
/// If `pose` does not have one entry per rotational degree of freedom.
pub fn world_positions(skeleton: &Skeleton, pose: &[f64]) -> Vec<Vector3<f64>> {
    assert_eq!(pose.len(), skeleton.dof(), "pose dimension");
    let bones = skeleton.bones();
    let mut rotations: Vec<Matrix3<f64>> = Vec::with_capacity(bones.len());
    let mut positions: Vec<Vector3<f64>> = Vec::with_capacity(bones.len());
    for (i, bone) in bones.iter().enumerate() {
        let local = bone_rotation(&bone.channels, &pose[skeleton.pose_range(i)]);
        let (parent_rot, parent_pos) = match bone.parent {
            Some(p) => (rotations[p], positions[p]),
            None => (Matrix3::identity(), Vector3::zeros()),
        };
        let rot = parent_rot * local;
        positions.push(parent_pos + rot * Vector3::from(bone.offset));
        rotations.push(rot);
    }
    positions
}

/// Position of a single bone; see [`world_positions`].
pub fn forward_kinematics(skeleton: &Skeleton, pose: &[f64], bone: usize) -> Result<Vector3<f64>> {
    skeleton.bone(bone)?;
    if pose.len() != skeleton.dof() {
        return Err(Error::DimensionMismatch {
            expected: skeleton.dof(),
            found: pose.len(),
        });
    }
    // Only the ancestors of `bone` matter.
    let bones = skeleton.bones();
    let mut chain = vec![bone];
    while let Some(p) = bones[*chain.last().unwrap()].parent {
        chain.push(p);
    }
    let mut rot = Matrix3::identity();
    let mut pos = Vector3::zeros();
    for &b in chain.iter().rev() {
        rot *= bone_rotation(&bones[b].channels, &pose[skeleton.pose_range(b)]);
        pos += rot * Vector3::from(bones[b].offset);
    }
    Ok(pos)
}
