//! Skeletons, animation clips, BVH ingestion and forward kinematics.
//!
//! A pose is a point of the joint torus: one angle (radians) per rotational
//! channel of the skeleton, ordered bone by bone and, within a bone, in the
//! order the channels are declared. Root translation is kept beside the pose
//! rather than inside it.

mod bvh;
mod convert;
mod kinematics;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use bvh::{parse_bvh, read_bvh_file, write_bvh, write_bvh_file};
pub use convert::{clip_to_curve, curve_to_clip, resample_clip, unwrap_angles, wrap_angle};
pub use kinematics::{forward_kinematics, world_positions};

/// One BVH channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Xrot,
    Yrot,
    Zrot,
    Xpos,
    Ypos,
    Zpos,
}

impl Channel {
    pub fn is_rotation(self) -> bool {
        matches!(self, Channel::Xrot | Channel::Yrot | Channel::Zrot)
    }

    /// Cartesian axis index (0 = x, 1 = y, 2 = z).
    pub fn axis(self) -> usize {
        match self {
            Channel::Xrot | Channel::Xpos => 0,
            Channel::Yrot | Channel::Ypos => 1,
            Channel::Zrot | Channel::Zpos => 2,
        }
    }

    pub fn bvh_name(self) -> &'static str {
        match self {
            Channel::Xrot => "Xrotation",
            Channel::Yrot => "Yrotation",
            Channel::Zrot => "Zrotation",
            Channel::Xpos => "Xposition",
            Channel::Ypos => "Yposition",
            Channel::Zpos => "Zposition",
        }
    }
}

impl FromStr for Channel {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "xrotation" => Ok(Channel::Xrot),
            "yrotation" => Ok(Channel::Yrot),
            "zrotation" => Ok(Channel::Zrot),
            "xposition" => Ok(Channel::Xpos),
            "yposition" => Ok(Channel::Ypos),
            "zposition" => Ok(Channel::Zpos),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.bvh_name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bone {
    pub name: String,
    pub parent: Option<usize>,
    /// Offset from the parent joint, in length units.
    pub offset: [f64; 3],
    pub channels: Vec<Channel>,
    /// `End Site` offset, if the joint terminates a chain.
    pub end_site: Option<[f64; 3]>,
}

impl Bone {
    /// Number of rotational degrees of freedom.
    pub fn dof(&self) -> usize {
        self.channels.iter().filter(|c| c.is_rotation()).count()
    }
}

/// Bone hierarchy in topological order (every parent precedes its children).
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    bones: Vec<Bone>,
    /// Index of each bone's first rotational channel in the pose vector.
    pose_offsets: Vec<usize>,
    dof: usize,
}

impl Skeleton {
    pub fn new(bones: Vec<Bone>) -> Result<Self> {
        if bones.is_empty() {
            return Err(Error::InvalidSkeleton("no bones".into()));
        }
        let mut roots = 0;
        for (i, bone) in bones.iter().enumerate() {
            match bone.parent {
                None => roots += 1,
                Some(p) if p >= i => {
                    return Err(Error::InvalidSkeleton(format!(
                        "bone {i} ({}) has parent {p} which does not precede it",
                        bone.name
                    )))
                }
                Some(_) => {}
            }
        }
        if roots != 1 || bones[0].parent.is_some() {
            return Err(Error::InvalidSkeleton(format!(
                "expected exactly one root as the first bone, found {roots} parentless bones"
            )));
        }
        let mut pose_offsets = Vec::with_capacity(bones.len());
        let mut dof = 0;
        for bone in &bones {
            pose_offsets.push(dof);
            dof += bone.dof();
        }
        if dof == 0 {
            return Err(Error::InvalidSkeleton(
                "skeleton has no rotational degrees of freedom".into(),
            ));
        }
        Ok(Skeleton {
            bones,
            pose_offsets,
            dof,
        })
    }

    pub fn bones(&self) -> &[Bone] {
        &self.bones
    }

    pub fn bone(&self, index: usize) -> Result<&Bone> {
        self.bones.get(index).ok_or(Error::BoneIndex {
            index,
            count: self.bones.len(),
        })
    }

    /// Total rotational degrees of freedom, the dimension of the joint torus.
    pub fn dof(&self) -> usize {
        self.dof
    }

    /// Slice of the pose vector holding `bone`'s rotation angles.
    pub fn pose_range(&self, bone: usize) -> std::ops::Range<usize> {
        let start = self.pose_offsets[bone];
        start..start + self.bones[bone].dof()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.bones.iter().position(|b| b.name == name)
    }

    /// Same bone names, parents and channel layouts. Offsets may differ.
    pub fn same_topology(&self, other: &Skeleton) -> bool {
        self.bones.len() == other.bones.len()
            && self
                .bones
                .iter()
                .zip(&other.bones)
                .all(|(a, b)| a.name == b.name && a.parent == b.parent && a.channels == b.channels)
    }
}

/// Time-sampled joint angles plus root translation.
#[derive(Debug, Clone, PartialEq)]
pub struct AnimationClip {
    skeleton: Arc<Skeleton>,
    frames: Vec<Vec<f64>>,
    root_translation: Vec<[f64; 3]>,
    frame_time: f64,
}

impl AnimationClip {
    pub fn new(
        skeleton: Arc<Skeleton>,
        frames: Vec<Vec<f64>>,
        root_translation: Vec<[f64; 3]>,
        frame_time: f64,
    ) -> Result<Self> {
        let n = skeleton.dof();
        if frames.len() < 2 {
            return Err(Error::InvalidClip(format!(
                "need at least 2 frames, got {}",
                frames.len()
            )));
        }
        if root_translation.len() != frames.len() {
            return Err(Error::InvalidClip(format!(
                "{} frames but {} root translations",
                frames.len(),
                root_translation.len()
            )));
        }
        if let Some((i, f)) = frames.iter().enumerate().find(|(_, f)| f.len() != n) {
            return Err(Error::InvalidClip(format!(
                "frame {i} has {} angles, skeleton has {n} degrees of freedom",
                f.len()
            )));
        }
        if !(frame_time > 0.0 && frame_time.is_finite()) {
            return Err(Error::InvalidClip(format!(
                "frame time must be positive, got {frame_time}"
            )));
        }
        if frames.iter().flatten().any(|v| !v.is_finite()) || root_translation.iter().flatten().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidClip("non-finite channel value".into()));
        }
        Ok(AnimationClip {
            skeleton,
            frames,
            root_translation,
            frame_time,
        })
    }

    /// Clip with zero root translation.
    pub fn from_frames(skeleton: Arc<Skeleton>, frames: Vec<Vec<f64>>, frame_time: f64) -> Result<Self> {
        let root = vec![[0.0; 3]; frames.len()];
        Self::new(skeleton, frames, root, frame_time)
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        &self.skeleton
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn root_translation(&self) -> &[[f64; 3]] {
        &self.root_translation
    }

    pub fn frame_time(&self) -> f64 {
        self.frame_time
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn dof(&self) -> usize {
        self.skeleton.dof()
    }

    /// `(frame_count - 1) * frame_time`.
    pub fn duration(&self) -> f64 {
        (self.frames.len() - 1) as f64 * self.frame_time
    }

    /// Euclidean norm of the per-channel wrapped difference between the last
    /// and the first frame.
    pub fn closure_gap(&self) -> f64 {
        let first = &self.frames[0];
        let last = &self.frames[self.frames.len() - 1];
        first
            .iter()
            .zip(last)
            .map(|(a, b)| wrap_angle(b - a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest distance, over all bones, between the forward-kinematics
    /// positions of the first and the last pose.
    pub fn world_closure_gap(&self) -> f64 {
        let first = world_positions(&self.skeleton, &self.frames[0]);
        let last = world_positions(&self.skeleton, &self.frames[self.frames.len() - 1]);
        first.iter().zip(&last).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
