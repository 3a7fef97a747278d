//! BVH (BioVision hierarchy) reading and writing.
//!
//! Angles are stored in degrees in the file and in radians in memory.
//! Position channels on the root become the clip's root translation;
//! position channels on other joints are accepted but their values are
//! dropped (and written back as zeros).

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use super::{AnimationClip, Bone, Channel, Skeleton};
use crate::error::{Error, Result};

struct Tokens<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(lines: &[(usize, &'a str)]) -> Self {
        let tokens = lines
            .iter()
            .flat_map(|&(n, l)| l.split_whitespace().map(move |t| (n, t)))
            .collect();
        let last_line = lines.last().map_or(0, |l| l.0);
        Tokens {
            tokens,
            pos: 0,
            last_line,
        }
    }

    fn line(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.last_line, |t| t.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let t = self
            .tokens
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::syntax(self.last_line, format!("unexpected end of input, expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    fn expect(&mut self, keyword: &str) -> Result<usize> {
        let (line, tok) = self.next(keyword)?;
        if tok.eq_ignore_ascii_case(keyword) {
            Ok(line)
        } else {
            Err(Error::syntax(line, format!("expected `{keyword}`, found `{tok}`")))
        }
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        let (line, tok) = self.next(what)?;
        parse_number(tok).ok_or_else(|| Error::syntax(line, format!("expected {what}, found `{tok}`")))
    }

    fn vec3(&mut self) -> Result<[f64; 3]> {
        Ok([
            self.number("offset x")?,
            self.number("offset y")?,
            self.number("offset z")?,
        ])
    }
}

fn parse_number(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_joint(tokens: &mut Tokens<'_>, parent: Option<usize>, bones: &mut Vec<Bone>) -> Result<()> {
    let (_, name) = tokens.next("joint name")?;
    tokens.expect("{")?;
    tokens.expect("OFFSET")?;
    let offset = tokens.vec3()?;
    let channels = if tokens.peek().is_some_and(|t| t.eq_ignore_ascii_case("CHANNELS")) {
        tokens.next("CHANNELS")?;
        let (line, count) = tokens.next("channel count")?;
        let count: usize = count
            .parse()
            .map_err(|_| Error::syntax(line, format!("invalid channel count `{count}`")))?;
        if count > 6 {
            return Err(Error::syntax(line, format!("too many channels ({count})")));
        }
        let mut channels = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, tok) = tokens.next("channel name")?;
            let channel: Channel = tok
                .parse()
                .map_err(|_| Error::syntax(line, format!("unknown channel `{tok}`")))?;
            if channels.contains(&channel) {
                return Err(Error::syntax(line, format!("duplicate channel `{tok}`")));
            }
            channels.push(channel);
        }
        channels
    } else {
        Vec::new()
    };
    let index = bones.len();
    bones.push(Bone {
        name: name.to_string(),
        parent,
        offset,
        channels,
        end_site: None,
    });
    loop {
        let line = tokens.line();
        let (_, tok) = tokens.next("`}`")?;
        match tok {
            "}" => return Ok(()),
            t if t.eq_ignore_ascii_case("JOINT") => parse_joint(tokens, Some(index), bones)?,
            t if t.eq_ignore_ascii_case("End") => {
                tokens.expect("Site")?;
                tokens.expect("{")?;
                tokens.expect("OFFSET")?;
                let site = tokens.vec3()?;
                tokens.expect("}")?;
                if bones[index].end_site.replace(site).is_some() {
                    return Err(Error::syntax(line, "joint has more than one End Site"));
                }
            }
            other => return Err(Error::syntax(line, format!("unexpected `{other}` in joint `{name}`"))),
        }
    }
}

/// Parses a BVH document into a clip (the skeleton is reachable through
/// [`AnimationClip::skeleton`]).
pub fn parse_bvh(input: &str) -> Result<AnimationClip> {
    let lines: Vec<(usize, &str)> = input.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let motion_at = lines
        .iter()
        .position(|(_, l)| l.trim().eq_ignore_ascii_case("MOTION"))
        .ok_or_else(|| Error::syntax(lines.len(), "missing MOTION section"))?;

    let mut tokens = Tokens::new(&lines[..motion_at]);
    tokens.expect("HIERARCHY")?;
    tokens.expect("ROOT")?;
    let mut bones = Vec::new();
    parse_joint(&mut tokens, None, &mut bones)?;
    if let Some(tok) = tokens.peek() {
        return Err(Error::syntax(
            tokens.line(),
            format!("unexpected `{tok}` after the root joint (multiple roots are not supported)"),
        ));
    }
    let skeleton = Arc::new(Skeleton::new(bones).map_err(|e| Error::syntax(1, e.to_string()))?);

    // MOTION header: "Frames: N" and "Frame Time: t", one per line.
    let mut rest = lines[motion_at + 1..].iter().filter(|(_, l)| !l.trim().is_empty());
    let (line, frames_line) = rest
        .next()
        .ok_or_else(|| Error::syntax(motion_at + 1, "missing `Frames:`"))?;
    let declared = frames_line
        .trim()
        .strip_prefix("Frames:")
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| {
            Error::syntax(
                *line,
                format!("expected `Frames: <count>`, found `{}`", frames_line.trim()),
            )
        })?;
    let (line, time_line) = rest
        .next()
        .ok_or_else(|| Error::syntax(*line, "missing `Frame Time:`"))?;
    let frame_time = time_line
        .trim()
        .strip_prefix("Frame Time:")
        .and_then(|v| parse_number(v.trim()))
        .ok_or_else(|| {
            Error::syntax(
                *line,
                format!("expected `Frame Time: <seconds>`, found `{}`", time_line.trim()),
            )
        })?;

    let channel_count: usize = skeleton.bones().iter().map(|b| b.channels.len()).sum();
    let mut frames = Vec::with_capacity(declared);
    let mut root = Vec::with_capacity(declared);
    for &(line, row) in rest {
        let values = row
            .split_whitespace()
            .map(|t| parse_number(t).ok_or_else(|| Error::syntax(line, format!("invalid motion value `{t}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != channel_count {
            return Err(Error::ChannelCount {
                line,
                expected: channel_count,
                found: values.len(),
            });
        }
        let mut pose = Vec::with_capacity(skeleton.dof());
        let mut translation = [0.0; 3];
        let mut values = values.into_iter();
        for bone in skeleton.bones() {
            for (&channel, value) in bone.channels.iter().zip(values.by_ref()) {
                if channel.is_rotation() {
                    pose.push(value.to_radians());
                } else if bone.parent.is_none() {
                    translation[channel.axis()] = value;
                }
            }
        }
        frames.push(pose);
        root.push(translation);
    }
    if frames.len() != declared {
        return Err(Error::FrameCount {
            declared,
            found: frames.len(),
        });
    }
    AnimationClip::new(skeleton, frames, root, frame_time)
}

pub fn read_bvh_file(path: impl AsRef<Path>) -> Result<AnimationClip> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Format(format!("BVH file is not UTF-8: {e}")))?;
    parse_bvh(&text)
}

/// Depth-first pre-order of the hierarchy, children in index order. This is
/// the order in which a BVH file lists joints and motion values.
fn preorder(skeleton: &Skeleton) -> Vec<usize> {
    let bones = skeleton.bones();
    let mut order = Vec::with_capacity(bones.len());
    let mut stack = vec![0];
    while let Some(b) = stack.pop() {
        order.push(b);
        stack.extend((0..bones.len()).rev().filter(|&c| bones[c].parent == Some(b)));
    }
    order
}

fn write_joint(out: &mut String, skeleton: &Skeleton, bone: usize, depth: usize) {
    let b = &skeleton.bones()[bone];
    let indent = "\t".repeat(depth);
    let keyword = if b.parent.is_none() { "ROOT" } else { "JOINT" };
    let _ = writeln!(out, "{indent}{keyword} {}", b.name);
    let _ = writeln!(out, "{indent}{{");
    let [x, y, z] = b.offset;
    let _ = writeln!(out, "{indent}\tOFFSET {x} {y} {z}");
    if !b.channels.is_empty() {
        let names: Vec<&str> = b.channels.iter().map(|c| c.bvh_name()).collect();
        let _ = writeln!(out, "{indent}\tCHANNELS {} {}", names.len(), names.join(" "));
    }
    for child in (0..skeleton.bones().len()).filter(|&c| skeleton.bones()[c].parent == Some(bone)) {
        write_joint(out, skeleton, child, depth + 1);
    }
    if let Some([x, y, z]) = b.end_site {
        let _ = writeln!(out, "{indent}\tEnd Site");
        let _ = writeln!(out, "{indent}\t{{");
        let _ = writeln!(out, "{indent}\t\tOFFSET {x} {y} {z}");
        let _ = writeln!(out, "{indent}\t}}");
    }
    let _ = writeln!(out, "{indent}}}");
}

fn fixed6(out: &mut String, v: f64) {
    // Avoid "-0.000000".
    let v = if v.abs() < 5e-7 { 0.0 } else { v };
    let _ = write!(out, "{v:.6}");
}

/// Serializes a clip as BVH text. Motion values are written in fixed-point
/// with six decimals.
pub fn write_bvh(clip: &AnimationClip) -> String {
    let skeleton = clip.skeleton();
    let mut out = String::from("HIERARCHY\n");
    write_joint(&mut out, skeleton, 0, 0);
    let _ = writeln!(out, "MOTION");
    let _ = writeln!(out, "Frames: {}", clip.frame_count());
    let _ = writeln!(out, "Frame Time: {}", clip.frame_time());
    let order = preorder(skeleton);
    for (pose, translation) in clip.frames().iter().zip(clip.root_translation()) {
        let mut first = true;
        for &b in &order {
            let bone = &skeleton.bones()[b];
            let mut angles = pose[skeleton.pose_range(b)].iter();
            for channel in &bone.channels {
                if !first {
                    out.push(' ');
                }
                first = false;
                let value = if channel.is_rotation() {
                    angles.next().copied().unwrap_or(0.0).to_degrees()
                } else if bone.parent.is_none() {
                    translation[channel.axis()]
                } else {
                    0.0
                };
                fixed6(&mut out, value);
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_bvh_file(path: impl AsRef<Path>, clip: &AnimationClip) -> Result<()> {
    std::fs::write(path, write_bvh(clip))?;
    Ok(())
}
