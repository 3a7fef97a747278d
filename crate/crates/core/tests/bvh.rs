use std::path::PathBuf;

use approx::assert_abs_diff_eq;
use elastic_motion::mocap::{parse_bvh, read_bvh_file, write_bvh, write_bvh_file, Channel};
use elastic_motion::Error;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures")).join(name)
}

// Transcribed by hand from three_bone.bvh (degrees, translation first).
const THREE_BONE: [[f64; 9]; 4] = [
    [0.0, 10.0, 0.0, 0.0, 0.0, 0.0, 15.0, -5.0, 30.0],
    [0.5, 10.1, -0.25, 12.5, -3.75, 90.0, 20.0, -2.5, 45.0],
    [1.0, 10.2, -0.5, -45.0, 7.5, 180.0, 25.0, 0.0, 60.0],
    [1.5, 10.1, -0.75, -12.5, 3.75, -90.0, 20.0, 2.5, 45.0],
];

#[test]
fn three_bone_values_match_table() {
    let clip = read_bvh_file(fixture("three_bone.bvh")).unwrap();
    let skel = clip.skeleton();
    let names: Vec<&str> = skel.bones().iter().map(|b| b.name.as_str()).collect();
    assert_eq!(names, ["Hips", "Thigh", "Shin"]);
    assert_eq!(skel.bones()[2].parent, Some(1));
    assert_eq!(skel.bones()[1].channels, vec![Channel::Zrot, Channel::Xrot]);
    assert_eq!(skel.dof(), 6);
    assert_eq!(clip.frame_count(), 4);
    assert_abs_diff_eq!(clip.frame_time(), 0.033333);
    for (row, expected) in clip.frames().iter().zip(THREE_BONE) {
        for (v, deg) in row.iter().zip(&expected[3..]) {
            assert_abs_diff_eq!(*v, deg * std::f64::consts::PI / 180.0, epsilon = 1e-15);
        }
    }
    for (t, expected) in clip.root_translation().iter().zip(THREE_BONE) {
        assert_eq!(t, &[expected[0], expected[1], expected[2]]);
    }
}

#[test]
fn single_bone_zero_clip() {
    let clip = read_bvh_file(fixture("single_zero.bvh")).unwrap();
    assert_eq!(clip.skeleton().bones().len(), 1);
    assert_eq!(clip.frames(), &[vec![0.0; 3], vec![0.0; 3]]);
}

#[test]
fn file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let clip = read_bvh_file(fixture("arm_precise.bvh")).unwrap();
    let out = dir.path().join("copy.bvh");
    write_bvh_file(&out, &clip).unwrap();
    let back = read_bvh_file(&out).unwrap();
    assert!(back.skeleton().same_topology(clip.skeleton()));
    for (a, b) in clip.frames().iter().flatten().zip(back.frames().iter().flatten()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }
    assert_eq!(write_bvh(&back), write_bvh(&clip));
}

#[test]
fn malformed_inputs() {
    let read = |name: &str| parse_bvh(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap_err();
    assert!(matches!(
        read("bad_frame_count.bvh"),
        Error::FrameCount { declared: 5, found: 4 }
    ));
    assert!(matches!(
        read("bad_channel_count.bvh"),
        Error::ChannelCount { line: 26, .. }
    ));
    let e = read("bad_syntax.bvh");
    assert!(matches!(e, Error::Syntax { line: 8, .. }), "{e}");
    assert!(read("bad_channel_name.bvh").to_string().contains("Wrotation"));
    assert!(matches!(parse_bvh(""), Err(Error::Syntax { .. })));
}
