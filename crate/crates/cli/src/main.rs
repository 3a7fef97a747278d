mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastic_motion::apps::{
    cut_dendrogram, cyclify, distance_matrix, hierarchical_cluster, BlendOptions, BlendPath, CyclifyOptions,
    DistanceMatrix, MatrixOptions, Metric, Space,
};
use elastic_motion::mocap::{read_bvh_file, resample_clip, write_bvh_file, AnimationClip};
use elastic_motion::shape::ShapeOptions;
use elastic_motion::Error;
use serde_json::{json, Value};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "elastic-motion",
    version,
    about = "Elastic shape analysis of skeletal animations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Unset flags fall back to `--config`,
/// then to the built-in defaults.
#[derive(Args, Debug, Default)]
struct Common {
    /// JSON file with run parameters; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Common frame count for resampling [default: 128]
    #[arg(long, global = true)]
    frames: Option<usize>,
    /// Closure tolerance of the projection [default: 1e-6]
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Starting offsets tried during shape alignment [default: 16]
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Distance metric: linear-l2, geodesic-closed or geodesic-shape [default: geodesic-shape]
    #[arg(long, global = true, value_parser = parse_metric)]
    metric: Option<Metric>,
    /// Blending space: open, closed or shape [default: closed]
    #[arg(long, global = true, value_parser = parse_space)]
    space: Option<Space>,
    /// Smooth the velocity across the loop seam: on or off [default: on]
    #[arg(long, global = true, value_parser = parse_switch)]
    seam_smoothing: Option<bool>,
    /// Largest start/end gap per channel, in radians, accepted by cyclify [default: 1.5707963267948966]
    #[arg(long, global = true)]
    sanity_bound: Option<f64>,
    /// Leave out clips that fail instead of aborting [default: off]
    #[arg(long, global = true)]
    exclude_failures: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Make a nearly periodic clip loop seamlessly
    Cyclify {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Interpolate between two clips along a geodesic
    Blend {
        a: PathBuf,
        b: PathBuf,
        /// Blend parameter in [0, 1] [default: 0.5]
        #[arg(short, long, default_value_t = 0.5, hide_default_value = true)]
        s: f64,
        /// Write N clips with s evenly spaced over [0, 1] into the output directory
        #[arg(long, value_name = "N")]
        sweep: Option<usize>,
        /// Output BVH file, or directory with --sweep
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Pairwise distance matrix of BVH clips
    Distmat {
        /// BVH files or directories containing them
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Matrix CSV; parameters go to the same path with a .json extension
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Average-linkage clustering of a distance matrix
    Cluster {
        matrix: PathBuf,
        /// Dendrogram output: Newick for .nwk or .newick, JSON otherwise
        #[arg(short, long)]
        out: PathBuf,
        /// Also cut the tree into K flat clusters
        #[arg(short, long)]
        k: Option<usize>,
        /// Flat labels CSV [default: <out>.labels.csv]
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Summary of a BVH file
    Info {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_space(s: &str) -> Result<Space, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected `on` or `off`, got `{s}`")),
    }
}

/// A failed run: exit status plus message.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root_cause() {
            Error::Syntax { .. } | Error::ChannelCount { .. } | Error::FrameCount { .. } | Error::Io(_) => 2,
            Error::InvalidArgument(_) | Error::Format(_) => 2,
            Error::NoConvergence { .. }
            | Error::SingularJacobian
            | Error::NotClosed { .. }
            | Error::Antipodal { .. } => 3,
            Error::NotPeriodic { .. } => 4,
            Error::ShapeMismatch(_) => 5,
            Error::InvalidMatrix(_) => 6,
            _ => 1,
        };
        // Any failure attributed to one clip of a batch is a per-clip failure.
        let code = if matches!(e, Error::Clip { .. }) && code != 6 {
            3
        } else {
            code
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Run = Result<Value, Failure>;

fn settings(common: &Common) -> Result<RunConfig, Failure> {
    let mut c = match &common.config {
        Some(p) => RunConfig::load(p).map_err(Failure::usage)?,
        None => RunConfig::default(),
    };
    if let Some(v) = common.frames {
        c.frames = v;
    }
    if let Some(v) = common.epsilon {
        c.epsilon = v;
    }
    if let Some(v) = common.seeds {
        c.seeds = v;
    }
    if let Some(v) = common.metric {
        c.metric = v;
    }
    if let Some(v) = common.space {
        c.space = v;
    }
    if let Some(v) = common.seam_smoothing {
        c.seam_smoothing = v;
    }
    if let Some(v) = common.sanity_bound {
        c.sanity_bound = v;
    }
    if common.exclude_failures {
        c.exclude_failures = true;
    }
    c.validate().map_err(Failure::usage)?;
    Ok(c)
}

fn shape_options(c: &RunConfig) -> ShapeOptions {
    let mut o = ShapeOptions {
        seeds: c.seeds,
        ..ShapeOptions::default()
    };
    o.straighten.epsilon = c.epsilon;
    o
}

fn read(path: &Path) -> Result<AnimationClip, Failure> {
    read_bvh_file(path).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn cmd_cyclify(input: &Path, output: &Path, c: &RunConfig) -> Run {
    let clip = read(input)?;
    let opts = CyclifyOptions {
        epsilon: c.epsilon,
        seam_smoothing: c.seam_smoothing,
        sanity_bound: c.sanity_bound,
        ..CyclifyOptions::default()
    };
    let out = cyclify(&clip, &opts)?;
    write_bvh_file(output, &out.clip)?;
    eprintln!(
        "cyclified {}: joint gap {:.3e} -> {:.3e}",
        input.display(),
        out.report.gap_before,
        out.report.gap_after
    );
    Ok(json!({
        "command": "cyclify",
        "input": input,
        "output": output,
        "report": out.report,
        "config": c,
    }))
}

fn cmd_blend(a: &Path, b: &Path, s: f64, sweep: Option<usize>, out: &Path, common: &Common, c: &RunConfig) -> Run {
    if !(0.0..=1.0).contains(&s) {
        return Err(Failure::usage(format!("s must be in [0, 1], got {s}")));
    }
    let (mut ca, mut cb) = (read(a)?, read(b)?);
    if !ca.skeleton().same_topology(cb.skeleton()) {
        return Err(Failure {
            code: 5,
            message: format!("{} and {} use different skeletons", a.display(), b.display()),
        });
    }
    // Clips are only resampled when asked to, so s = 0 reproduces A exactly.
    let frames = if common.frames.is_some() || common.config.is_some() {
        Some(c.frames)
    } else if cb.frame_count() != ca.frame_count() {
        Some(ca.frame_count())
    } else {
        None
    };
    if let Some(m) = frames {
        ca = resample_clip(&ca, m)?;
        cb = resample_clip(&cb, m)?;
    }
    let opts = BlendOptions {
        space: c.space,
        shape: shape_options(c),
        include_root_translation: false,
    };
    let path = BlendPath::new(&ca, &cb, &opts)?;
    let mut written = Vec::new();
    match sweep {
        None => {
            write_bvh_file(out, &path.at(s)?)?;
            written.push(json!({"s": s, "file": out}));
        }
        Some(n) if n < 2 => return Err(Failure::usage("--sweep needs at least 2 clips")),
        Some(n) => {
            std::fs::create_dir_all(out).map_err(Error::from)?;
            let width = (n - 1).to_string().len().max(2);
            for i in 0..n {
                let t = i as f64 / (n - 1) as f64;
                let file = out.join(format!("blend_{i:0width$}.bvh"));
                write_bvh_file(&file, &path.at(t)?)?;
                written.push(json!({"s": t, "file": file}));
            }
        }
    }
    eprintln!("blended {} and {} in {} space", a.display(), b.display(), c.space);
    Ok(json!({
        "command": "blend",
        "a": a,
        "b": b,
        "outputs": written,
        "geodesic": {
            "iterations": path.geodesic().iterations(),
            "status": path.geodesic().status(),
            "length": elastic_motion::geodesic::path_length(path.geodesic()),
        },
        "config": c,
    }))
}

/// BVH files named directly or found (non-recursively) in directories, in
/// sorted order per directory.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(Error::from)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x.eq_ignore_ascii_case("bvh")))
                .collect();
            found.sort();
            files.extend(found);
        } else if p.exists() {
            files.push(p.clone());
        } else {
            return Err(Failure::usage(format!("{}: no such file or directory", p.display())));
        }
    }
    if files.len() < 2 {
        return Err(Failure::usage(format!(
            "need at least 2 BVH inputs, found {}",
            files.len()
        )));
    }
    Ok(files)
}

fn label(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn cmd_distmat(inputs: &[PathBuf], out: &Path, c: &RunConfig) -> Run {
    let files = collect_inputs(inputs)?;
    let mut labels = Vec::new();
    let mut clips = Vec::new();
    let mut excluded = Vec::new();
    for f in &files {
        match read_bvh_file(f) {
            Ok(clip) => {
                labels.push(label(f));
                clips.push(clip);
            }
            Err(e) if c.exclude_failures => {
                eprintln!("excluding {}: {e}", f.display());
                excluded.push(json!({"label": label(f), "reason": e.to_string()}));
            }
            Err(e) => {
                return Err(Failure {
                    code: 3,
                    message: format!("{}: {e}", label(f)),
                })
            }
        }
    }
    let opts = MatrixOptions {
        metric: c.metric,
        common_frames: c.frames,
        shape: shape_options(c),
        exclude_failures: c.exclude_failures,
    };
    let result = distance_matrix(&labels, &clips, &opts)?;
    for (l, reason) in &result.excluded {
        eprintln!("excluding {l}: {reason}");
        excluded.push(json!({"label": l, "reason": reason}));
    }
    write_text(out, &result.matrix.to_csv()?)?;
    let sidecar = out.with_extension("json");
    let params = json!({
        "format_version": config::FORMAT_VERSION,
        "config": c,
        "inputs": files,
        "labels": result.matrix.labels(),
        "excluded": excluded,
    });
    write_text(&sidecar, &(serde_json::to_string_pretty(&params).expect("json") + "\n"))?;
    eprintln!("wrote {} ({} clips)", out.display(), result.matrix.len());
    Ok(json!({
        "command": "distmat",
        "matrix": out,
        "sidecar": sidecar,
        "clips": result.matrix.len(),
        "excluded": excluded,
        "config": c,
    }))
}

fn cmd_cluster(matrix: &Path, out: &Path, k: Option<usize>, labels_out: Option<&Path>, c: &RunConfig) -> Run {
    let text = std::fs::read_to_string(matrix).map_err(|e| Failure::usage(format!("{}: {e}", matrix.display())))?;
    let m = DistanceMatrix::from_csv(&text)?;
    let tree = hierarchical_cluster(&m);
    let newick = out
        .extension()
        .is_some_and(|x| x.eq_ignore_ascii_case("nwk") || x.eq_ignore_ascii_case("newick"));
    write_text(
        out,
        &if newick {
            tree.to_newick()
        } else {
            tree.to_json()? + "\n"
        },
    )?;
    let mut report = json!({
        "command": "cluster",
        "matrix": matrix,
        "dendrogram": out,
        "leaves": m.len(),
        "config": c,
    });
    if let Some(k) = k {
        let flat = cut_dendrogram(&tree, k)?;
        let path = labels_out.map_or_else(|| out.with_extension("labels.csv"), Path::to_path_buf);
        let mut csv = String::from("label,cluster\n");
        for (l, g) in m.labels().iter().zip(&flat) {
            csv.push_str(&format!("{l},{g}\n"));
        }
        write_text(&path, &csv)?;
        report["k"] = json!(k);
        report["labels"] = json!(path);
        report["clusters"] = json!(flat);
    }
    eprintln!("clustered {} leaves", m.len());
    Ok(report)
}

fn cmd_info(input: &Path) -> Run {
    let clip = read(input)?;
    let bones: Vec<Value> = clip
        .skeleton()
        .bones()
        .iter()
        .map(|b| json!({"name": b.name, "parent": b.parent, "dof": b.dof()}))
        .collect();
    Ok(json!({
        "command": "info",
        "input": input,
        "bones": bones,
        "dof": clip.dof(),
        "frames": clip.frame_count(),
        "frame_time": clip.frame_time(),
        "duration": clip.duration(),
        "closure_gap": clip.closure_gap(),
        "world_closure_gap": clip.world_closure_gap(),
    }))
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Cyclify { input, output, common } => cmd_cyclify(&input, &output, &settings(&common)?),
        Command::Blend {
            a,
            b,
            s,
            sweep,
            out,
            common,
        } => {
            let c = settings(&common)?;
            cmd_blend(&a, &b, s, sweep, &out, &common, &c)
        }
        Command::Distmat { inputs, out, common } => cmd_distmat(&inputs, &out, &settings(&common)?),
        Command::Cluster {
            matrix,
            out,
            k,
            labels,
            common,
        } => cmd_cluster(&matrix, &out, k, labels.as_deref(), &settings(&common)?),
        Command::Info { input, common } => {
            settings(&common)?;
            cmd_info(&input)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            println!("{}", json!({"error": f.message, "exit_code": f.code}));
            ExitCode::from(f.code)
        }
    }
}
