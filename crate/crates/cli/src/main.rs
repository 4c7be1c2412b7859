//! `wind-bool`: boolean operations, winding-field sampling, and structural
//! audits for triangle meshes.
//!
//! Exit codes: 0 success, 1 audit found an open or non-manifold mesh,
//! 2 parse/IO failure, 3 robustness failure (a barycenter evaluated exactly
//! on the other surface), 4 invalid arguments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use windmesh::boolean::{
    assemble, classify, collect_stats, resolve_coplanar, BoolOp, BoolOpSpec, BooleanStats,
    InsideRule,
};
use windmesh::corefine::corefine;
use windmesh::io::{parse_points_csv, read_mesh, write_field, write_mesh, MeshFormat};
use windmesh::mesh::{Point3, TriMesh};
use windmesh::winding::WindingField;

const EXIT_AUDIT_DIRTY: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_ROBUSTNESS: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "wind-bool",
    about = "Mesh booleans via generalized winding numbers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boolean operation on two meshes.
    BoolOp(BoolOpArgs),
    /// Sample the winding number of a mesh at query points.
    Field(FieldArgs),
    /// Report closedness, manifoldness, and degeneracy of a mesh.
    Audit(AuditArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    /// A or B.
    Union,
    /// A and B.
    Intersect,
    /// A minus B.
    Minus,
    /// B minus A.
    Rminus,
    /// Symmetric difference.
    Xor,
}

impl From<OpArg> for BoolOp {
    fn from(op: OpArg) -> BoolOp {
        match op {
            OpArg::Union => BoolOp::Union,
            OpArg::Intersect => BoolOp::Intersection,
            OpArg::Minus => BoolOp::DifferenceAB,
            OpArg::Rminus => BoolOp::DifferenceBA,
            OpArg::Xor => BoolOp::SymmetricDifference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    /// Inside when w > 1/2 (default).
    GtHalf,
    /// Inside when |w| > 1/2 (inside-out regions count).
    AbsGtHalf,
    /// Inside when w > 0.
    Positive,
    /// Inside when |w| > 0.
    AbsPositive,
}

impl From<RuleArg> for InsideRule {
    fn from(rule: RuleArg) -> InsideRule {
        match rule {
            RuleArg::GtHalf => InsideRule::WindingGtHalf,
            RuleArg::AbsGtHalf => InsideRule::AbsWindingGtHalf,
            RuleArg::Positive => InsideRule::WindingPositive,
            RuleArg::AbsPositive => InsideRule::AbsWindingPositive,
        }
    }
}

#[derive(Args)]
struct BoolOpArgs {
    /// Operation to perform.
    #[arg(long, value_enum)]
    op: OpArg,
    /// Inside rule applied to winding values.
    #[arg(long, value_enum, default_value = "gt-half")]
    rule: RuleArg,
    /// First input mesh (.obj or .stl).
    #[arg(short = 'a', long = "input-a", value_name = "MESH")]
    a: PathBuf,
    /// Second input mesh.
    #[arg(short = 'b', long = "input-b", value_name = "MESH")]
    b: PathBuf,
    /// Output path (.obj or .stl).
    #[arg(short = 'o', long = "output", value_name = "MESH")]
    output: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FieldArgs {
    /// Mesh whose winding field is sampled.
    #[arg(short = 'a', long = "input-a", value_name = "MESH")]
    a: PathBuf,
    /// CSV of query points (rows of x,y,z).
    #[arg(long, value_name = "CSV", conflicts_with = "grid")]
    points: Option<PathBuf>,
    /// Regular grid spec: nx,ny,nz,min,max (cube bounds, inclusive).
    #[arg(long, value_name = "NX,NY,NZ,MIN,MAX")]
    grid: Option<String>,
    /// Output CSV (header x,y,z,w).
    #[arg(short = 'o', long = "output", value_name = "CSV")]
    output: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AuditArgs {
    /// Mesh to audit.
    #[arg(short = 'a', long = "input-a", value_name = "MESH")]
    a: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Weld exactly-coincident vertices after reading.
    #[arg(long)]
    weld: bool,
    /// Print per-stage statistics and timings to stderr.
    #[arg(long, short = 'v')]
    verbose: bool,
    /// Worker threads for winding evaluation ("auto" or a count).
    /// Falls back to WIND_BOOL_THREADS, then to auto.
    #[arg(long, value_name = "N|auto")]
    threads: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::BoolOp(args) => run_bool(args),
        Command::Field(args) => run_field(args),
        Command::Audit(args) => run_audit(args),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(Failure { code, message }) => {
            eprintln!("wind-bool: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn io_fail(err: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_IO,
        message: err.to_string(),
    }
}

fn usage_fail(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn parse_threads(common: &CommonArgs) -> Result<usize, Failure> {
    let spec = common
        .threads
        .clone()
        .or_else(|| std::env::var("WIND_BOOL_THREADS").ok());
    match spec.as_deref() {
        None | Some("auto") => Ok(0),
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| usage_fail(format!("--threads expects a count or \"auto\", got {s:?}"))),
    }
}

fn load_mesh(path: &Path, weld: bool) -> Result<TriMesh, Failure> {
    let mesh = read_mesh(path).map_err(|e| io_fail(format!("{}: {e}", path.display())))?;
    Ok(if weld { mesh.weld_exact() } else { mesh })
}

/// Write through a temp file so nothing lands at `path` on failure.
fn write_mesh_atomically(mesh: &TriMesh, path: &Path) -> Result<(), Failure> {
    let format = MeshFormat::from_path(path).map_err(|e| usage_fail(e.to_string()))?;
    let tmp = path.with_extension("tmp");
    write_mesh(mesh, &tmp, format).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io_fail(format!("{}: {e}", tmp.display()))
    })?;
    std::fs::rename(&tmp, path).map_err(|e| io_fail(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn run_bool(args: BoolOpArgs) -> Result<u8, Failure> {
    let threads = parse_threads(&args.common)?;
    let spec = BoolOpSpec::with_rule(args.op.into(), args.rule.into());
    let verbose = args.common.verbose;

    let t0 = Instant::now();
    let a = load_mesh(&args.a, args.common.weld)?;
    let b = load_mesh(&args.b, args.common.weld)?;
    let t_read = t0.elapsed();

    let t1 = Instant::now();
    let pair = corefine(&a, &b);
    let t_corefine = t1.elapsed();

    let t2 = Instant::now();
    let field_a = WindingField::new(&pair.refined_a, threads);
    let field_b = WindingField::new(&pair.refined_b, threads);
    let classified = classify(&pair, spec, &field_a, &field_b).map_err(|e| Failure {
        code: EXIT_ROBUSTNESS,
        message: e.to_string(),
    })?;
    let duplicate_actions = resolve_coplanar(&pair.coplanar_pairs, spec);
    let t_classify = t2.elapsed();

    let t3 = Instant::now();
    let stats = collect_stats(&classified, &duplicate_actions, &pair, spec);
    let out = assemble(&classified, &duplicate_actions, &pair);
    let t_assemble = t3.elapsed();

    let t4 = Instant::now();
    write_mesh_atomically(&out, &args.output)?;
    let t_write = t4.elapsed();

    if verbose {
        eprintln!("{}", render_stats(&stats, &out));
        eprintln!(
            "timing: read {:?}, corefine {:?}, classify {:?}, assemble {:?}, write {:?}",
            t_read, t_corefine, t_classify, t_assemble, t_write
        );
    }
    Ok(0)
}

fn render_stats(stats: &BooleanStats, out: &TriMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "refined: A {} faces, B {} faces ({} candidate pairs, {} segments, {} coplanar regions, {} point contacts, {} degenerate pairs skipped)",
        stats.refined_faces_a,
        stats.refined_faces_b,
        stats.corefine.candidate_pairs,
        stats.corefine.segment_pairs,
        stats.corefine.coplanar_region_pairs,
        stats.corefine.point_contact_pairs,
        stats.corefine.degenerate_pairs_skipped,
    );
    let _ = writeln!(
        s,
        "actions: A keep {} flip {} discard {}; B keep {} flip {} discard {}; duplicates kept {} discarded {}",
        stats.kept_a,
        stats.flipped_a,
        stats.discarded_a,
        stats.kept_b,
        stats.flipped_b,
        stats.discarded_b,
        stats.duplicates_kept,
        stats.duplicates_discarded,
    );
    if let Some(m) = stats.min_classification_margin {
        let _ = writeln!(s, "min classification margin: {m:.3e}");
    }
    let audit = out.audit();
    let _ = write!(
        s,
        "output: {} vertices, {} faces; is_closed={} is_edge_manifold={} boundary_edges={} degenerate_faces={}",
        out.vertex_count(),
        out.face_count(),
        audit.is_closed,
        audit.is_edge_manifold,
        audit.boundary_edge_count,
        audit.degenerate_face_count,
    );
    s
}

fn parse_grid(spec: &str) -> Result<Vec<Point3>, Failure> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 5 {
        return Err(usage_fail(format!(
            "--grid expects nx,ny,nz,min,max (got {} fields)",
            parts.len()
        )));
    }
    let n: Vec<usize> = parts[..3]
        .iter()
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| usage_fail(format!("bad grid dimension {p:?}")))
        })
        .collect::<Result<_, _>>()?;
    let min: f64 = parts[3]
        .trim()
        .parse()
        .map_err(|_| usage_fail(format!("bad grid bound {:?}", parts[3])))?;
    let max: f64 = parts[4]
        .trim()
        .parse()
        .map_err(|_| usage_fail(format!("bad grid bound {:?}", parts[4])))?;
    if n.iter().any(|&k| k == 0) || !min.is_finite() || !max.is_finite() || min >= max {
        return Err(usage_fail("grid needs positive counts and min < max"));
    }
    let coord = |k: usize, count: usize| {
        if count == 1 {
            0.5 * (min + max)
        } else {
            min + (max - min) * (k as f64) / ((count - 1) as f64)
        }
    };
    let mut points = Vec::with_capacity(n[0] * n[1] * n[2]);
    for iz in 0..n[2] {
        for iy in 0..n[1] {
            for ix in 0..n[0] {
                points.push(Point3::new(
                    coord(ix, n[0]),
                    coord(iy, n[1]),
                    coord(iz, n[2]),
                ));
            }
        }
    }
    Ok(points)
}

fn run_field(args: FieldArgs) -> Result<u8, Failure> {
    let threads = parse_threads(&args.common)?;
    let mesh = load_mesh(&args.a, args.common.weld)?;

    let points = match (&args.points, &args.grid) {
        (Some(path), None) => {
            let file = std::fs::File::open(path)
                .map_err(|e| io_fail(format!("{}: {e}", path.display())))?;
            parse_points_csv(std::io::BufReader::new(file))
                .map_err(|e| io_fail(format!("{}: {e}", path.display())))?
        }
        (None, Some(spec)) => parse_grid(spec)?,
        _ => return Err(usage_fail("field needs exactly one of --points or --grid")),
    };

    let t0 = Instant::now();
    let field = WindingField::new(&mesh, threads);
    let values: Vec<f64> = field
        .eval_batch(&points)
        .into_iter()
        .map(|r| match r {
            Ok(w) => w.value,
            // On-surface points have no winding number.
            Err(_) => f64::NAN,
        })
        .collect();
    if args.common.verbose {
        eprintln!(
            "evaluated {} points over {} faces in {:?}",
            points.len(),
            mesh.face_count(),
            t0.elapsed()
        );
    }

    let tmp = args.output.with_extension("tmp");
    let result = std::fs::File::create(&tmp)
        .map_err(|e| io_fail(format!("{}: {e}", tmp.display())))
        .and_then(|file| {
            let mut w = std::io::BufWriter::new(file);
            write_field(&points, &values, &mut w)
                .map_err(|e| io_fail(format!("{}: {e}", tmp.display())))?;
            use std::io::Write;
            w.flush().map_err(|e| io_fail(format!("{}: {e}", tmp.display())))
        });
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    std::fs::rename(&tmp, &args.output)
        .map_err(|e| io_fail(format!("{}: {e}", args.output.display())))?;
    Ok(0)
}

fn run_audit(args: AuditArgs) -> Result<u8, Failure> {
    let mesh = load_mesh(&args.a, args.common.weld)?;
    let audit = mesh.audit();
    println!("is_closed={}", audit.is_closed);
    println!("is_edge_manifold={}", audit.is_edge_manifold);
    println!("boundary_edge_count={}", audit.boundary_edge_count);
    println!("degenerate_face_count={}", audit.degenerate_face_count);
    println!("vertex_count={}", mesh.vertex_count());
    println!("face_count={}", mesh.face_count());
    if audit.is_closed && audit.is_edge_manifold {
        Ok(0)
    } else {
        Ok(EXIT_AUDIT_DIRTY)
    }
}
