//! `pointstream` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.
//! Every output is a pure function of the inputs, flags and seed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::graph::{parse_pipeline, PipelineGraph};
use crate::kernels::{
    brute_force_knn, brute_force_range, chunk_access_curve, chunked_sort, global_sort, knn_search,
    profile_deadline, range_search, recall, recall_curve, split_grid, split_serial,
    uniform_boundaries, KdTree, Point, PointCloud, SYNTHETIC_ALGORITHM,
};
use crate::optimizer::oracle::{oracle_horizon, verify_against_oracle, Candidate};
use crate::optimizer::{optimize, schedule_chunks, Options, ScheduleDoc};
use crate::simulator::{simulate, write_csv, Summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pointstream",
    version,
    about = "Line-buffer scheduling and streaming point-cloud kernels"
)]
pub struct Cli {
    /// Seed for synthetic clouds and query sets.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Encoding of point-cloud input files.
    #[arg(long, global = true, value_enum, default_value_t = CloudFormat::Text)]
    pub format: CloudFormat,
    /// Primary output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CloudFormat {
    Text,
    Binary,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimise total line-buffer size for a pipeline.
    Optimize {
        pipeline: PathBuf,
        /// Use the per-timestamp constraint system.
        #[arg(long)]
        no_prune: bool,
        #[arg(long)]
        horizon: Option<i64>,
        /// Element width for byte totals.
        #[arg(long)]
        element_bytes: Option<u32>,
    },
    /// Token-simulate a schedule and check it for stalls and overflows.
    Simulate {
        pipeline: PathBuf,
        schedule: PathBuf,
        #[arg(long, default_value_t = 1)]
        chunks: usize,
        /// Sample every n-th cycle in the trace.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Occupancy trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare the solver with exhaustive enumeration.
    Verify {
        pipeline: PathBuf,
        #[arg(long)]
        horizon: Option<i64>,
    },
    /// kNN search with an optional step deadline.
    Knn {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// Deadline as a fraction of the profiled mean step count.
        #[arg(long, conflicts_with = "deadline")]
        deadline_frac: Option<f64>,
    },
    /// Radius search with an optional step deadline.
    Range {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        radius: f64,
    },
    /// Suggest a deadline from uncapped searches and report recall.
    ProfileDeadline {
        #[command(flatten)]
        cloud: CloudArgs,
        #[command(flatten)]
        queries: QueryArgs,
        #[arg(long, default_value_t = 32)]
        k: usize,
        #[arg(long, default_value_t = 0.25)]
        fraction: f64,
        #[arg(long, default_value_t = 16)]
        leaf_size: usize,
    },
    /// Mean number of grid chunks a kNN search touches, per k.
    StatsChunks {
        #[command(flatten)]
        cloud: CloudArgs,
        #[command(flatten)]
        queries: QueryArgs,
        #[arg(long, default_value = "8x8x1", value_parser = parse_triple)]
        grid: [usize; 3],
        /// Comma separated k values.
        #[arg(long, default_value = "16,32,64,128,256", value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, default_value_t = 16)]
        leaf_size: usize,
    },
    /// Partition a cloud into chunk groups or serial chunks.
    Split {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long, value_parser = parse_triple, conflicts_with = "serial")]
        grid: Option<[usize; 3]>,
        #[arg(long, default_value = "1x1x1", value_parser = parse_triple)]
        kernel: [usize; 3],
        #[arg(long, default_value = "1x1x1", value_parser = parse_triple)]
        stride: [usize; 3],
        /// Points per chunk in arrival order.
        #[arg(long)]
        serial: Option<usize>,
    },
    /// Sort along an axis chunk by chunk.
    Sort {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long, default_value_t = 2)]
        axis: usize,
        /// Number of equal-width partitions along the axis.
        #[arg(long, default_value_t = 1)]
        parts: usize,
    },
}

#[derive(Debug, Args)]
pub struct CloudArgs {
    /// Point-cloud file.
    #[arg(long, required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate this many uniform points instead of reading a file.
    #[arg(long, conflicts_with = "input")]
    pub synthetic: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Query points file; defaults to synthetic queries.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub query_count: usize,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub cloud: CloudArgs,
    #[command(flatten)]
    pub queries: QueryArgs,
    /// Step cap per query, or `inf`.
    #[arg(long, default_value = "inf", value_parser = parse_deadline)]
    pub deadline: Deadline,
    #[arg(long, default_value_t = 16)]
    pub leaf_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deadline(pub Option<usize>);

fn parse_deadline(s: &str) -> Result<Deadline, String> {
    if s == "inf" {
        return Ok(Deadline(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("`{s}` is not a positive step count or `inf`")),
        Ok(n) => Ok(Deadline(Some(n))),
    }
}

fn parse_triple(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("`{s}` is not of the form AxBxC"));
    }
    let mut v = [0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| format!("`{p}` is not a nonnegative integer"))?;
    }
    Ok(v)
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Outcome {
    let mut ctx = Context { cli, stdout };
    match &cli.command {
        Command::Optimize {
            pipeline,
            no_prune,
            horizon,
            element_bytes,
        } => ctx.optimize(pipeline, !no_prune, *horizon, *element_bytes),
        Command::Simulate {
            pipeline,
            schedule,
            chunks,
            stride,
            trace,
        } => ctx.simulate(pipeline, schedule, *chunks, *stride, trace.as_deref()),
        Command::Verify { pipeline, horizon } => ctx.verify(pipeline, *horizon),
        Command::Knn {
            search,
            k,
            deadline_frac,
        } => ctx.knn(search, *k, *deadline_frac),
        Command::Range { search, radius } => ctx.range(search, *radius),
        Command::ProfileDeadline {
            cloud,
            queries,
            k,
            fraction,
            leaf_size,
        } => ctx.profile(cloud, queries, *k, *fraction, *leaf_size),
        Command::StatsChunks {
            cloud,
            queries,
            grid,
            k,
            leaf_size,
        } => ctx.stats_chunks(cloud, queries, *grid, k, *leaf_size),
        Command::Split {
            cloud,
            grid,
            kernel,
            stride,
            serial,
        } => ctx.split(cloud, *grid, *kernel, *stride, *serial),
        Command::Sort { cloud, axis, parts } => ctx.sort(cloud, *axis, *parts),
    }
}

struct Context<'a> {
    cli: &'a Cli,
    stdout: &'a mut dyn Write,
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_pipeline(path: &Path) -> Result<PipelineGraph, Failure> {
    let bytes = read_file(path)?;
    let text =
        String::from_utf8(bytes).map_err(|_| usage(format!("{}: not UTF-8", path.display())))?;
    parse_pipeline(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

impl Context<'_> {
    fn emit(&mut self, text: &str) -> Result<(), Failure> {
        self.stdout
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("stdout: {e}")))
    }

    /// Writes the primary output to `--out`, or to stdout.
    fn primary(&mut self, text: &str) -> Result<(), Failure> {
        match &self.cli.out {
            Some(path) => write_file(path, text.as_bytes()),
            None => self.emit(text),
        }
    }

    /// Writes the primary output and then the summary. Without `--out` both
    /// go to stdout, primary first.
    fn finish(&mut self, primary: &str, summary: &Value) -> Result<(), Failure> {
        self.primary(primary)?;
        self.emit(&pretty(summary))
    }

    fn load_cloud(&self, args: &CloudArgs) -> Result<(PointCloud, Value), Failure> {
        if let Some(n) = args.synthetic {
            let cloud = PointCloud::synthetic(n, self.cli.seed).map_err(usage)?;
            let source =
                json!({"synthetic": n, "generator": SYNTHETIC_ALGORITHM, "seed": self.cli.seed});
            return Ok((cloud, source));
        }
        let path = args
            .input
            .as_ref()
            .expect("clap requires --input without --synthetic");
        let cloud = self.read_cloud(path)?;
        Ok((cloud, json!({"input": path.display().to_string()})))
    }

    fn read_cloud(&self, path: &Path) -> Result<PointCloud, Failure> {
        let bytes = read_file(path)?;
        let parsed = match self.cli.format {
            CloudFormat::Binary => PointCloud::read_binary(&bytes[..]),
            CloudFormat::Text => {
                let text = String::from_utf8(bytes)
                    .map_err(|_| usage(format!("{}: not UTF-8", path.display())))?;
                PointCloud::parse_text(&text)
            }
        };
        parsed.map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    /// Query points from a file, or synthetic ones drawn with `seed + 1`.
    fn load_queries(&self, args: &QueryArgs) -> Result<Vec<Point>, Failure> {
        match &args.queries {
            Some(path) => Ok(self.read_cloud(path)?.points().to_vec()),
            None => {
                if args.query_count == 0 {
                    return Err(usage("--query-count must be >= 1"));
                }
                let qs = PointCloud::synthetic(args.query_count, self.cli.seed.wrapping_add(1))
                    .map_err(usage)?;
                Ok(qs.points().to_vec())
            }
        }
    }

    fn optimize(
        &mut self,
        pipeline: &Path,
        pruned: bool,
        horizon: Option<i64>,
        element_bytes: Option<u32>,
    ) -> Outcome {
        let graph = load_pipeline(pipeline)?;
        let solution = match optimize(&graph, Options { pruned, horizon }) {
            Ok(s) => s,
            Err(e) => {
                self.emit(&format!("infeasible: {e}\n"))?;
                return Ok(EXIT_FAILED);
            }
        };
        let doc = ScheduleDoc::from_solution(&graph, &solution, element_bytes);
        let counts = solution.constraint_counts;
        let mut summary = String::new();
        let _ = write!(summary, "total_buffer {} elements", solution.total_buffer);
        if let Some(b) = element_bytes {
            let _ = write!(summary, " ({} bytes)", solution.total_buffer * b as i64);
        }
        let _ = writeln!(summary);
        let _ = writeln!(summary, "makespan {}", solution.makespan);
        let _ = writeln!(
            summary,
            "initiation_interval {}",
            solution.initiation_interval
        );
        let _ = writeln!(
            summary,
            "constraints pruned {} unpruned {}",
            counts.pruned, counts.unpruned
        );
        self.primary(&doc.to_json())?;
        self.emit(&summary)?;
        Ok(EXIT_OK)
    }

    fn simulate(
        &mut self,
        pipeline: &Path,
        schedule: &Path,
        chunks: usize,
        stride: usize,
        trace: Option<&Path>,
    ) -> Outcome {
        if chunks == 0 {
            return Err(usage("--chunks must be >= 1"));
        }
        if stride == 0 {
            return Err(usage("--stride must be >= 1"));
        }
        let graph = load_pipeline(pipeline)?;
        let text = String::from_utf8(read_file(schedule)?)
            .map_err(|_| usage(format!("{}: not UTF-8", schedule.display())))?;
        let doc =
            ScheduleDoc::parse(&text).map_err(|e| usage(format!("{}: {e}", schedule.display())))?;
        let solution = doc
            .to_solution(&graph)
            .map_err(|e| usage(format!("{}: {e}", schedule.display())))?;
        let solution = schedule_chunks(&solution, &graph, chunks);
        let result = simulate(&graph, &solution, chunks);
        if let Some(path) = trace {
            let mut csv = Vec::new();
            write_csv(&result, &graph, stride, &mut csv).map_err(usage)?;
            write_file(path, &csv)?;
        }
        self.primary(&Summary::new(&result, &graph).to_json())?;
        Ok(if result.is_clean() {
            EXIT_OK
        } else {
            EXIT_FAILED
        })
    }

    fn verify(&mut self, pipeline: &Path, horizon: Option<i64>) -> Outcome {
        let graph = load_pipeline(pipeline)?;
        let horizon = horizon.unwrap_or_else(|| oracle_horizon(&graph));
        let report = verify_against_oracle(&graph, horizon).map_err(usage)?;
        let side = |c: &Option<Candidate>| match c {
            None => Value::Null,
            Some(c) => json!({"total_buffer": c.total_buffer, "start_cycles": c.start_cycles}),
        };
        let v = json!({
            "horizon": report.horizon,
            "oracle": side(&report.oracle),
            "solver": side(&report.solver),
            "matches": report.matches(),
            "starts_match": report.starts_match(),
        });
        self.primary(&pretty(&v))?;
        Ok(if report.matches() {
            EXIT_OK
        } else {
            EXIT_FAILED
        })
    }

    fn knn(&mut self, args: &SearchArgs, k: usize, deadline_frac: Option<f64>) -> Outcome {
        if k == 0 {
            return Err(usage("--k must be >= 1"));
        }
        let (cloud, source) = self.load_cloud(&args.cloud)?;
        let queries = self.load_queries(&args.queries)?;
        let tree = build_tree(&cloud, args.leaf_size)?;
        let deadline = match deadline_frac {
            Some(f) => Some(
                profile_deadline(&tree, &queries, k, f)
                    .map_err(usage)?
                    .deadline,
            ),
            None => args.deadline.0,
        };
        let mut csv = String::from("query,rank,index,distance2\n");
        let (mut total_recall, mut steps, mut truncated) = (0.0, 0usize, 0usize);
        for (qi, &q) in queries.iter().enumerate() {
            let r = knn_search(&tree, q, k, deadline);
            for (rank, (i, d)) in r.neighbors.iter().enumerate() {
                let _ = writeln!(csv, "{qi},{rank},{i},{d}");
            }
            total_recall += recall(&r.neighbors, &brute_force_knn(cloud.points(), q, k));
            steps += r.steps_used;
            truncated += r.truncated as usize;
        }
        let n = queries.len() as f64;
        let summary = json!({
            "source": source,
            "points": cloud.len(),
            "queries": queries.len(),
            "k": k,
            "deadline": deadline,
            "mean_steps": steps as f64 / n,
            "truncated": truncated,
            "recall": total_recall / n,
        });
        self.finish(&csv, &summary)?;
        Ok(EXIT_OK)
    }

    fn range(&mut self, args: &SearchArgs, radius: f64) -> Outcome {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(usage("--radius must be a positive number"));
        }
        let (cloud, source) = self.load_cloud(&args.cloud)?;
        let queries = self.load_queries(&args.queries)?;
        let tree = build_tree(&cloud, args.leaf_size)?;
        let mut csv = String::from("query,index,distance2\n");
        let (mut found, mut expected, mut steps, mut truncated) = (0usize, 0usize, 0usize, 0usize);
        for (qi, &q) in queries.iter().enumerate() {
            let r = range_search(&tree, q, radius, args.deadline.0);
            for (i, d) in &r.neighbors {
                let _ = writeln!(csv, "{qi},{i},{d}");
            }
            found += r.neighbors.len();
            expected += brute_force_range(cloud.points(), q, radius).len();
            steps += r.steps_used;
            truncated += r.truncated as usize;
        }
        let summary = json!({
            "source": source,
            "points": cloud.len(),
            "queries": queries.len(),
            "radius": radius,
            "deadline": args.deadline.0,
            "mean_steps": steps as f64 / queries.len() as f64,
            "truncated": truncated,
            "found": found,
            "expected": expected,
        });
        self.finish(&csv, &summary)?;
        Ok(EXIT_OK)
    }

    fn profile(
        &mut self,
        cloud: &CloudArgs,
        queries: &QueryArgs,
        k: usize,
        fraction: f64,
        leaf_size: usize,
    ) -> Outcome {
        let (cloud, source) = self.load_cloud(cloud)?;
        let queries = self.load_queries(queries)?;
        let tree = build_tree(&cloud, leaf_size)?;
        let p = profile_deadline(&tree, &queries, k, fraction).map_err(usage)?;
        let fractions = [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0];
        let deadlines: Vec<Option<usize>> = fractions
            .iter()
            .map(|f| Some(((f * p.mean_steps).ceil() as usize).max(1)))
            .collect();
        let mut csv = String::from("fraction,deadline,recall\n");
        for (f, (d, r)) in fractions
            .iter()
            .zip(recall_curve(&tree, &queries, k, &deadlines))
        {
            let _ = writeln!(csv, "{f},{},{r}", d.expect("capped"));
        }
        let summary = json!({
            "source": source,
            "points": cloud.len(),
            "queries": queries.len(),
            "k": k,
            "fraction": fraction,
            "mean_steps": p.mean_steps,
            "max_steps": p.max_steps,
            "deadline": p.deadline,
        });
        self.finish(&csv, &summary)?;
        Ok(EXIT_OK)
    }

    fn stats_chunks(
        &mut self,
        cloud: &CloudArgs,
        queries: &QueryArgs,
        grid: [usize; 3],
        ks: &[usize],
        leaf_size: usize,
    ) -> Outcome {
        if ks.contains(&0) {
            return Err(usage("--k values must be >= 1"));
        }
        let (cloud, source) = self.load_cloud(cloud)?;
        let queries = self.load_queries(queries)?;
        let tree = build_tree(&cloud, leaf_size)?;
        let g = split_grid(&cloud, grid, [1, 1, 1], [1, 1, 1]).map_err(usage)?;
        let mut csv = String::from("k,mean_chunks\n");
        for (k, mean) in chunk_access_curve(&g, &tree, &queries, ks) {
            let _ = writeln!(csv, "{k},{mean}");
        }
        let summary = json!({
            "source": source,
            "points": cloud.len(),
            "queries": queries.len(),
            "grid": g.dims(),
            "chunks": g.cell_count(),
        });
        self.finish(&csv, &summary)?;
        Ok(EXIT_OK)
    }

    fn split(
        &mut self,
        cloud: &CloudArgs,
        grid: Option<[usize; 3]>,
        kernel: [usize; 3],
        stride: [usize; 3],
        serial: Option<usize>,
    ) -> Outcome {
        let (cloud, source) = self.load_cloud(cloud)?;
        let mut csv = String::new();
        let summary = match (grid, serial) {
            (_, Some(0)) => return Err(usage("--serial must be >= 1")),
            (_, Some(n)) => {
                csv.push_str("chunk,start,end\n");
                let chunks = split_serial(cloud.len(), n);
                for (i, r) in chunks.iter().enumerate() {
                    let _ = writeln!(csv, "{i},{},{}", r.start, r.end);
                }
                json!({"source": source, "points": cloud.len(), "chunks": chunks.len()})
            }
            (grid, None) => {
                let g =
                    split_grid(&cloud, grid.unwrap_or([1, 1, 1]), kernel, stride).map_err(usage)?;
                csv.push_str("group,origin_x,origin_y,origin_z,cells,points\n");
                let groups = g.groups();
                for (i, gr) in groups.iter().enumerate() {
                    let o = gr.origin;
                    let _ = writeln!(
                        csv,
                        "{i},{},{},{},{},{}",
                        o[0],
                        o[1],
                        o[2],
                        gr.cells.len(),
                        g.group_points(gr).len()
                    );
                }
                json!({
                    "source": source,
                    "points": cloud.len(),
                    "grid": g.dims(),
                    "kernel": g.kernel(),
                    "stride": g.stride(),
                    "groups": groups.len(),
                })
            }
        };
        self.finish(&csv, &summary)?;
        Ok(EXIT_OK)
    }

    fn sort(&mut self, cloud: &CloudArgs, axis: usize, parts: usize) -> Outcome {
        if axis > 2 {
            return Err(usage("--axis must be 0, 1 or 2"));
        }
        if parts == 0 {
            return Err(usage("--parts must be >= 1"));
        }
        let (cloud, source) = self.load_cloud(cloud)?;
        let boundaries = uniform_boundaries(&cloud, axis, parts);
        let order = chunked_sort(&cloud, axis, &boundaries);
        let matches = order == global_sort(&cloud, axis);
        let mut text = String::with_capacity(order.len() * 6);
        for i in &order {
            let _ = writeln!(text, "{i}");
        }
        let summary = json!({
            "source": source,
            "points": cloud.len(),
            "axis": axis,
            "parts": boundaries.len() + 1,
            "matches_global_sort": matches,
        });
        self.finish(&text, &summary)?;
        Ok(if matches { EXIT_OK } else { EXIT_FAILED })
    }
}

fn build_tree(cloud: &PointCloud, leaf_size: usize) -> Result<KdTree, Failure> {
    if leaf_size == 0 {
        return Err(usage("--leaf-size must be >= 1"));
    }
    Ok(KdTree::build(cloud.points(), leaf_size))
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
