use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use roundelim_core::bounds::{deterministic_regime, failure_floor, randomized_regime, NodeCount};
use roundelim_core::cert::{verify_certificate, verify_certificate_text, Certificate};
use roundelim_core::family::{auto_bound, chain_expected, t_bound, verify_chain, FamilyMember, Ranking, SearchConfig};
use roundelim_core::problem::{parse_problem, render_problem, Problem, Side};
use roundelim_core::re::ReLimits;
use roundelim_core::sim::{check_xy_matching, gen_regular_bipartite, gen_tree, run_proposal, SimGraph};
use roundelim_core::Error;

use crate::ops::{diagram_text, exit, exit_code, speedup, zero_round_json, zero_round_text};

#[derive(Parser, Debug)]
#[command(name = "roundelim", version, about = "Round elimination for problems on 2-colored regular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    White,
    Black,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::White => Side::White,
            SideArg::Black => Side::Black,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RankingArg {
    Larger,
    Smaller,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One round elimination step (RE_B for black, RE_W for white).
    Speedup {
        #[arg(long, value_enum)]
        side: SideArg,
        /// Problem file, `-` for stdin.
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Keep the set names instead of renaming to A, B, ...
        #[arg(long)]
        keep_set_names: bool,
    },
    /// Strength diagram of one side, one `K -> L` arrow per line.
    Diagram {
        #[arg(long, value_enum, default_value = "black")]
        side: SideArg,
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
    },
    /// Decides 0-round solvability.
    Zeroround {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long, value_enum, default_value = "white")]
        side: SideArg,
        #[arg(long)]
        json: bool,
    },
    /// The lower-bound chain for x-maximal y-matching.
    Chain {
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        /// Recompute and check every step.
        #[arg(long)]
        verify: bool,
        /// Write the certificate of a verified chain.
        #[arg(long, requires = "verify")]
        cert: Option<PathBuf>,
    },
    /// Bounded automatic round elimination.
    Autobound {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        max_labels: usize,
        #[arg(long, default_value_t = 8)]
        max_steps: usize,
        #[arg(long, default_value_t = 6)]
        beam: usize,
        #[arg(long, value_enum, default_value = "larger")]
        ranking: RankingArg,
        #[arg(long, default_value_t = 5000)]
        max_re_steps: u64,
        /// Write the certificate here.
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
        /// Print the certificate instead of the chain.
        #[arg(long)]
        json: bool,
    },
    /// Runs the proposal algorithm and checks its output.
    Simulate {
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        /// Nodes per side of the random regular graph.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use a balanced tree of this depth instead.
        #[arg(long, conflicts_with = "graph")]
        tree: Option<usize>,
        /// Read the graph from an edge-list file.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        allow_multigraph: bool,
        /// Write the line-delimited transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Round bound, failure floor and regime verdicts.
    Bound {
        /// Node count: an integer or `2^E`.
        #[arg(long)]
        n: String,
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Checks a chain certificate from scratch.
    VerifyCert { file: PathBuf },
    /// Starts the local session service.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        /// Write one snapshot file per session into this directory.
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
    },
}

enum Failure {
    Engine(Error),
    Io(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Engine(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_problem(path: &Path) -> Result<Problem, Failure> {
    Ok(parse_problem(&read_text(path)?)?)
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(()) => exit::OK,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Engine(e) => (exit_code(&e), e.to_string()),
                Failure::Io(m) => (exit::INPUT, m),
                Failure::Verification(m) => (exit::VERIFICATION, m),
            };
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn run(cmd: Command, out: &mut dyn Write) -> Outcome {
    let limits = ReLimits::default();
    match cmd {
        Command::Speedup {
            side,
            file,
            keep_set_names,
        } => {
            let p = read_problem(&file)?;
            out.write_all(speedup(&p, side.into(), keep_set_names, &limits)?.render().as_bytes())?;
        }
        Command::Diagram { side, file } => {
            let p = read_problem(&file)?;
            out.write_all(diagram_text(&p, side.into())?.as_bytes())?;
        }
        Command::Zeroround { file, side, json } => {
            let p = read_problem(&file)?;
            if json {
                let v = zero_round_json(&p, side.into())?;
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))?;
            } else {
                out.write_all(zero_round_text(&p, side.into())?.as_bytes())?;
            }
        }
        Command::Chain {
            delta,
            x,
            y,
            verify,
            cert,
        } => chain(delta, x, y, verify, cert.as_deref(), out)?,
        Command::Autobound {
            file,
            max_labels,
            max_steps,
            beam,
            ranking,
            max_re_steps,
            out: path,
            json,
        } => {
            let p = read_problem(&file)?;
            let cfg = SearchConfig {
                max_labels,
                max_steps,
                beam,
                ranking: match ranking {
                    RankingArg::Larger => Ranking::FewerLabelsThenLarger,
                    RankingArg::Smaller => Ranking::FewerLabelsThenSmaller,
                },
                max_re_steps,
                ..SearchConfig::default()
            };
            let found = auto_bound(&p, &cfg)?;
            let cert = Certificate::from_chain(&found.chain);
            let report = verify_certificate(&cert, &limits).map_err(|e| Failure::Verification(e.to_string()))?;
            if let Some(path) = &path {
                write_file(path, &cert.to_json())?;
            }
            if json {
                writeln!(out, "{}", cert.to_json())?;
                return Ok(());
            }
            for i in 0..found.chain.len() {
                writeln!(out, "# problem {i}, checked for {}", found.chain.side(i))?;
                out.write_all(render_problem(found.chain.problem(i)).as_bytes())?;
                writeln!(out)?;
            }
            if !found.chain.complete {
                writeln!(out, "search stopped after {} steps; the chain may not be the longest", found.re_steps)?;
            }
            if let Some(j) = report.fixed_point {
                writeln!(out, "fixed point: the last problem repeats problem {j}")?;
            }
            writeln!(out, "certified lower bound: {}", report.bound)?;
        }
        Command::Simulate {
            delta,
            x,
            y,
            n,
            seed,
            tree,
            graph,
            allow_multigraph,
            transcript,
        } => {
            let g = match (tree, graph) {
                (Some(depth), _) => gen_tree(delta, depth)?,
                (None, Some(path)) => SimGraph::parse_exchange(&read_text(&path)?)?,
                (None, None) => gen_regular_bipartite(n, delta, seed, allow_multigraph)?,
            };
            if g.max_degree() != delta {
                return Err(Failure::Engine(Error::Graph(format!(
                    "graph has maximum degree {}, expected {delta}",
                    g.max_degree()
                ))));
            }
            let run = run_proposal(&g, x, y)?;
            let verdict = check_xy_matching(&g, &run.labeling, x, y)?;
            if let Some(path) = &transcript {
                write_file(path, &run.transcript.to_jsonl())?;
            }
            writeln!(out, "rounds: {}, valid: {}", run.transcript.rounds_used, verdict.valid())?;
            if !verdict.valid() {
                return Err(Failure::Verification(format!(
                    "packing violations {:?}, covering violations {:?}, encoding violations {:?}",
                    verdict.packing, verdict.covering, verdict.encoding
                )));
            }
        }
        Command::Bound { n, delta, x, y, k } => bound(&n, delta, x, y, k, out)?,
        Command::VerifyCert { file } => {
            let text = read_text(&file)?;
            let report = verify_certificate_text(&text, &limits).map_err(|e| Failure::Verification(e.to_string()))?;
            writeln!(out, "steps checked: {}", report.steps_checked)?;
            if let Some(j) = report.fixed_point {
                writeln!(out, "fixed point: the last problem repeats problem {j}")?;
            }
            writeln!(out, "verified lower bound: {}", report.bound)?;
        }
        Command::Serve { port, snapshot_dir } => {
            if let Some(dir) = &snapshot_dir {
                std::fs::create_dir_all(dir)?;
            }
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(crate::service::serve(port, snapshot_dir))?;
        }
    }
    Ok(())
}

fn describe(m: FamilyMember, i: usize) -> String {
    let side = if i.is_multiple_of(2) { "white" } else { "black" };
    format!("# problem {i}: {m}, checked for {side}")
}

fn chain(delta: usize, x: usize, y: usize, verify: bool, cert: Option<&Path>, out: &mut dyn Write) -> Outcome {
    if !verify {
        let members = chain_expected(delta, x, y)?;
        let members = if members.is_empty() {
            vec![FamilyMember::Phi { x, y }]
        } else {
            members
        };
        for (i, m) in members.iter().enumerate() {
            writeln!(out, "{}", describe(*m, i))?;
            out.write_all(render_problem(&m.build(delta)?).as_bytes())?;
            writeln!(out)?;
        }
        writeln!(out, "lower bound (not verified): {}", t_bound(delta, x, y)?)?;
        return Ok(());
    }
    let c = verify_chain(delta, x, y)?;
    for i in 0..c.len() {
        let m = if i == 0 {
            c.start_member
        } else {
            c.steps[i - 1].member
        };
        let head = match m {
            Some(m) => describe(m, i),
            None => format!("# problem {i}"),
        };
        writeln!(out, "{head}")?;
        out.write_all(render_problem(c.problem(i)).as_bytes())?;
        writeln!(out)?;
    }
    if let Some(path) = cert {
        write_file(path, &Certificate::from_chain(&c).to_json())?;
    }
    writeln!(out, "verified lower bound: {}", c.claimed_bound)?;
    Ok(())
}

fn bound(n: &str, delta: usize, x: usize, y: usize, k: usize, out: &mut dyn Write) -> Outcome {
    let n: NodeCount = n.parse()?;
    let t = t_bound(delta, x, y)?;
    let r = randomized_regime(n, delta, x, y, k)?;
    let d = deterministic_regime(n, delta, x, y, k)?;
    let row = |out: &mut dyn Write, name: &str, value: String| writeln!(out, "{name:<28}{value}");
    row(out, "log2 n", format!("{}", n.log2))?;
    row(out, "rounds T(delta,x,y)", t.to_string())?;
    match failure_floor(delta, t) {
        Ok(f) => row(out, "failure floor", f.to_string())?,
        Err(_) => row(out, "failure floor", "none (T = 0)".into())?,
    }
    row(out, "floor >= 1/n", r.floor_at_least_inverse_n.to_string())?;
    row(out, "delta^(1/k)", format!("{:.6}", r.delta_root))?;
    row(out, "randomized threshold", format!("{:.6}", r.threshold))?;
    row(out, "randomized verdict", r.verdict.to_string())?;
    row(out, "deterministic log term", format!("{:.6}", d.log_term))?;
    row(out, "deterministic bound", format!("Omega({:.6})", d.bound))?;
    row(out, "deterministic exempt", d.exempt.to_string())?;
    Ok(())
}
