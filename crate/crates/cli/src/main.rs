//! Command-line surface for reproducible desk-scale experiments: classify
//! forbidden-minor lists, generate and decompose the hard-instance trees,
//! profile machines, and build, check, solve, and certify machine-derived
//! instances.
//!
//! Exit codes: 0 success, 1 negative verdict or failed certificate, 2 input
//! error.

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use lcl_landscape::construct::{
    acceptance_data, build_instance, build_lower_bound_instance, check_rules, forced_labeling,
    lcl_problem_of, solver, OUT_STAR,
};
use lcl_landscape::graph::{generate_t, Graph};
use lcl_landscape::local::{indistinguishable, result_to_text, simulate, verify_lcl};
use lcl_landscape::turing::{run_unary, time_profile, ProfileError, TuringMachine};
use lcl_landscape::width::{growth_profile, path_decomposition_of_t};
use lcl_landscape::classify::classify;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "lcl-landscape", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the minor-closed class excluding the given graphs.
    Classify {
        /// Graph files; the class excludes each as a minor.
        files: Vec<PathBuf>,
    },
    /// Generate the level-k span-s hard-instance tree as a graph file.
    GenTree {
        k: usize,
        s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the constructive width-k path decomposition of that tree.
    Pathwidth {
        k: usize,
        s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Neighborhood growth profile of a graph from a root node.
    Growth {
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        root: usize,
        #[arg(long, default_value_t = 8)]
        d_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Step counts of a machine on unary inputs, as CSV.
    TmProfile {
        machine: PathBuf,
        #[arg(long, default_value_t = 10)]
        s_max: usize,
        #[arg(long, default_value_t = 10_000_000)]
        step_cap: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a rule-compliant instance as a graph file.
    BuildInstance {
        s: usize,
        #[arg(long)]
        height: Option<usize>,
        #[arg(long)]
        doubly: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the locally checkable rules on a labeled graph.
    Check {
        graph: PathBuf,
        #[arg(long)]
        doubly: bool,
    },
    /// Run the solving algorithm on a labeled graph and verify the result.
    Solve {
        machine: PathBuf,
        graph: PathBuf,
        #[arg(long)]
        doubly: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling experiment: build, solve, and verify over a range of spine
    /// lengths, emitting CSV rows s,n,max_round,t_s_minus_2.
    Experiment {
        machine: PathBuf,
        #[arg(long, default_value_t = 3)]
        s_min: usize,
        #[arg(long, default_value_t = 5)]
        s_max: usize,
        #[arg(long)]
        doubly: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        step_cap: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the lower-bound instance: indistinguishable views that every
    /// accepted labeling must label differently.
    CertifyLb {
        machine: PathBuf,
        s: usize,
        #[arg(long, default_value_t = 10_000_000)]
        step_cap: u64,
        /// Override the grid height (the certificate needs twice the running
        /// time; smaller values demonstrate failure).
        #[arg(long)]
        height: Option<usize>,
    },
}

fn write_out(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {path:?}"))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    Graph::from_text(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_machine(path: &Path) -> Result<TuringMachine> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    TuringMachine::from_text(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn default_ids(g: &Graph) -> Vec<u64> {
    (0..g.n() as u64).collect()
}

/// Ok(true) = success, Ok(false) = negative verdict (exit 1).
fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Classify { files } => {
            if files.is_empty() {
                eprintln!(
                    "warning: empty forbidden-minor list describes the class of all graphs"
                );
            }
            let mut graphs = Vec::new();
            let mut names = Vec::new();
            for f in &files {
                graphs.push(load_graph(f)?);
                names.push(
                    f.file_stem().map_or_else(|| f.display().to_string(), |s| {
                        s.to_string_lossy().into_owned()
                    }),
                );
            }
            let verdict = classify(&graphs);
            println!("{}", verdict.render(|i| names[i].clone()));
            Ok(true)
        }
        Cmd::GenTree { k, s, out } => {
            let t = generate_t(k, s).map_err(|e| anyhow!("{e}"))?;
            write_out(&out, &t.graph().to_text())?;
            Ok(true)
        }
        Cmd::Pathwidth { k, s, out } => {
            let pd = path_decomposition_of_t(k, s).map_err(|e| anyhow!("{e}"))?;
            write_out(&out, &pd.to_text())?;
            Ok(true)
        }
        Cmd::Growth { graph, root, d_max, out } => {
            let g = load_graph(&graph)?;
            if root >= g.n() {
                return Err(anyhow!("root {root} is not a node of the graph"));
            }
            let report = growth_profile(&g, root, d_max);
            write_out(&out, &report.to_csv())?;
            Ok(true)
        }
        Cmd::TmProfile { machine, s_max, step_cap, out } => {
            let m = load_machine(&machine)?;
            match time_profile(&m, s_max, step_cap) {
                Ok(profile) => {
                    write_out(&out, &profile.to_csv())?;
                    Ok(true)
                }
                Err(ProfileError::Incomplete { timeout_at, partial }) => {
                    write_out(&out, &partial.to_csv())?;
                    eprintln!("profile incomplete: timed out at s = {timeout_at}");
                    Ok(false)
                }
                Err(e) => Err(anyhow!("{e}")),
            }
        }
        Cmd::BuildInstance { s, height, doubly, out } => {
            let h = height.unwrap_or(s);
            let inst = build_instance(s, h, doubly).map_err(|e| anyhow!("{e}"))?;
            write_out(&out, &inst.graph.to_text())?;
            Ok(true)
        }
        Cmd::Check { graph, doubly } => {
            let g = load_graph(&graph)?;
            let violations = check_rules(&g, doubly);
            for v in &violations {
                println!("node {} {} {}", v.node, v.rule_id, v.description);
            }
            println!("violations={}", violations.len());
            Ok(violations.is_empty())
        }
        Cmd::Solve { machine, graph, doubly, seed, out } => {
            let m = load_machine(&machine)?;
            let g = load_graph(&graph)?;
            let alg = solver(&m, doubly);
            let result =
                simulate(&alg, &g, &default_ids(&g), seed).map_err(|e| anyhow!("{e}"))?;
            write_out(&out, &result_to_text(&result))?;
            let problem = lcl_problem_of(&m, doubly);
            let (ok, violations) = verify_lcl(&problem, &g, &result.outputs)?;
            eprintln!(
                "max_round={} verified={}{}",
                result.max_round,
                ok,
                if ok { String::new() } else { format!(" violations={violations:?}") }
            );
            Ok(ok)
        }
        Cmd::Experiment { machine, s_min, s_max, doubly, seed, step_cap, out } => {
            if s_min < 3 {
                return Err(anyhow!(
                    "spine length must be at least 3; shorter spines count as errors"
                ));
            }
            let m = load_machine(&machine)?;
            let problem = lcl_problem_of(&m, doubly);
            let alg = solver(&m, doubly);
            let started = Instant::now();
            let mut csv = format!(
                "# experiment machine={} s={}..{} doubly={} seed={}\ns,n,max_round,t_s_minus_2\n",
                machine.display(),
                s_min,
                s_max,
                doubly,
                seed
            );
            let mut all_ok = true;
            for s in s_min..=s_max {
                let t = match run_unary(&m, s - 2, step_cap) {
                    Ok(outcome) => outcome.steps as usize,
                    Err(_) => {
                        csv.push_str(&format!("{s},,,\n"));
                        all_ok = false;
                        continue;
                    }
                };
                let inst = build_instance(s, t + s, doubly).map_err(|e| anyhow!("{e}"))?;
                let result = simulate(&alg, &inst.graph, &default_ids(&inst.graph), seed)
                    .map_err(|e| anyhow!("{e}"))?;
                let (ok, _) = verify_lcl(&problem, &inst.graph, &result.outputs)?;
                if !ok {
                    return Err(anyhow!("solver output rejected at s = {s}"));
                }
                csv.push_str(&format!("{s},{},{},{t}\n", inst.graph.n(), result.max_round));
            }
            write_out(&out, &csv)?;
            eprintln!("wall-time={:?}", started.elapsed());
            Ok(all_ok)
        }
        Cmd::CertifyLb { machine, s, step_cap, height } => {
            let m = load_machine(&machine)?;
            let (inst, acc) = match height {
                None => build_lower_bound_instance(&m, s, step_cap).map_err(|e| anyhow!("{e}"))?,
                Some(h) => {
                    let acc = acceptance_data(&m, s, step_cap).map_err(|e| anyhow!("{e}"))?;
                    (build_instance(s, h, false).map_err(|e| anyhow!("{e}"))?, acc)
                }
            };
            let t = acc.steps as usize;
            println!(
                "steps={} accept_row={} accept_col={} radius={}",
                acc.steps,
                acc.accept_row,
                acc.accept_col,
                t - 1
            );
            if acc.accept_row > inst.height {
                println!("views-isomorphic: FAIL (grid of height {} cannot contain the accepting row {})", inst.height, acc.accept_row);
                println!("outputs-forced-distinct: FAIL (accepting row is outside the grid)");
                return Ok(false);
            }
            let content = inst.grid_node(acc.accept_row - 1, acc.accept_col);
            let star = inst.grid_node(acc.accept_row, acc.accept_col);
            println!("pair={content}:{star}");
            let iso = indistinguishable(&inst.graph, content, star, t - 1);
            println!(
                "views-isomorphic: {}",
                if iso {
                    "PASS".to_string()
                } else {
                    format!("FAIL (height {} leaves the views distinguishable)", inst.height)
                }
            );
            let forced = match forced_labeling(&inst, &m) {
                Ok(labels) => {
                    let distinct = labels[star] == OUT_STAR && labels[content] != OUT_STAR;
                    println!(
                        "outputs-forced-distinct: {}",
                        if distinct { "PASS" } else { "FAIL" }
                    );
                    distinct
                }
                Err(e) => {
                    println!("outputs-forced-distinct: FAIL ({e})");
                    false
                }
            };
            Ok(iso && forced)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
