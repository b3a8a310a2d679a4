//! `rfdkit` command line: ingest graph JSON, run the structural analyses,
//! and emit reports, certificates, and matrix families as JSON.
//!
//! Exit codes are a stable contract: 0 success (RFD for `certify`, pass
//! for `verify`), 1 I/O failure, 2 parse failure, 3 precondition or usage
//! failure, 4 certificate/graph digest mismatch, 5 failed verification
//! check, 10 NotRFD verdict.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rfdkit::certificate::{
    build_separating_family, decide_rfd_with, verify_certificate, Certificate, Tolerances, Verdict,
};
use rfdkit::error::Error;
use rfdkit::graph::{
    count_paths_from, cycle_vertices, decompose, find_cycles, no_cycle_has_entry, sources,
    DecompositionSummary, Graph,
};
use rfdkit::rep::{check_ck_with_tol, RepDto};

#[derive(Parser)]
#[command(
    name = "rfdkit",
    version,
    about = "Decides residual finite-dimensionality of finite-graph C*-algebras and builds verifiable certificates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Graph JSON file: {"vertices": [...], "edges": [{"id","src","rng"}]}
    #[arg(short, long)]
    input: PathBuf,
    /// Write the JSON report here instead of standard output
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Monomial length bound L for basis truncation
    #[arg(long = "trunc", default_value_t = 2)]
    trunc: usize,
    /// Number m of roots of unity (must be at least 2L+1)
    #[arg(long = "zcount", default_value_t = 5)]
    zcount: usize,
    /// Relation-residual tolerance
    #[arg(long = "tol-ck", default_value_t = rfdkit::rep::TOL_CK)]
    tol_ck: f64,
    /// Relative singular-value threshold for rank checks
    #[arg(long = "tol-rank", default_value_t = rfdkit::rep::TOL_RANK)]
    tol_rank: f64,
    /// Seed for randomized test corpora; echoed in reports
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Structural report: sources, cycles, entry verdict, path counts
    Analyze(CommonArgs),
    /// Cycles/forest decomposition of a no-entry graph
    Decompose(CommonArgs),
    /// Synthesize the separating representation family
    Synthesize(CommonArgs),
    /// Decide the criterion and emit a certificate (exit 0 RFD, 10 NotRFD)
    Certify(CommonArgs),
    /// Replay the checks embedded in a certificate
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Certificate JSON produced by `certify`
        #[arg(long)]
        cert: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::MalformedJson(_)
            | Error::DuplicateId { .. }
            | Error::DanglingEndpoint { .. }
            | Error::EmptyGraph
            | Error::MalformedCertificate(_)
            | Error::MalformedPath(_) => 2,
            Error::DigestMismatch { .. } => 4,
            _ => 3,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(1, format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    Ok(Graph::from_json(&read_file(path)?)?)
}

fn emit(common: &CommonArgs, body: &str) -> Result<(), Failure> {
    match &common.output {
        Some(path) => std::fs::write(path, format!("{body}\n"))
            .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn check_usage(common: &CommonArgs) -> Result<(), Failure> {
    if common.zcount < 2 * common.trunc + 1 {
        return Err(Failure::new(
            3,
            format!(
                "zcount {} is below 2*trunc+1 = {}",
                common.zcount,
                2 * common.trunc + 1
            ),
        ));
    }
    if common.tol_ck <= 0.0 || common.tol_rank <= 0.0 {
        return Err(Failure::new(3, "tolerances must be positive"));
    }
    Ok(())
}

fn tolerances(common: &CommonArgs) -> Tolerances {
    Tolerances {
        tol_ck: common.tol_ck,
        tol_rank: common.tol_rank,
        ..Tolerances::default()
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Command::Analyze(c) => run_analyze(&c),
        Command::Decompose(c) => run_decompose(&c),
        Command::Synthesize(c) => run_synthesize(&c),
        Command::Certify(c) => run_certify(&c),
        Command::Verify { common, cert } => run_verify(&common, &cert),
    }
}

fn run_analyze(common: &CommonArgs) -> Result<u8, Failure> {
    let g = load_graph(&common.input)?;
    let check = no_cycle_has_entry(&g);
    let mut path_counts = BTreeMap::new();
    for v in g.vertices() {
        path_counts.insert(
            v.clone(),
            count_paths_from(&g, v).ok().map(serde_json::Value::from),
        );
    }
    let mut report = json!({
        "graph_digest": g.digest(),
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "sources": sources(&g),
        "cycle_vertices": cycle_vertices(&g),
        "no_cycle_has_entry": check.holds,
        "path_counts": path_counts,
    });
    let obj = report.as_object_mut().expect("report is an object");
    if let Some(w) = &check.witness {
        obj.insert("witness".into(), json!(w));
    }
    if check.holds {
        let cycles = find_cycles(&g)?;
        obj.insert("cycles".into(), json!(cycles.len()));
        obj.insert(
            "cycle_list".into(),
            json!(cycles
                .iter()
                .map(|c| json!({"base": c.base(), "edges": c.edges()}))
                .collect::<Vec<_>>()),
        );
        match decompose(&g) {
            Ok(d) => {
                obj.insert("case".into(), json!(d.case_flag));
                obj.insert("decomposition".into(), json!(DecompositionSummary::new(&d)?));
            }
            Err(Error::TrivialDecomposition(reason)) => {
                obj.insert("decomposition".into(), json!(null));
                obj.insert("trivial_decomposition".into(), json!(reason));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(seed) = common.seed {
        obj.insert("seed".into(), json!(seed));
    }
    emit(common, &serde_json::to_string_pretty(&report).expect("valid json"))?;
    Ok(0)
}

fn run_decompose(common: &CommonArgs) -> Result<u8, Failure> {
    let g = load_graph(&common.input)?;
    let d = decompose(&g)?;
    let report = json!({
        "graph_digest": g.digest(),
        "case": d.case_flag,
        "g1": d.g1,
        "g2": d.g2,
        "shared": d.shared,
        "alphas": d.alphas,
        "betas": d.betas,
        "summary": DecompositionSummary::new(&d)?,
    });
    emit(common, &serde_json::to_string_pretty(&report).expect("valid json"))?;
    Ok(0)
}

fn run_synthesize(common: &CommonArgs) -> Result<u8, Failure> {
    check_usage(common)?;
    let g = load_graph(&common.input)?;
    let tol = tolerances(common);
    let fam = build_separating_family(&g, common.trunc, common.zcount, tol.tol_rank)?;
    let ck: Vec<_> = fam
        .reps
        .iter()
        .map(|r| {
            let report = check_ck_with_tol(r, tol.tol_ck);
            json!({
                "max_residual": report.max_residual,
                "unitality_residual": report.unitality_residual,
                "pass": report.pass,
            })
        })
        .collect();
    let report = json!({
        "graph_digest": g.digest(),
        "params": {"trunc": common.trunc, "zcount": common.zcount},
        "construction": fam.construction,
        "zs": fam.zs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "family": fam.reps.iter().map(RepDto::from_rep).collect::<Vec<_>>(),
        "ck": ck,
        "separation": fam.separation,
    });
    emit(common, &serde_json::to_string_pretty(&report).expect("valid json"))?;
    Ok(0)
}

fn run_certify(common: &CommonArgs) -> Result<u8, Failure> {
    check_usage(common)?;
    let g = load_graph(&common.input)?;
    let cert = decide_rfd_with(&g, common.trunc, common.zcount, tolerances(common))?;
    let verdict = cert.verdict;
    emit(common, &cert.to_json_pretty())?;
    Ok(match verdict {
        Verdict::Rfd => 0,
        Verdict::NotRfd => 10,
    })
}

fn run_verify(common: &CommonArgs, cert_path: &Path) -> Result<u8, Failure> {
    let g = load_graph(&common.input)?;
    let cert = Certificate::from_json(&read_file(cert_path)?)?;
    let report = verify_certificate(&g, &cert);
    emit(common, &serde_json::to_string_pretty(&report).expect("valid json"))?;
    Ok(if report.pass {
        0
    } else if report.digest_mismatch {
        4
    } else {
        5
    })
}
