//! Command-line front end: every solver behind one binary, reports as JSON
//! (or CSV where a flat schema exists) with certificates embedded.
//!
//! Exit codes: 0 success with verified certificates, 1 certificate failed
//! re-verification, 2 invalid input or over-budget request.

use std::fs;
use std::io::{self, BufRead};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sqsum::analytic::{
    bump_build, divisor_witness, poisson_check, weyl_bound_ratio, weyl_sum, weyl_sum_oracle,
    BumpSpec, WeylInstance,
};
use sqsum::congruence::{solve_quadratic_congruence, CongruenceInstance};
use sqsum::extremal::{construct_example1, construct_example2, is_square_sum_free, sf_exact, scaling_report, SfRecord};
use sqsum::factor::tau;
use sqsum::gap_squares::{
    find_pz2_in_ap, find_pz2_in_gap2, verify_gap_membership, ApSquareInstance, Gap2SquareInstance,
};
use sqsum::structure::{
    dichotomy, greedy_disjoint_blocks, iterate_dichotomy, merge_algorithm, verify_dichotomy,
    DichotomyBranch, DichotomyStep,
};
use sqsum::sumset::SumBitset;
use sqsum::{Error, IntegerSet, Result, SolverConfig};

#[derive(Parser)]
#[command(name = "sqsum", version, about = "Squares among subset sums: search, construct, certify")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// JSON file with solver settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Single-line JSON instead of pretty-printed.
    #[arg(long, global = true)]
    compact: bool,

    /// Include wall-clock milliseconds in reports (opts out of
    /// byte-identical output).
    #[arg(long, global = true)]
    timing: bool,

    /// CSV rows instead of JSON, where the subcommand has a schema.
    #[arg(long, global = true)]
    csv: bool,

    /// Read one JSON instance per stdin line, write one report line each
    /// (sf, square-in-gap, congruence, weyl, divisor).
    #[arg(long, global = true)]
    batch: bool,

    /// Worker threads for batch mode; output order stays the input order.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Maximum square-sum-free subset of [n].
    ///
    /// CSV schema: n,sf,exact,witness,ratio,nodes,ms
    Sf {
        /// Omit only with --batch, where n comes from stdin lines.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Explicit square-sum-free or progression-bounded sets. JSON only.
    Construct {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Variant::Multiplier)]
        variant: Variant,
    },
    /// Search {r + q*x} (rank 1) or {r + q*(q1*x1 + q2*x2)} (rank 2) for
    /// p times a perfect square.
    ///
    /// CSV schema: rank,r,q,p,L,q1,q2,L1,L2,found,root,x1,x2,mode
    SquareInGap {
        #[arg(long)]
        r: Option<i128>,
        #[arg(long)]
        q: Option<i128>,
        #[arg(long, default_value_t = 1)]
        p: i128,
        /// Rank-1 coordinate limit.
        #[arg(long = "L")]
        l: Option<u64>,
        #[arg(long)]
        q1: Option<i128>,
        #[arg(long)]
        q2: Option<i128>,
        #[arg(long = "L1")]
        l1: Option<u64>,
        #[arg(long = "L2")]
        l2: Option<u64>,
    },
    /// Bounded solution of a1*x1 + .. + ad*xd + r = p*z^2 (mod q).
    ///
    /// CSV schema: q,p,r,a,found,x,z,bound
    Congruence {
        /// Coefficients, comma separated.
        #[arg(long, value_delimiter = ',')]
        a: Vec<i128>,
        #[arg(long)]
        r: Option<i128>,
        #[arg(long, default_value_t = 1)]
        p: i128,
        #[arg(long)]
        q: Option<i128>,
    },
    /// Quadratic exponential sum with an extended-precision audit.
    ///
    /// CSV schema: a,q,theta,I,N,M,sum,oracle,ratio
    Weyl {
        #[arg(long)]
        a: Option<i64>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long = "I", default_value_t = 0)]
        i_start: i64,
        #[arg(long = "N")]
        n: Option<u64>,
        #[arg(long = "M")]
        m: Option<u64>,
        /// Also report sum / ((M*sqrt(N) + M*N/sqrt(q)) * ln(MN)^alpha).
        #[arg(long)]
        ratio: bool,
        #[arg(long, default_value_t = 6.0)]
        alpha: f64,
    },
    /// Smooth cutoff: mass, support, and transform decay at --lambda.
    ///
    /// CSV schema: m,n,delta,mass,lambda,transform,envelope
    Bump {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Divisor d | n with d <= n^(1/k) and a guaranteed share of the
    /// divisor count.
    ///
    /// CSV schema: n,k,d,ok
    Divisor {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Periodized-sum identity check for one (T, t) pair.
    ///
    /// CSV schema: m,n,delta,T,t,lhs,rhs,diff,ok
    Poisson {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "T")]
        t_period: f64,
        #[arg(long = "t")]
        t_shift: f64,
    },
    /// Divisor-or-progression dichotomy over a set. JSON only.
    Structure {
        /// Elements, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "interval", required_unless_present = "interval")]
        elements: Option<Vec<u64>>,
        /// Shorthand for the interval {1..n}.
        #[arg(long)]
        interval: Option<u64>,
        #[arg(long, default_value_t = 1)]
        p: u64,
        /// Print the merge trace as a JSON line before the report.
        #[arg(long)]
        trace: bool,
        /// Iterate divisor steps until a progression or a small set.
        #[arg(long)]
        iterate: bool,
    },
    /// Growth table over a list of sizes.
    ///
    /// CSV schema: n,sf,exact,witness,ratio,nodes,ms
    Report {
        /// Sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    /// Multiples of one square-free modulus near n^(2/3).
    Multiplier,
    /// Two-prime grid whose subset sums stay in a rank-2 progression.
    Grid,
}

#[derive(Serialize)]
struct Certificate {
    name: &'static str,
    verified: bool,
}

#[derive(Serialize)]
struct Report<'a> {
    subcommand: &'static str,
    config: &'a SolverConfig,
    instance: Value,
    result: Value,
    certificates: Vec<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
}

/// One finished run: what to print and whether its certificates held.
struct Run {
    instance: Value,
    result: Value,
    certificates: Vec<Certificate>,
    /// (header, rows); rows end with an empty ms cell iff the header does.
    csv: Option<(&'static str, Vec<Vec<String>>)>,
    /// Extra JSON lines printed before the report (merge traces).
    pre_lines: Vec<String>,
}

impl Run {
    fn new(instance: Value, result: Value, certificates: Vec<Certificate>) -> Self {
        Run {
            instance,
            result,
            certificates,
            csv: None,
            pre_lines: Vec::new(),
        }
    }

    fn with_csv(mut self, header: &'static str, rows: Vec<Vec<String>>) -> Self {
        self.csv = Some((header, rows));
        self
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::VerificationFailed(_) | Error::Overflow(_) => 1,
        _ => 2,
    }
}

fn load_config(path: Option<&PathBuf>, seed: Option<u64>) -> Result<SolverConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::InvalidInput(format!("config {}: {e}", p.display())))?;
            SolverConfig::from_json(&text)?
        }
        None => SolverConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = load_config(cli.config.as_ref(), cli.seed)?;
    if cli.batch {
        return run_batch(&cli, &cfg);
    }
    let started = Instant::now();
    let run = dispatch(&cli.cmd, &cfg)?;
    let ms = cli.timing.then(|| started.elapsed().as_millis());
    print_run(&cli, &cfg, subcommand_name(&cli.cmd), run, ms, true)
}

fn subcommand_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Sf { .. } => "sf",
        Cmd::Construct { .. } => "construct",
        Cmd::SquareInGap { .. } => "square-in-gap",
        Cmd::Congruence { .. } => "congruence",
        Cmd::Weyl { .. } => "weyl",
        Cmd::Bump { .. } => "bump",
        Cmd::Divisor { .. } => "divisor",
        Cmd::Poisson { .. } => "poisson",
        Cmd::Structure { .. } => "structure",
        Cmd::Report { .. } => "report",
    }
}

/// Prints one run and folds its certificate verdicts into the exit code.
fn print_run(
    cli: &Cli,
    cfg: &SolverConfig,
    name: &'static str,
    run: Run,
    ms: Option<u128>,
    header: bool,
) -> Result<ExitCode> {
    let any_failed = run.certificates.iter().any(|c| !c.verified);
    for line in &run.pre_lines {
        println!("{line}");
    }
    if cli.csv {
        let (schema, rows) = run.csv.ok_or_else(|| {
            Error::InvalidInput(format!("subcommand {name} has no CSV schema, use JSON"))
        })?;
        if header {
            println!("{schema}");
        }
        let stamp_ms = schema.ends_with(",ms");
        for mut row in rows {
            if stamp_ms {
                if let (Some(ms), Some(last)) = (ms, row.last_mut()) {
                    *last = ms.to_string();
                }
            }
            println!("{}", row.join(","));
        }
    } else {
        let report = Report {
            subcommand: name,
            config: cfg,
            instance: run.instance,
            result: run.result,
            certificates: run.certificates,
            timing_ms: ms,
        };
        let text = if cli.compact || cli.batch {
            serde_json::to_string(&report)
        } else {
            serde_json::to_string_pretty(&report)
        }
        .expect("report serializes");
        println!("{text}");
    }
    Ok(if any_failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

/// Instance flags are optional at parse time so --batch can omit them; a
/// direct run still requires them.
fn req<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidInput(format!("missing {flag} (or use --batch)")))
}

fn dispatch(cmd: &Cmd, cfg: &SolverConfig) -> Result<Run> {
    match cmd {
        Cmd::Sf { n } => run_sf(cfg, req(*n, "--n")?),
        Cmd::Construct { n, variant } => run_construct(cfg, *n, *variant),
        Cmd::SquareInGap {
            r,
            q,
            p,
            l,
            q1,
            q2,
            l1,
            l2,
        } => run_square_in_gap(
            req(*r, "--r")?,
            req(*q, "--q")?,
            *p,
            *l,
            *q1,
            *q2,
            *l1,
            *l2,
        ),
        Cmd::Congruence { a, r, p, q } => {
            run_congruence(cfg, a.clone(), req(*r, "--r")?, *p, req(*q, "--q")?)
        }
        Cmd::Weyl {
            a,
            q,
            theta,
            i_start,
            n,
            m,
            ratio,
            alpha,
        } => run_weyl(
            cfg,
            req(*a, "--a")?,
            req(*q, "--q")?,
            req(*theta, "--theta")?,
            *i_start,
            req(*n, "--N")?,
            req(*m, "--M")?,
            *ratio,
            *alpha,
        ),
        Cmd::Bump { m, n, delta, lambda } => run_bump(*m, *n, *delta, *lambda),
        Cmd::Divisor { n, k } => run_divisor(req(*n, "--n")?, req(*k, "--k")?),
        Cmd::Poisson {
            m,
            n,
            delta,
            t_period,
            t_shift,
        } => run_poisson(cfg, *m, *n, *delta, *t_period, *t_shift),
        Cmd::Structure {
            elements,
            interval,
            p,
            trace,
            iterate,
        } => run_structure(cfg, elements.clone(), *interval, *p, *trace, *iterate),
        Cmd::Report { ns } => run_report(cfg, ns),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn sf_result(rec: &SfRecord) -> Value {
    json!({
        "n": rec.n,
        "sf": rec.sf_value,
        "witness": rec.witness.elements(),
        "exact": rec.exact,
        "nodes": rec.nodes,
        "lower_construction": rec.lower_construction_size,
        "ratio": rec.sf_value as f64 / (rec.n as f64).cbrt(),
    })
}

fn sf_csv_row(rec: &SfRecord) -> Vec<String> {
    vec![
        rec.n.to_string(),
        rec.sf_value.to_string(),
        rec.exact.to_string(),
        join(rec.witness.elements()),
        format!("{:.6}", rec.sf_value as f64 / (rec.n as f64).cbrt()),
        rec.nodes.to_string(),
        String::new(),
    ]
}

const SF_SCHEMA: &str = "n,sf,exact,witness,ratio,nodes,ms";

fn run_sf(cfg: &SolverConfig, n: u64) -> Result<Run> {
    let rec = sf_exact(n, cfg)?;
    let verified = is_square_sum_free(&rec.witness, cfg.memory_budget_bits)?;
    Ok(Run::new(
        json!({ "n": n }),
        sf_result(&rec),
        vec![Certificate {
            name: "witness-square-sum-free",
            verified,
        }],
    )
    .with_csv(SF_SCHEMA, vec![sf_csv_row(&rec)]))
}

fn run_report(cfg: &SolverConfig, ns: &[u64]) -> Result<Run> {
    let rows = scaling_report(ns, cfg)?;
    let mut verified = true;
    for rec in &rows {
        verified &= is_square_sum_free(&rec.witness, cfg.memory_budget_bits)?;
    }
    let result: Vec<Value> = rows.iter().map(sf_result).collect();
    let csv_rows = rows.iter().map(sf_csv_row).collect();
    Ok(Run::new(
        json!({ "ns": ns }),
        Value::Array(result),
        vec![Certificate {
            name: "witnesses-square-sum-free",
            verified,
        }],
    )
    .with_csv(SF_SCHEMA, csv_rows))
}

fn run_construct(cfg: &SolverConfig, n: u64, variant: Variant) -> Result<Run> {
    match variant {
        Variant::Multiplier => {
            let a = construct_example1(n)?;
            let verified = is_square_sum_free(&a, cfg.memory_budget_bits)?;
            Ok(Run::new(
                json!({ "n": n, "variant": "multiplier" }),
                json!({
                    "elements": a.elements(),
                    "size": a.len(),
                    "modulus": a.elements().first().copied().unwrap_or(0),
                }),
                vec![Certificate {
                    name: "square-sum-free",
                    verified,
                }],
            ))
        }
        Variant::Grid => {
            let (a, gap) = construct_example2(n)?;
            let sums = SumBitset::subset_sums(&a, cfg.memory_budget_bits)?;
            let contained = sums
                .values()
                .iter()
                .all(|&v| verify_gap_membership(&gap, v as i128).is_some());
            let proper = gap.is_proper(cfg.enumeration_budget)?;
            Ok(Run::new(
                json!({ "n": n, "variant": "grid" }),
                json!({
                    "elements": a.elements(),
                    "size": a.len(),
                    "gap": { "offset": gap.offset, "steps": gap.steps, "sizes": gap.sizes },
                    "sums": sums.count(),
                }),
                vec![
                    Certificate {
                        name: "sums-inside-progression",
                        verified: contained,
                    },
                    Certificate {
                        name: "progression-proper",
                        verified: proper,
                    },
                ],
            ))
        }
    }
}

const GAP_SCHEMA: &str = "rank,r,q,p,L,q1,q2,L1,L2,found,root,x1,x2,mode";

#[allow(clippy::too_many_arguments)]
fn run_square_in_gap(
    r: i128,
    q: i128,
    p: i128,
    l: Option<u64>,
    q1: Option<i128>,
    q2: Option<i128>,
    l1: Option<u64>,
    l2: Option<u64>,
) -> Result<Run> {
    match (l, q1, q2, l1, l2) {
        (Some(l), None, None, None, None) => {
            let inst = ApSquareInstance::new(r, q, l, p)?;
            let (result, certificates, row_tail) = match find_pz2_in_ap(&inst) {
                Ok(Some(hit)) => {
                    let verified = p * hit.z * hit.z == r + q * hit.x
                        && hit.x >= 0
                        && hit.x <= l as i128;
                    let mode = if hit.constructive { "window" } else { "scan" };
                    (
                        json!({
                            "found": true,
                            "root": hit.z,
                            "x": hit.x,
                            "value": p * hit.z * hit.z,
                            "mode": mode,
                        }),
                        vec![Certificate {
                            name: "hit-in-value-set",
                            verified,
                        }],
                        vec![
                            "true".into(),
                            hit.z.to_string(),
                            hit.x.to_string(),
                            String::new(),
                            mode.into(),
                        ],
                    )
                }
                Ok(None) => (
                    json!({ "found": false }),
                    Vec::new(),
                    vec!["false".into(), String::new(), String::new(), String::new(), String::new()],
                ),
                Err(Error::NoResidueRoot) => (
                    json!({ "found": false, "reason": "no residue root" }),
                    Vec::new(),
                    vec!["false".into(), String::new(), String::new(), String::new(), String::new()],
                ),
                Err(e) => return Err(e),
            };
            let mut row = vec![
                "1".to_string(),
                r.to_string(),
                q.to_string(),
                p.to_string(),
                l.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ];
            row.extend(row_tail);
            Ok(Run::new(
                serde_json::to_value(&inst).expect("instance serializes"),
                result,
                certificates,
            )
            .with_csv(GAP_SCHEMA, vec![row]))
        }
        (None, Some(q1), Some(q2), Some(l1), Some(l2)) => {
            let inst = Gap2SquareInstance::new(r, q, q1, q2, l1, l2, p)?;
            let (result, certificates, row_tail) = match find_pz2_in_gap2(&inst) {
                Ok(Some(hit)) => {
                    let verified = p * hit.w * hit.w == r + q * (q1 * hit.x1 + q2 * hit.x2)
                        && (0..=l1 as i128).contains(&hit.x1)
                        && (0..=l2 as i128).contains(&hit.x2);
                    let mode = match hit.window {
                        sqsum::gap_squares::Window::Iz => "iz",
                        sqsum::gap_squares::Window::Full => "full",
                    };
                    (
                        json!({
                            "found": true,
                            "root": hit.w,
                            "x1": hit.x1,
                            "x2": hit.x2,
                            "value": p * hit.w * hit.w,
                            "mode": mode,
                        }),
                        vec![Certificate {
                            name: "hit-in-value-set",
                            verified,
                        }],
                        vec![
                            "true".into(),
                            hit.w.to_string(),
                            hit.x1.to_string(),
                            hit.x2.to_string(),
                            mode.into(),
                        ],
                    )
                }
                Ok(None) => (
                    json!({ "found": false }),
                    Vec::new(),
                    vec!["false".into(), String::new(), String::new(), String::new(), String::new()],
                ),
                Err(Error::NoResidueRoot) => (
                    json!({ "found": false, "reason": "no residue root" }),
                    Vec::new(),
                    vec!["false".into(), String::new(), String::new(), String::new(), String::new()],
                ),
                Err(e) => return Err(e),
            };
            let mut row = vec![
                "2".to_string(),
                r.to_string(),
                q.to_string(),
                p.to_string(),
                String::new(),
                q1.to_string(),
                q2.to_string(),
                l1.to_string(),
                l2.to_string(),
            ];
            row.extend(row_tail);
            Ok(Run::new(
                serde_json::to_value(&inst).expect("instance serializes"),
                result,
                certificates,
            )
            .with_csv(GAP_SCHEMA, vec![row]))
        }
        _ => Err(Error::InvalidInput(
            "pass --L for rank 1, or all of --q1 --q2 --L1 --L2 for rank 2".into(),
        )),
    }
}

const CONGRUENCE_SCHEMA: &str = "q,p,r,a,found,x,z,bound";

fn run_congruence(cfg: &SolverConfig, a: Vec<i128>, r: i128, p: i128, q: i128) -> Result<Run> {
    let inst = CongruenceInstance::new(a, r, p, q)?;
    let instance = serde_json::to_value(&inst).expect("instance serializes");
    let base_row = vec![
        q.to_string(),
        p.to_string(),
        r.to_string(),
        join(&inst.a),
    ];
    match solve_quadratic_congruence(&inst, cfg.exp_d) {
        Ok(sol) => {
            let verified = inst.check(&sol.x, sol.z, sol.bound_used);
            let mut row = base_row;
            row.extend([
                "true".to_string(),
                join(&sol.x),
                sol.z.to_string(),
                sol.bound_used.to_string(),
            ]);
            Ok(Run::new(
                instance,
                json!({
                    "found": true,
                    "x": sol.x,
                    "z": sol.z,
                    "bound": sol.bound_used,
                }),
                vec![Certificate {
                    name: "congruence-identity",
                    verified,
                }],
            )
            .with_csv(CONGRUENCE_SCHEMA, vec![row]))
        }
        Err(Error::NoSolutionInBound { bound, .. }) => {
            let mut row = base_row;
            row.extend(["false".to_string(), String::new(), String::new(), bound.to_string()]);
            Ok(Run::new(
                instance,
                json!({ "found": false, "bound": bound }),
                Vec::new(),
            )
            .with_csv(CONGRUENCE_SCHEMA, vec![row]))
        }
        Err(e) => Err(e),
    }
}

const WEYL_SCHEMA: &str = "a,q,theta,I,N,M,sum,oracle,ratio";
/// Work cap for the extended-precision pass; above it the report is
/// flagged inexact instead.
const WEYL_ORACLE_CAP: u64 = 200_000;

#[allow(clippy::too_many_arguments)]
fn run_weyl(
    cfg: &SolverConfig,
    a: i64,
    q: u64,
    theta: f64,
    i_start: i64,
    n: u64,
    m: u64,
    ratio: bool,
    alpha: f64,
) -> Result<Run> {
    let inst = WeylInstance::new(a, q, theta, i_start, n, m)?;
    let sum = weyl_sum(&inst)?;
    let mut result = json!({ "sum": sum });
    let mut certificates = Vec::new();
    let mut oracle_cell = String::new();
    if n.saturating_mul(m) <= WEYL_ORACLE_CAP {
        let oracle = weyl_sum_oracle(&inst)?;
        result["oracle"] = json!(oracle);
        certificates.push(Certificate {
            name: "oracle-agreement",
            verified: (sum - oracle).abs() <= cfg.tol * oracle.max(1.0),
        });
        oracle_cell = format!("{oracle:.12e}");
    } else {
        result["inexact"] = json!(true);
    }
    let mut ratio_cell = String::new();
    if ratio {
        let rv = weyl_bound_ratio(&inst, alpha)?;
        result["ratio"] = json!(rv);
        result["alpha"] = json!(alpha);
        ratio_cell = format!("{rv:.6e}");
    }
    let row = vec![
        a.to_string(),
        q.to_string(),
        theta.to_string(),
        i_start.to_string(),
        n.to_string(),
        m.to_string(),
        format!("{sum:.12e}"),
        oracle_cell,
        ratio_cell,
    ];
    Ok(Run::new(
        serde_json::to_value(inst).expect("instance serializes"),
        result,
        certificates,
    )
    .with_csv(WEYL_SCHEMA, vec![row]))
}

const BUMP_SCHEMA: &str = "m,n,delta,mass,lambda,transform,envelope";

fn run_bump(m: f64, n: f64, delta: f64, lambda: Option<f64>) -> Result<Run> {
    let f = bump_build(BumpSpec { m, n, delta })?;
    let mass = f.fourier_zero();
    let (lo, hi) = f.support();
    let mut result = json!({ "mass": mass, "support": [lo, hi] });
    let mut certificates = vec![Certificate {
        name: "mass-closed-form",
        verified: (mass - (1.0 - delta) * n).abs() <= 1e-12 * n,
    }];
    let (mut lambda_cell, mut transform_cell, mut envelope_cell) =
        (String::new(), String::new(), String::new());
    if let Some(lambda) = lambda {
        let measured = f.fourier(lambda).norm();
        let envelope = 16.0 * mass * (-(delta / 2.0) * (lambda * n).abs().sqrt()).exp();
        result["lambda"] = json!(lambda);
        result["transform"] = json!(measured);
        result["envelope"] = json!(envelope);
        certificates.push(Certificate {
            name: "decay-envelope",
            verified: measured <= envelope,
        });
        lambda_cell = lambda.to_string();
        transform_cell = format!("{measured:.12e}");
        envelope_cell = format!("{envelope:.12e}");
    }
    let row = vec![
        m.to_string(),
        n.to_string(),
        delta.to_string(),
        format!("{mass:.12}"),
        lambda_cell,
        transform_cell,
        envelope_cell,
    ];
    Ok(Run::new(
        json!({ "m": m, "n": n, "delta": delta }),
        result,
        certificates,
    )
    .with_csv(BUMP_SCHEMA, vec![row]))
}

const DIVISOR_SCHEMA: &str = "n,k,d,ok";

fn run_divisor(n: u64, k: u32) -> Result<Run> {
    let d = divisor_witness(n, k)?;
    let kf = k as f64;
    let ok = n.is_multiple_of(d)
        && (d as u128).pow(k) <= n as u128
        && (kf + 1.0).powf(kf) * (tau(d) as f64).powf(kf * (kf + 1.0).ln()) >= tau(n) as f64;
    let row = vec![n.to_string(), k.to_string(), d.to_string(), ok.to_string()];
    Ok(Run::new(
        json!({ "n": n, "k": k }),
        json!({ "d": d, "ok": ok }),
        vec![Certificate {
            name: "witness-bounds",
            verified: ok,
        }],
    )
    .with_csv(DIVISOR_SCHEMA, vec![row]))
}

const POISSON_SCHEMA: &str = "m,n,delta,T,t,lhs,rhs,diff,ok";

fn run_poisson(
    cfg: &SolverConfig,
    m: f64,
    n: f64,
    delta: f64,
    t_period: f64,
    t_shift: f64,
) -> Result<Run> {
    let f = bump_build(BumpSpec { m, n, delta })?;
    let (lhs, rhs, diff) = poisson_check(&f, t_period, t_shift)?;
    let ok = diff <= cfg.tol * f.fourier_zero();
    let row = vec![
        m.to_string(),
        n.to_string(),
        delta.to_string(),
        t_period.to_string(),
        t_shift.to_string(),
        format!("{lhs:.12e}"),
        format!("{rhs:.12e}"),
        format!("{diff:.3e}"),
        ok.to_string(),
    ];
    Ok(Run::new(
        json!({ "m": m, "n": n, "delta": delta, "T": t_period, "t": t_shift }),
        json!({ "lhs": lhs, "rhs": rhs, "diff": diff }),
        vec![Certificate {
            name: "periodization-identity",
            verified: ok,
        }],
    )
    .with_csv(POISSON_SCHEMA, vec![row]))
}

fn run_structure(
    cfg: &SolverConfig,
    elements: Option<Vec<u64>>,
    interval: Option<u64>,
    p: u64,
    trace: bool,
    iterate: bool,
) -> Result<Run> {
    let set = match (elements, interval) {
        (Some(elems), None) => {
            let max = elems.iter().copied().max().unwrap_or(0);
            IntegerSet::new(elems, max)?
        }
        (None, Some(n)) => IntegerSet::interval(n),
        _ => return Err(Error::InvalidInput("pass exactly one of --elements, --interval".into())),
    };
    let instance = json!({ "elements": set.elements(), "p": p });
    if iterate {
        let (steps, final_set, final_p) = iterate_dichotomy(&set, p, cfg)?;
        let verified = reverify_steps(&set, p, cfg, &steps)?;
        let mut run = Run::new(
            instance,
            json!({
                "steps": steps,
                "final_elements": final_set.elements(),
                "final_p": final_p,
            }),
            vec![Certificate {
                name: "steps-reverified",
                verified,
            }],
        );
        if trace {
            run.pre_lines = merge_trace_lines(&steps, cfg)?;
        }
        return Ok(run);
    }
    let outcome = dichotomy(&set, p, cfg)?;
    let verified = verify_dichotomy(&set, p, cfg, &outcome).is_ok();
    let branch = match &outcome.branch {
        DichotomyBranch::Divisor { .. } => "divisor",
        DichotomyBranch::Progression { .. } => "progression",
        DichotomyBranch::Inconclusive { .. } => "inconclusive",
    };
    let mut run = Run::new(
        instance,
        json!({
            "branch": branch,
            "outcome": serde_json::to_value(&outcome).expect("outcome serializes"),
        }),
        vec![Certificate {
            name: "dichotomy-reverified",
            verified,
        }],
    );
    if trace {
        if let Some(line) = merge_trace_line(&outcome.prefix, cfg)? {
            run.pre_lines.push(line);
        }
    }
    Ok(run)
}

/// Replay every step's verification on the set it actually ran against,
/// taking each step's recorded multiplier at face value except the first.
fn reverify_steps(
    a: &IntegerSet,
    p: u64,
    cfg: &SolverConfig,
    steps: &[DichotomyStep],
) -> Result<bool> {
    if steps.first().is_some_and(|s| s.p != p.max(1)) {
        return Ok(false);
    }
    let mut cur = a.clone();
    for step in steps {
        if verify_dichotomy(&cur, step.p, cfg, &step.outcome).is_err() {
            return Ok(false);
        }
        match &step.outcome.branch {
            DichotomyBranch::Divisor { d } => {
                let reduced: Vec<u64> =
                    step.outcome.rest.elements().iter().map(|&e| e / d).collect();
                let max = reduced.iter().copied().max().unwrap_or(0);
                cur = IntegerSet::new(reduced, max)?;
            }
            _ => return Ok(true),
        }
    }
    Ok(true)
}

/// Merge trace for a prefix, as one compact JSON line; none when the block
/// pipeline declined the input.
fn merge_trace_line(prefix: &IntegerSet, cfg: &SolverConfig) -> Result<Option<String>> {
    let (blocks, flagged) = greedy_disjoint_blocks(prefix, cfg)?;
    if flagged || blocks.len() < 4 {
        return Ok(None);
    }
    let (trace, _) = merge_algorithm(&blocks, &[], cfg)?;
    Ok(Some(
        serde_json::to_string(&trace).expect("trace serializes"),
    ))
}

fn merge_trace_lines(steps: &[DichotomyStep], cfg: &SolverConfig) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for step in steps {
        if let Some(line) = merge_trace_line(&step.outcome.prefix, cfg)? {
            lines.push(line);
        }
    }
    Ok(lines)
}

/// Batch mode: one JSON instance per stdin line, one compact report line per
/// instance, input order preserved.
fn run_batch(cli: &Cli, cfg: &SolverConfig) -> Result<ExitCode> {
    let name = subcommand_name(&cli.cmd);
    let runner: fn(&SolverConfig, &Value) -> Result<Run> = match cli.cmd {
        Cmd::Sf { .. } => batch_sf,
        Cmd::Divisor { .. } => batch_divisor,
        Cmd::Congruence { .. } => batch_congruence,
        Cmd::SquareInGap { .. } => batch_square_in_gap,
        Cmd::Weyl { .. } => batch_weyl,
        _ => {
            return Err(Error::InvalidInput(format!(
                "subcommand {name} does not support --batch"
            )))
        }
    };
    let lines: Vec<String> = io::stdin()
        .lock()
        .lines()
        .collect::<io::Result<_>>()
        .map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?;
    let process = |line: &String| -> Result<(Run, Option<u128>)> {
        let value: Value = serde_json::from_str(line)
            .map_err(|e| Error::InvalidInput(format!("batch line: {e}")))?;
        let started = Instant::now();
        let run = runner(cfg, &value)?;
        Ok((run, cli.timing.then(|| started.elapsed().as_millis())))
    };
    let runs: Vec<(Run, Option<u128>)> = if cli.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        use rayon::prelude::*;
        pool.install(|| lines.par_iter().map(process).collect::<Result<_>>())?
    } else {
        lines.iter().map(process).collect::<Result<_>>()?
    };
    let mut worst = ExitCode::SUCCESS;
    for (i, (run, ms)) in runs.into_iter().enumerate() {
        let code = print_run(cli, cfg, name, run, ms, i == 0)?;
        if code != ExitCode::SUCCESS {
            worst = code;
        }
    }
    Ok(worst)
}

fn field<T: serde::de::DeserializeOwned>(value: &Value, key: &str) -> Result<T> {
    let v = value
        .get(key)
        .ok_or_else(|| Error::InvalidInput(format!("batch line missing \"{key}\"")))?;
    serde_json::from_value(v.clone())
        .map_err(|e| Error::InvalidInput(format!("batch field \"{key}\": {e}")))
}

fn batch_sf(cfg: &SolverConfig, value: &Value) -> Result<Run> {
    run_sf(cfg, field(value, "n")?)
}

fn batch_divisor(_cfg: &SolverConfig, value: &Value) -> Result<Run> {
    run_divisor(field(value, "n")?, field(value, "k")?)
}

fn batch_congruence(cfg: &SolverConfig, value: &Value) -> Result<Run> {
    run_congruence(
        cfg,
        field(value, "a")?,
        field(value, "r")?,
        field(value, "p")?,
        field(value, "q")?,
    )
}

fn batch_square_in_gap(_cfg: &SolverConfig, value: &Value) -> Result<Run> {
    if value.get("q1").is_some() {
        run_square_in_gap(
            field(value, "r")?,
            field(value, "q")?,
            field(value, "p")?,
            None,
            Some(field(value, "q1")?),
            Some(field(value, "q2")?),
            Some(field(value, "L1")?),
            Some(field(value, "L2")?),
        )
    } else {
        run_square_in_gap(
            field(value, "r")?,
            field(value, "q")?,
            field(value, "p")?,
            Some(field(value, "L")?),
            None,
            None,
            None,
            None,
        )
    }
}

fn batch_weyl(cfg: &SolverConfig, value: &Value) -> Result<Run> {
    run_weyl(
        cfg,
        field(value, "a")?,
        field(value, "q")?,
        field(value, "theta")?,
        field(value, "I")?,
        field(value, "N")?,
        field(value, "M")?,
        false,
        6.0,
    )
}
