use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use unitdist::cayley_menger::{
    affinely_dependent, cm_determinant, verify_lemma1_samples, verify_lemma5_samples,
    SquaredDistanceSpec,
};
use unitdist::density::{approach_sequence, approx_distance, Target};
use unitdist::embed::{embed, kite_skeleton, render_svg, subset_echo, Embedding};
use unitdist::endo_field::{counterexample_report, grid20, sweep_pairs, QuadJson, QuadPoint};
use unitdist::rational::{format_rational, parse_rational, Rational};
use unitdist::suite;
use unitdist::witness::{
    build_witness, derive_membership, k_of_n, rho_sq, validate_derivation, witness_counts,
    WitnessGraph, WitnessJson,
};

#[derive(Parser)]
#[command(
    name = "unitdist",
    version,
    about = "Certified unit-distance witnesses and their checks"
)]
struct Cli {
    /// Seed for every random choice (sample points, embedding gauge).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact Cayley-Menger determinant of a squared-distance spec, or the
    /// certificate checks of a witness file.
    Cm {
        #[arg(long)]
        input: PathBuf,
        /// Also decide affine dependence of the m = dim + 1 points.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Seeded exact checks of a closed-form determinant identity.
    VerifyIdentity {
        #[arg(long, value_parser = ["1", "5"])]
        lemma: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long)]
        json: bool,
    },
    /// Derives a family member and builds its witness graph.
    Witness {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        l: usize,
        /// Print `vertices=V edges=E` only.
        #[arg(long)]
        stats: bool,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Finds (k, l) whose certified distance is within `tol` of the target.
    Approx {
        #[arg(long)]
        dim: usize,
        /// `p/q`, a decimal, or `sqrt(...)` of either.
        #[arg(long)]
        target: String,
        #[arg(long)]
        tol: String,
        #[arg(long, default_value_t = 10_000)]
        kmax: usize,
        #[arg(long)]
        json: bool,
    },
    /// Certified distances approaching the target.
    Approach {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        target: String,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        json: bool,
    },
    /// Prints k(n) and rho(n)^2.
    Kofn {
        #[arg(long)]
        n: usize,
    },
    /// Embeds a witness file and reports residuals.
    Embed {
        #[arg(long, required_unless_present = "kite_skeleton")]
        input: Option<PathBuf>,
        /// Embed the seven-point planar skeleton instead of a witness.
        #[arg(long, conflicts_with = "input")]
        kite_skeleton: bool,
        /// Squared scale of the skeleton.
        #[arg(long, default_value = "1")]
        d2: String,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, value_parser = ["json", "text"], default_value = "text")]
        report: String,
        /// Write vertex coordinates as JSON.
        #[arg(long)]
        coords: Option<PathBuf>,
    },
    /// Conjugation in Q(sqrt p) on a point set.
    Counterexample {
        #[arg(long)]
        p: i64,
        /// JSON array of points, each an array of {"a": "p/q", "b": "r/s"}.
        /// Without it, the built-in 20-point grid is used.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Runs every acceptance criterion.
    VerifyAll {
        /// Write `{"suite": [...], "pass": bool}` here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Check(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn check(ok: bool, what: impl Into<String>) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(what.into()))
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn target_arg(s: &str) -> anyhow::Result<Target> {
    s.parse().map_err(|e| anyhow!("--{e}"))
}

fn rational_arg(flag: &str, s: &str) -> anyhow::Result<Rational> {
    parse_rational(s).map_err(|e| anyhow!("{flag}: {e}"))
}

fn cmd_cm(input: &Path, dim: Option<usize>, json: bool) -> Outcome {
    let value: serde_json::Value = read_json(input)?;
    if value.get("derivation").is_some() {
        let w: WitnessJson = read_json(input)?;
        let g = WitnessGraph::from_json(w).map_err(|e| anyhow!("{}: {e}", input.display()))?;
        let checks = validate_derivation(&g.derivation);
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        let mut subsets = 0;
        let mut nonzero = 0;
        for id in g.derivation.reachable() {
            for (_, det) in unitdist::embed::certified_subset_determinants(&g.derivation, id) {
                subsets += 1;
                nonzero += usize::from(det != Rational::from_integer(0.into()));
            }
        }
        if json {
            #[derive(Serialize)]
            struct Out<'a> {
                target_sq: String,
                checks: usize,
                failed: Vec<&'a unitdist::witness::CheckResult>,
                certified_subsets: usize,
                nonzero_determinants: usize,
            }
            print!(
                "{}",
                to_json(&Out {
                    target_sq: format_rational(&g.target_sq),
                    checks: checks.len(),
                    failed: failed.clone(),
                    certified_subsets: subsets,
                    nonzero_determinants: nonzero,
                })
            );
        } else {
            println!(
                "target_sq={} checks={} failed={} certified_subsets={} nonzero_determinants={}",
                format_rational(&g.target_sq),
                checks.len(),
                failed.len(),
                subsets,
                nonzero
            );
            for f in &failed {
                println!(
                    "FAIL node {} {}: {} ({})",
                    f.node, f.rule, f.check, f.detail
                );
            }
        }
        return check(
            failed.is_empty() && nonzero == 0,
            "witness certificate checks failed",
        );
    }
    let spec: SquaredDistanceSpec = read_json(input)?;
    let det = cm_determinant(&spec);
    let dependent = match dim {
        Some(d) => Some(affinely_dependent(&spec, d).map_err(|e| anyhow!("--dim: {e}"))?),
        None => None,
    };
    if json {
        #[derive(Serialize)]
        struct Out {
            m: usize,
            determinant: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            affinely_dependent: Option<bool>,
        }
        print!(
            "{}",
            to_json(&Out {
                m: spec.point_count(),
                determinant: format_rational(&det),
                affinely_dependent: dependent,
            })
        );
    } else {
        print!("m={} det={}", spec.point_count(), format_rational(&det));
        if let Some(d) = dependent {
            print!(" affinely_dependent={d}");
        }
        println!();
    }
    Ok(())
}

fn cmd_verify_identity(lemma: &str, n: usize, samples: usize, seed: u64, json: bool) -> Outcome {
    let out = match lemma {
        "1" => {
            if n < 2 {
                return Err(anyhow!("--n: must be at least 2, got {n}").into());
            }
            verify_lemma1_samples(n, samples, seed)
        }
        _ => {
            if n != 2 {
                return Err(anyhow!("--n: the planar identity needs n = 2, got {n}").into());
            }
            verify_lemma5_samples(samples, seed)
        }
    };
    let passed = out.iter().filter(|o| o.pass).count();
    if json {
        #[derive(Serialize)]
        struct Out<'a> {
            passed: usize,
            samples: usize,
            results: &'a [unitdist::cayley_menger::SampleOutcome],
        }
        print!(
            "{}",
            to_json(&Out {
                passed,
                samples: out.len(),
                results: &out,
            })
        );
    } else {
        println!("{passed}/{} pass", out.len());
        for o in out.iter().filter(|o| !o.pass) {
            println!(
                "FAIL sample {}: det={} closed_form={}",
                o.index,
                format_rational(&o.determinant.0),
                format_rational(&o.closed_form.0)
            );
        }
    }
    check(passed == out.len(), "identity mismatch")
}

fn cmd_witness(
    dim: usize,
    k: usize,
    l: usize,
    stats: bool,
    emit: Option<Emit>,
    output: Option<&Path>,
) -> Outcome {
    let der = derive_membership(dim, k, l).map_err(|e| anyhow!("--dim/--k/--l: {e}"))?;
    if stats {
        let c = witness_counts(&der);
        println!("vertices={} edges={}", c.vertices, c.edges);
        if emit.is_none() {
            return Ok(());
        }
    }
    let g = build_witness(&der).map_err(|e| anyhow!("{e}"))?;
    match emit {
        Some(Emit::Json) => write_out(output, &to_json(&g.to_json()))?,
        Some(Emit::Dot) => write_out(output, &g.to_dot())?,
        None => {
            let s = unitdist::witness::witness_stats(&g);
            println!(
                "target_sq={} vertices={} edges={} depth={}",
                format_rational(&g.target_sq),
                s.vertex_count,
                s.edge_count,
                s.derivation_depth
            );
        }
    }
    Ok(())
}

fn cmd_approx(dim: usize, target: &str, tol: &str, kmax: usize, json: bool) -> Outcome {
    let t = target_arg(target)?;
    let tol = rational_arg("--tol", tol)?;
    match approx_distance(dim, &t, &tol, kmax) {
        Ok(a) => {
            if json {
                print!("{}", to_json(&a));
            } else {
                println!(
                    "k={} l={} achieved={:.15} achieved_sq={} rel_error={:e}",
                    a.k,
                    a.l,
                    a.achieved,
                    format_rational(&a.achieved_sq),
                    a.rel_error
                );
            }
            Ok(())
        }
        Err(unitdist::density::DensityError::NotFound { k_max, tol }) => Err(Failure::Check(
            format!("no (k, l) with k, l <= {k_max} within relative error {tol}"),
        )),
        Err(e) => Err(anyhow!("{e}").into()),
    }
}

fn cmd_approach(dim: usize, target: &str, count: usize, json: bool) -> Outcome {
    let t = target_arg(target)?;
    let seq = approach_sequence(dim, &t, count).map_err(|e| anyhow!("{e}"))?;
    if json {
        print!("{}", to_json(&seq));
    } else {
        for a in &seq {
            println!(
                "k={} l={} value={:.15} value_sq={}",
                a.k,
                a.l,
                a.value,
                format_rational(&a.value_sq)
            );
        }
    }
    Ok(())
}

fn cmd_kofn(n: usize) -> Outcome {
    if n < 3 {
        return Err(anyhow!("--n: k(n) is defined for n >= 3, got {n}").into());
    }
    println!(
        "k({n})={} rho_sq={}",
        k_of_n(n),
        format_rational(&rho_sq(n))
    );
    Ok(())
}

#[derive(Serialize)]
struct CoordsJson<'a> {
    dim: usize,
    vertices: Vec<(&'a str, &'a [f64])>,
}

fn cmd_embed(
    input: Option<&Path>,
    skeleton: bool,
    d2: &str,
    svg: Option<&Path>,
    report: &str,
    coords: Option<&Path>,
    seed: u64,
) -> Outcome {
    let (emb, echo): (Embedding, _) = if skeleton {
        let d2 = rational_arg("--d2", d2)?;
        if d2 <= Rational::from_integer(0.into()) {
            return Err(anyhow!("--d2: must be positive").into());
        }
        (kite_skeleton(&d2), None)
    } else {
        let path = input.expect("clap requires --input");
        let w: WitnessJson = read_json(path)?;
        let g = WitnessGraph::from_json(w).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let e = embed(&g, seed).map_err(|e| anyhow!("{e}"))?;
        let echo = subset_echo(&g, &e, 20, seed);
        (e, Some(echo))
    };
    if let Some(p) = svg {
        let doc = render_svg(&emb).map_err(|e| anyhow!("--svg: {e}"))?;
        fs::write(p, doc).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = coords {
        let out = CoordsJson {
            dim: emb.dim,
            vertices: emb
                .ids
                .iter()
                .map(String::as_str)
                .zip(emb.coords.iter().map(Vec::as_slice))
                .collect(),
        };
        fs::write(p, to_json(&out)).with_context(|| format!("writing {}", p.display()))?;
    }
    let r = emb.report();
    if report == "json" {
        print!("{}", to_json(&r));
    } else {
        println!(
            "vertices={} max_residual={:e} target_residual={:e} coincidences={}",
            emb.coords.len(),
            r.max_residual,
            r.target_residual,
            r.coincidence_warnings.len()
        );
        if let Some(echo) = &echo {
            println!(
                "certified_subsets={} nonzero={} max_float_det={:e}",
                echo.exact_subsets, echo.exact_nonzero, echo.max_float_abs_det
            );
        }
    }
    let echo_ok = echo.is_none_or(|e| e.holds(1e-6));
    check(
        r.max_residual <= 1e-9 && r.target_residual <= 1e-9 && echo_ok,
        "embedding residuals above 1e-9",
    )
}

fn cmd_counterexample(p: i64, points: Option<&Path>, json: bool) -> Outcome {
    let pts: Vec<QuadPoint> = match points {
        Some(path) => {
            let raw: Vec<Vec<QuadJson>> = read_json(path)?;
            raw.iter()
                .enumerate()
                .map(|(i, c)| {
                    QuadPoint::from_json(p, c)
                        .map_err(|e| anyhow!("{}: points[{i}]: {e}", path.display()))
                })
                .collect::<anyhow::Result<_>>()?
        }
        None => grid20(p).map_err(|e| anyhow!("--p: {e}"))?,
    };
    if let Some(first) = pts.first() {
        if let Some((i, q)) = pts.iter().enumerate().find(|(_, q)| q.dim() != first.dim()) {
            return Err(anyhow!(
                "points[{i}]: dimension {} differs from points[0] ({})",
                q.dim(),
                first.dim()
            )
            .into());
        }
    }
    #[derive(Serialize)]
    struct PairReport {
        i: usize,
        j: usize,
        #[serde(flatten)]
        report: unitdist::endo_field::CounterexampleReport,
    }
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let report = counterexample_report(&pts[i], &pts[j])
                .map_err(|e| anyhow!("points[{i}], points[{j}]: {e}"))?;
            pairs.push(PairReport { i, j, report });
        }
    }
    let summary = sweep_pairs(&pts).map_err(|e| anyhow!("{e}"))?;
    let dichotomy = pairs.iter().all(|p| p.report.dichotomy_holds());
    if json {
        #[derive(Serialize)]
        struct Out<'a> {
            p: i64,
            pairs: &'a [PairReport],
            summary: &'a unitdist::endo_field::SweepSummary,
            rational_distances_preserved: bool,
        }
        print!(
            "{}",
            to_json(&Out {
                p,
                pairs: &pairs,
                summary: &summary,
                rational_distances_preserved: summary.all_rational_preserved(),
            })
        );
    } else {
        for pr in &pairs {
            println!(
                "{} {}: phi {} -> {} preserved={}",
                pts[pr.i],
                pts[pr.j],
                pr.report.phi_before,
                pr.report.phi_after,
                pr.report.preserved
            );
        }
        println!(
            "pairs={} rational={} rational_preserved={} irrational_moved={}",
            summary.pairs,
            summary.rational_pairs,
            summary.rational_preserved,
            summary.irrational_moved
        );
    }
    check(
        dichotomy && summary.all_rational_preserved(),
        "a rational squared distance was moved",
    )
}

fn cmd_verify_all(seed: u64, output: Option<&Path>) -> Outcome {
    let s = suite::summary(seed);
    for c in &s.suite {
        println!("{}", c.line());
    }
    println!(
        "{}",
        if s.pass {
            "all criteria pass"
        } else {
            "some criteria fail"
        }
    );
    if let Some(p) = output {
        fs::write(p, to_json(&s)).with_context(|| format!("writing {}", p.display()))?;
    }
    check(s.pass, "acceptance suite failed")
}

fn configure_threads(jobs: usize) -> anyhow::Result<()> {
    if jobs == 0 {
        return Err(anyhow!("--jobs: must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| anyhow!("--jobs: {e}"))?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads(cli.jobs)?;
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Cm { input, dim, json } => cmd_cm(&input, dim, json),
        Cmd::VerifyIdentity {
            lemma,
            n,
            samples,
            json,
        } => cmd_verify_identity(&lemma, n, samples, seed, json),
        Cmd::Witness {
            dim,
            k,
            l,
            stats,
            emit,
            output,
        } => cmd_witness(dim, k, l, stats, emit, output.as_deref()),
        Cmd::Approx {
            dim,
            target,
            tol,
            kmax,
            json,
        } => cmd_approx(dim, &target, &tol, kmax, json),
        Cmd::Approach {
            dim,
            target,
            count,
            json,
        } => cmd_approach(dim, &target, count, json),
        Cmd::Kofn { n } => cmd_kofn(n),
        Cmd::Embed {
            input,
            kite_skeleton,
            d2,
            svg,
            report,
            coords,
        } => cmd_embed(
            input.as_deref(),
            kite_skeleton,
            &d2,
            svg.as_deref(),
            &report,
            coords.as_deref(),
            seed,
        ),
        Cmd::Counterexample { p, points, json } => cmd_counterexample(p, points.as_deref(), json),
        Cmd::VerifyAll { output } => cmd_verify_all(seed, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
