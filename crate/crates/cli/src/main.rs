use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hoq_core::causality::{causal_order_survey_exec, is_final_output, SurveyReport};
use hoq_core::choi::ChoiMatrix;
use hoq_core::dsl::{parse_and_eval, Built};
use hoq_core::export::{write_image_basis, ExportFile, SetFile, TransformBundle};
use hoq_core::format::fmt_num;
use hoq_core::objects::{dual_set, Characterization, ObjectSet, ValidationReport};
use hoq_core::par::Exec;
use hoq_core::projmap::{dense_budget, set_dense_budget};
use hoq_core::rational::q_fmt;
use hoq_core::sampling::{random_affine_point, random_member, rng_from_seed};
use hoq_core::transforms::{check_map_version, Route, TransformSpec};
use hoq_core::{Error, Label, Operator};

mod report;

use report::{count, print_json, projector_json, projector_line, roles_line, terms_line};

#[derive(Parser)]
#[command(name = "hoq", version, about = "Projector characterizations of higher-order quantum maps")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct Opts {
    /// Membership tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Largest total dimension materialized as a dense supermatrix.
    #[arg(long, global = true)]
    dense_budget: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Use the thread pool for batch work.
    #[arg(long, global = true)]
    parallel: bool,
}

impl Opts {
    fn exec(&self) -> Exec {
        if self.parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a set or transformation and print its projector and trace value.
    Build { expr: String },
    /// Check an operator file for membership.
    Validate { matrix: PathBuf, expr: String },
    /// Search for a final output among the output labels.
    Causality {
        expr: String,
        /// Only test this output label.
        #[arg(long)]
        candidate: Option<String>,
        /// Comma-separated partner inputs (defaults to all inputs).
        #[arg(long, value_delimiter = ',')]
        partners: Option<Vec<String>>,
    },
    /// Draw random members.
    Sample {
        expr: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Directory for `member_NNN.json`; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a JSON bundle, and optionally an image basis, for external solvers.
    Export {
        expr: String,
        #[arg(long)]
        out: PathBuf,
        /// Directory for orthonormal image-basis operators.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Build the dual affine set.
    Dual { expr: String },
    /// Check the map-level conditions for a Choi matrix against a transformation.
    CheckMap {
        matrix: PathBuf,
        expr: String,
        /// Random inputs used when the input space is too large for a full basis.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } => Failure::Usage(e.to_string()),
            Error::Io(_) | Error::Json(_) => Failure::Io(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

type CmdResult = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(b) = cli.opts.dense_budget {
        set_dense_budget(b);
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (2, m),
                Failure::Io(m) => (3, m),
                Failure::Other(m) => (4, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    let o = cli.opts;
    match &cli.cmd {
        Cmd::Build { expr } => build(&parse_and_eval(expr)?, o),
        Cmd::Validate { matrix, expr } => validate(matrix, &parse_and_eval(expr)?, o),
        Cmd::Causality { expr, candidate, partners } => {
            causality(&parse_and_eval(expr)?, candidate.as_deref(), partners.as_deref(), o)
        }
        Cmd::Sample { expr, count, out } => sample(&parse_and_eval(expr)?, *count, out.as_ref(), o),
        Cmd::Export { expr, out, basis } => export(&parse_and_eval(expr)?, out, basis.as_ref(), o),
        Cmd::Dual { expr } => {
            let set = object_of(&parse_and_eval(expr)?)?;
            build(&Built::Set(dual_set(&set)?), o)
        }
        Cmd::CheckMap { matrix, expr, samples } => check_map(matrix, &parse_and_eval(expr)?, *samples, o),
    }
}

fn object_of(b: &Built) -> Result<ObjectSet, Failure> {
    b.characterization().clone().into_object().map_err(Failure::from)
}

fn route_name(r: Route) -> &'static str {
    match r {
        Route::Specialised => "specialised",
        Route::General => "general",
        Route::Traceless => "traceless",
    }
}

fn kind(c: &Characterization) -> &'static str {
    match c {
        Characterization::Object(_) => "object",
        Characterization::Affine(_) => "affine",
        Characterization::Linear(_) => "linear",
    }
}

fn build(b: &Built, o: Opts) -> CmdResult {
    let c = b.characterization();
    let t = b.transform();
    if o.json {
        let mut v = json!({
            "name": c.name(),
            "kind": kind(c),
            "labels": c.space().subsystems().iter().map(|(l, d)| json!([l, d])).collect::<Vec<_>>(),
            "roles": c.roles(),
            "projector": projector_json(c.projector(), o.tol)?,
        });
        if let Characterization::Object(s) = c {
            let g = s.gamma_value()?;
            v["gamma"] = json!({ "symbolic": s.gamma.to_string(), "value": q_fmt(&g) });
        }
        if let Some(t) = t {
            v["route"] = json!(route_name(t.route));
            v["rescale"] = json!(t.rescale.to_string());
            v["warnings"] = json!(t.warnings);
        }
        print_json(&v);
        return Ok(true);
    }
    println!("set: {}", c.name());
    println!("kind: {}", kind(c));
    println!("labels: {}", c.space());
    println!("{}", roles_line(c.roles()));
    if let Some(t) = t {
        println!("route: {}", route_name(t.route));
    }
    println!("{}", projector_line(c.projector(), o.tol)?);
    match c {
        Characterization::Object(s) => {
            let g = s.gamma_value()?;
            println!("gamma: {} = {}", s.gamma, q_fmt(&g));
        }
        Characterization::Affine(a) => {
            let traced: Vec<&str> = a.equation.traced.iter().map(|l| l.as_str()).collect();
            println!(
                "trace condition: operator equation after tracing out {{{}}}{}",
                traced.join(", "),
                if a.equation.transpose { " and transposing" } else { "" }
            );
        }
        Characterization::Linear(_) => println!("trace condition: none"),
    }
    for w in t.map(|t| t.warnings.as_slice()).unwrap_or(&[]) {
        eprintln!("warning: {w}");
    }
    Ok(true)
}

fn report_json(r: &ValidationReport) -> Value {
    json!({
        "psd_pass": r.psd_pass,
        "projector_pass": r.projector_pass,
        "trace_pass": r.trace_pass,
        "min_eigenvalue": fmt_num(r.min_eigenvalue),
        "hermiticity_residual": fmt_num(r.hermiticity_residual),
        "projector_residual": fmt_num(r.projector_residual),
        "trace_residual": fmt_num(r.trace_residual),
        "pass": r.pass,
    })
}

fn pass_word(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn validate(path: &PathBuf, b: &Built, o: Opts) -> CmdResult {
    let w = Operator::read_json(path)?;
    let r = b.characterization().validate_tol(&w, o.tol)?;
    if o.json {
        print_json(&report_json(&r));
    } else {
        println!(
            "psd: {} (min eigenvalue {}, hermiticity residual {})",
            pass_word(r.psd_pass),
            fmt_num(r.min_eigenvalue),
            fmt_num(r.hermiticity_residual)
        );
        println!("projector: {} (residual {})", pass_word(r.projector_pass), fmt_num(r.projector_residual));
        println!("trace: {} (residual {})", pass_word(r.trace_pass), fmt_num(r.trace_residual));
        println!("verdict: {}", if r.pass { "member" } else { "not a member" });
    }
    Ok(r.pass)
}

fn survey_text(s: &SurveyReport) {
    for e in &s.entries {
        let ok: Vec<&str> = e.partners.iter().filter(|p| p.holds).map(|p| p.partner.as_str()).collect();
        if e.is_final {
            println!("candidate {}: final (partners {})", e.candidate, ok.join(", "));
        } else {
            println!("candidate {}: rejected", e.candidate);
        }
        for p in e.partners.iter().filter(|p| !p.holds) {
            println!("  partner {}: residual ({}) {}", p.partner, count(p.residual.len(), "term"), terms_line(&p.residual));
        }
    }
    println!("{}", s.verdict());
}

fn causality(b: &Built, candidate: Option<&str>, partners: Option<&[String]>, o: Opts) -> CmdResult {
    let c = b.characterization();
    let roles = c.roles();
    let inputs: Vec<Label> = match partners {
        Some(p) => p.iter().map(Label::from).collect(),
        None => roles.inputs.clone(),
    };
    let outputs: Vec<Label> = match candidate {
        Some(l) => vec![Label::from(l)],
        None => roles.outputs.clone(),
    };
    if outputs.is_empty() {
        return Err(Failure::Usage("the set has no output labels; pass --candidate".into()));
    }
    let survey = if outputs.len() == 1 {
        let e = is_final_output(c, &outputs[0], &inputs)?;
        let admissible = if e.is_final { vec![e.candidate.clone()] } else { vec![] };
        SurveyReport { causally_disordered: admissible.is_empty(), admissible, entries: vec![e] }
    } else {
        causal_order_survey_exec(c, &outputs, &inputs, o.exec())?
    };
    if o.json {
        let mut v = serde_json::to_value(&survey).map_err(Error::from)?;
        v["verdict"] = json!(survey.verdict());
        print_json(&v);
    } else {
        survey_text(&survey);
    }
    Ok(true)
}

fn sample(b: &Built, count: usize, out: Option<&PathBuf>, o: Opts) -> CmdResult {
    let set = object_of(b)?;
    let draws: Vec<Result<Operator, Error>> = o.exec().map_range(count, |k| {
        let mut rng = rng_from_seed(o.seed.wrapping_add(k as u64));
        match random_member(&set, &mut rng) {
            Err(Error::NonUnitalProjector) => random_affine_point(&set, &mut rng),
            r => r,
        }
    });
    let members = draws.into_iter().collect::<Result<Vec<_>, _>>()?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(Error::from)?;
            for (k, m) in members.iter().enumerate() {
                let path = dir.join(format!("member_{k:03}.json"));
                m.write_json(&path)?;
                println!("{}", path.display());
            }
        }
        None => {
            for m in &members {
                println!("{}", m.to_json_string());
            }
        }
    }
    Ok(true)
}

fn export(b: &Built, out: &PathBuf, basis: Option<&PathBuf>, o: Opts) -> CmdResult {
    let file = match b {
        Built::Transform(t) => ExportFile::Transform(Box::new(TransformBundle::from_spec(t)?)),
        Built::Set(c) => ExportFile::Set(Box::new(SetFile::from_characterization(c)?)),
    };
    file.write(out)?;
    let mut n_basis = None;
    if let Some(dir) = basis {
        let paths = write_image_basis(b.characterization().projector(), dense_budget(), dir)?;
        n_basis = Some(paths.len());
    }
    if o.json {
        print_json(&json!({ "bundle": out.display().to_string(), "basis_elements": n_basis }));
    } else {
        println!("wrote {}", out.display());
        if let (Some(dir), Some(n)) = (basis, n_basis) {
            println!("wrote {n} basis operators to {}", dir.display());
        }
    }
    Ok(true)
}

fn spec_of(b: &Built) -> Result<&TransformSpec, Failure> {
    b.transform().ok_or_else(|| Failure::Usage("check-map needs a `transform(... -> ...)` expression".into()))
}

fn check_map(path: &PathBuf, b: &Built, samples: usize, o: Opts) -> CmdResult {
    let spec = spec_of(b)?;
    let w = Operator::read_json(path)?;
    let t = ChoiMatrix::new(w, &spec.input.space.labels(), &spec.output.space.labels())?;
    let r = check_map_version(&t, spec, samples, o.seed, o.tol, o.exec())?;
    if o.json {
        print_json(&json!({
            "exhaustive": r.exhaustive,
            "n_inputs": r.n_inputs,
            "projector_residual": fmt_num(r.projector_residual),
            "trace_residual": fmt_num(r.trace_residual),
            "pass": r.pass,
            "choi_membership": r.choi_membership,
            "consistent": r.consistent,
        }));
    } else {
        println!(
            "inputs: {} ({})",
            r.n_inputs,
            if r.exhaustive { "full operator basis" } else { "random samples" }
        );
        println!("projector residual: {}", fmt_num(r.projector_residual));
        println!("trace residual: {}", fmt_num(r.trace_residual));
        println!("choi membership: {}", pass_word(r.choi_membership));
        println!("verdict: {}", pass_word(r.pass));
    }
    if !r.consistent {
        eprintln!("warning: map-level and Choi-level verdicts disagree");
    }
    Ok(r.pass)
}

