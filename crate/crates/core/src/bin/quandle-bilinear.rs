use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use quandle_bilinear::catalog::{self, Catalog, CatalogError};
use quandle_bilinear::coloring::Engine;
use quandle_bilinear::diagram::{import_pd, parse_signs, DiagramFile, PdSource};
use quandle_bilinear::field::{PrimeField, VectorSpace};
use quandle_bilinear::forms::{
    search_forms_streaming, validate_form_with_cap, FormArray, FormError, SearchConfig, SearchMode,
};
use quandle_bilinear::invariant::{compute_both, compute_counts, InvariantError, InvariantPolynomial, InvariantReport};
use quandle_bilinear::quandle::{Quandle, QuandleError};

#[derive(Parser, Debug)]
#[command(name = "quandle-bilinear", version, about = "Quandle counting invariants with bilinear bead enhancements")]
struct Cli {
    /// Catalog directory used to resolve ids.
    #[arg(long, global = true, env = "QUANDLE_CATALOG")]
    catalog: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the quandle axioms for an operation table.
    QuandleCheck { quandle: String },
    /// Check a form against a quandle.
    FormCheck {
        quandle: String,
        form: String,
        /// Maximum number of violations to print.
        #[arg(long, default_value_t = quandle_bilinear::forms::DEFAULT_WITNESS_CAP)]
        witnesses: usize,
    },
    /// Enumerate valid forms for a quandle.
    FormSearch {
        quandle: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "all")]
        mode: SearchMode,
        /// Stop after this many forms.
        #[arg(long)]
        limit: Option<usize>,
        /// Time budget in seconds.
        #[arg(long)]
        budget: Option<f64>,
        /// Run even when the raw search space exceeds the safety bound.
        #[arg(long)]
        allow_large: bool,
    },
    /// Compute the enhanced polynomial for one link.
    Invariant {
        #[arg(long)]
        link: String,
        #[arg(long)]
        quandle: String,
        #[arg(long)]
        form: String,
        #[arg(long, value_enum, default_value_t = EngineArg::Propagate)]
        engine: EngineArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compute the polynomial for catalog links and compare with expected tables.
    Batch {
        #[arg(long)]
        quandle: String,
        #[arg(long)]
        form: String,
        /// Comma-separated link names (defaults to the whole catalog).
        #[arg(long, value_delimiter = ',')]
        links: Vec<String>,
        #[arg(long, value_enum, default_value_t = EngineArg::Propagate)]
        engine: EngineArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List catalog links, quandles and forms.
    CatalogList,
    /// Convert a PD code to the diagram file format.
    ImportPd {
        #[arg(long)]
        name: String,
        #[arg(long)]
        pd: String,
        /// One `+` or `-` per crossing; required when a sign cannot be inferred.
        #[arg(long)]
        signs: Option<String>,
        /// Free-text orientation note stored in the file.
        #[arg(long)]
        orientation: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Oracle,
    Propagate,
    Both,
}

impl EngineArg {
    fn label(self) -> &'static str {
        match self {
            EngineArg::Oracle => "oracle",
            EngineArg::Propagate => "propagate",
            EngineArg::Both => "both",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Exit 1 for violations and mismatches, 2 for bad input.
enum Failure {
    Violation(String),
    Input(String),
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Quandle { path, source: QuandleError::Axioms(v) } => Failure::Violation(format!(
                "{}: not a quandle\n{}",
                path.display(),
                v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
            )),
            CatalogError::Form { path, source: FormError::Violations(r) } => {
                Failure::Violation(format!("{}: {}", path.display(), r))
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

struct Context {
    catalog: Catalog,
}

impl Context {
    /// An existing file path, or else a catalog id.
    fn resolve(
        &self,
        arg: &str,
        by_id: impl Fn(&Catalog, &str) -> Result<PathBuf, CatalogError>,
    ) -> Result<PathBuf, Failure> {
        let p = Path::new(arg);
        if p.is_file() {
            return Ok(p.to_path_buf());
        }
        Ok(by_id(&self.catalog, arg)?)
    }

    fn quandle(&self, arg: &str) -> Result<(Quandle, String), Failure> {
        let path = self.resolve(arg, Catalog::quandle_path)?;
        Ok((catalog::load_quandle_file(&path)?, label(arg)))
    }

    fn form_array(&self, arg: &str) -> Result<(FormArray, PathBuf), Failure> {
        let path = self.resolve(arg, Catalog::form_path)?;
        Ok((catalog::load_form_file(&path)?, path))
    }

    fn diagram(&self, arg: &str) -> Result<DiagramFile, Failure> {
        let path = self.resolve(arg, Catalog::link_path)?;
        let mut file = catalog::load_diagram_file(&path)?;
        if file.diagram.name().is_empty() {
            file.diagram.set_name(label(arg));
        }
        Ok(file)
    }
}

/// Short name for reports: the file stem of a path, or the id itself.
fn label(arg: &str) -> String {
    Path::new(arg).file_stem().and_then(|s| s.to_str()).unwrap_or(arg).to_string()
}

fn validated_form(ctx: &Context, q: &Quandle, arg: &str) -> Result<quandle_bilinear::forms::BilinearForm, Failure> {
    let (raw, path) = ctx.form_array(arg)?;
    validate_form_with_cap(q, raw, quandle_bilinear::forms::DEFAULT_WITNESS_CAP)
        .map_err(|source| Failure::from(CatalogError::Form { path, source }))
}

fn compute(
    d: &quandle_bilinear::diagram::LinkDiagram,
    q: &Quandle,
    form: &quandle_bilinear::forms::BilinearForm,
    engine: EngineArg,
) -> Result<InvariantPolynomial, Failure> {
    let result = match engine {
        EngineArg::Oracle => compute_counts(d, q, form, Engine::Oracle).map_err(InvariantError::from),
        EngineArg::Propagate => compute_counts(d, q, form, Engine::Propagate).map_err(InvariantError::from),
        EngineArg::Both => compute_both(d, q, form),
    };
    match result {
        Ok(r) => Ok(r.polynomial),
        Err(e @ InvariantError::EngineMismatch { .. }) => Err(Failure::Violation(format!("{}: {e}", d.name()))),
        Err(e) => Err(Failure::Input(format!("{}: {e}", d.name()))),
    }
}

fn cmd_quandle_check(ctx: &Context, arg: &str) -> Result<(), Failure> {
    let (q, _) = ctx.quandle(arg)?;
    let kind = if q.is_kei() { " (kei)" } else { "" };
    println!("valid quandle of order {}{kind}", q.order());
    Ok(())
}

fn cmd_form_check(ctx: &Context, quandle: &str, form: &str, cap: usize) -> Result<(), Failure> {
    let (q, _) = ctx.quandle(quandle)?;
    let (raw, path) = ctx.form_array(form)?;
    let space = raw.space();
    match validate_form_with_cap(&q, raw, cap) {
        Ok(_) => {
            println!(
                "valid form over F_{}^{} for a quandle of order {}",
                space.field().modulus(),
                space.dim(),
                q.order()
            );
            Ok(())
        }
        Err(source) => Err(CatalogError::Form { path, source }.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_form_search(
    ctx: &Context,
    quandle: &str,
    p: u64,
    n: usize,
    mode: SearchMode,
    limit: Option<usize>,
    budget: Option<f64>,
    allow_large: bool,
) -> Result<(), Failure> {
    let (q, _) = ctx.quandle(quandle)?;
    let field = PrimeField::new(p).map_err(input)?;
    let space = VectorSpace::new(field, n).map_err(input)?;
    let time_budget = match budget {
        Some(s) if !(s > 0.0 && s.is_finite()) => return Err(Failure::Input("--budget must be positive".into())),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    if limit == Some(0) {
        return Err(Failure::Input("--limit must be positive".into()));
    }
    let cfg = SearchConfig { mode, limit, time_budget, allow_large, ..SearchConfig::new(space) };
    let mut count = 0usize;
    let stats = search_forms_streaming(&q, &cfg, |form| {
        if count > 0 {
            println!();
        }
        count += 1;
        print!("{}", form.to_text());
        true
    })
    .map_err(input)?;
    eprintln!(
        "{} forms, {} search nodes{}{}",
        stats.emitted,
        stats.nodes,
        if stats.timed_out { ", stopped by time budget" } else { "" },
        if stats.hit_limit { ", stopped by limit" } else { "" }
    );
    Ok(())
}

fn cmd_invariant(
    ctx: &Context,
    link: &str,
    quandle: &str,
    form: &str,
    engine: EngineArg,
    format: Format,
) -> Result<(), Failure> {
    let started = Instant::now();
    let file = ctx.diagram(link)?;
    let (q, q_label) = ctx.quandle(quandle)?;
    let phi = validated_form(ctx, &q, form)?;
    let poly = compute(&file.diagram, &q, &phi, engine)?;
    let report = InvariantReport::new(file.diagram.name(), &q_label, &label(form), &poly, engine.label(), started);
    match format {
        Format::Text => println!("{poly}"),
        Format::Json => println!("{}", report.to_json()),
    }
    Ok(())
}

#[derive(Serialize)]
struct BatchRow {
    polynomial: String,
    links: Vec<String>,
}

#[derive(Serialize)]
struct Mismatch {
    link: String,
    expected: String,
    computed: String,
}

#[derive(Serialize)]
struct BatchReport {
    quandle: String,
    form: String,
    engine: String,
    rows: Vec<BatchRow>,
    results: Vec<InvariantReport>,
    mismatches: Vec<Mismatch>,
    unchecked: Vec<String>,
}

fn cmd_batch(
    ctx: &Context,
    quandle: &str,
    form: &str,
    links: &[String],
    engine: EngineArg,
    format: Format,
) -> Result<(), Failure> {
    let (q, q_label) = ctx.quandle(quandle)?;
    let f_label = label(form);
    let phi = validated_form(ctx, &q, form)?;
    let names = if links.is_empty() { ctx.catalog.list()? } else { links.to_vec() };
    let expected = ctx.catalog.expected_table(&q_label, &f_label).unwrap_or(None);

    // Links run in parallel; results are collected in catalog order.
    let results = names
        .par_iter()
        .map(|name| {
            let started = Instant::now();
            let file = ctx.diagram(name)?;
            let poly = compute(&file.diagram, &q, &phi, engine)?;
            Ok(InvariantReport::new(name, &q_label, &f_label, &poly, engine.label(), started))
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    // Group rows in the expected table's link order when one exists.
    let mut order: Vec<&str> = Vec::new();
    if let Some(t) = &expected {
        order.extend(t.rows.iter().flat_map(|r| r.links.iter().map(String::as_str)));
    }
    let position = |name: &str| order.iter().position(|&n| n == name).unwrap_or(usize::MAX);
    let mut by_position: Vec<&InvariantReport> = results.iter().collect();
    by_position.sort_by_key(|r| position(&r.link));
    let mut rows: Vec<BatchRow> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for r in by_position {
        let p = r.polynomial().to_string();
        let i = *index.entry(p.clone()).or_insert_with(|| {
            rows.push(BatchRow { polynomial: p, links: Vec::new() });
            rows.len() - 1
        });
        rows[i].links.push(r.link.clone());
    }

    let mut mismatches = Vec::new();
    let mut unchecked = Vec::new();
    for r in &results {
        let computed = r.polynomial();
        match expected.as_ref().and_then(|t| t.lookup(&r.link)) {
            Some(text) => {
                let want: InvariantPolynomial = text.parse().map_err(input)?;
                if want != computed {
                    mismatches.push(Mismatch {
                        link: r.link.clone(),
                        expected: want.to_string(),
                        computed: computed.to_string(),
                    });
                }
            }
            None => unchecked.push(r.link.clone()),
        }
    }

    match format {
        Format::Text => {
            let width = rows.iter().map(|r| r.polynomial.len()).max().unwrap_or(0).max(3);
            println!("{:>width$} | links", "Phi");
            println!("{}-+-{}", "-".repeat(width), "-".repeat(5));
            for r in &rows {
                println!("{:>width$} | {}", r.polynomial, r.links.join(", "));
            }
            if expected.is_none() {
                println!("no expected table for quandle {q_label} and form {f_label}");
            } else {
                for m in &mismatches {
                    println!("mismatch {}: expected {}, computed {}", m.link, m.expected, m.computed);
                }
                if !unchecked.is_empty() {
                    println!("not in expected table: {}", unchecked.join(", "));
                }
                println!(
                    "{} of {} links match the expected table",
                    results.len() - mismatches.len() - unchecked.len(),
                    results.len()
                );
            }
        }
        Format::Json => {
            let n = mismatches.len();
            let report = BatchReport {
                quandle: q_label.clone(),
                form: f_label.clone(),
                engine: engine.label().to_string(),
                rows,
                results,
                mismatches,
                unchecked,
            };
            println!("{}", serde_json::to_string_pretty(&report).expect("plain data"));
            if n > 0 {
                return Err(Failure::Violation(format!("{n} links differ from the expected table")));
            }
            return Ok(());
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{} links differ from the expected table", mismatches.len())))
    }
}

fn cmd_catalog_list(ctx: &Context) -> Result<(), Failure> {
    println!("catalog {}", ctx.catalog.root().display());
    for name in ctx.catalog.list()? {
        let e = ctx.catalog.load(&name)?;
        let d = e.diagram();
        println!("{name}\t{} crossings\t{} components", d.crossings().len(), d.components().len());
    }
    println!("quandles: {}", ctx.catalog.quandle_ids()?.join(", "));
    println!("forms: {}", ctx.catalog.form_ids()?.join(", "));
    Ok(())
}

fn cmd_import_pd(name: &str, pd: &str, signs: Option<&str>, orientation: Option<String>) -> Result<(), Failure> {
    let signs = match signs {
        Some(s) => Some(parse_signs(s).ok_or_else(|| Failure::Input(format!("bad sign list `{s}`")))?),
        None => None,
    };
    let diagram = import_pd(name, pd, signs.as_deref()).map_err(input)?;
    let file = DiagramFile { diagram, orientation, source: Some(PdSource { code: pd.trim().to_string(), signs }) };
    print!("{}", file.to_text());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j as usize).build_global().map_err(input)?;
    }
    let ctx = Context { catalog: cli.catalog.map(Catalog::new).unwrap_or_default() };
    match cli.command {
        Command::QuandleCheck { quandle } => cmd_quandle_check(&ctx, &quandle),
        Command::FormCheck { quandle, form, witnesses } => cmd_form_check(&ctx, &quandle, &form, witnesses),
        Command::FormSearch { quandle, p, n, mode, limit, budget, allow_large } => {
            cmd_form_search(&ctx, &quandle, p, n, mode, limit, budget, allow_large)
        }
        Command::Invariant { link, quandle, form, engine, format } => {
            cmd_invariant(&ctx, &link, &quandle, &form, engine, format)
        }
        Command::Batch { quandle, form, links, engine, format } => {
            cmd_batch(&ctx, &quandle, &form, &links, engine, format)
        }
        Command::CatalogList => cmd_catalog_list(&ctx),
        Command::ImportPd { name, pd, signs, orientation } => cmd_import_pd(&name, &pd, signs.as_deref(), orientation),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
