use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use sfl::braid::{self, AjMode, BraidError, HomContext, Word};
use sfl::flipgraph::{EdgeKind, FlipGraph, GraphError, Mode, DEFAULT_MAX_VERTICES};
use sfl::quiver::{self, QuiverError, QuiverWithPotential};
use sfl::{SignedTriangulation, SurfaceSpec, TriError, Triangulation};

#[derive(Parser)]
#[command(name = "sfl", version, about = "Flip graphs, quivers and twist groups of punctured marked surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
    Text,
}

#[derive(clap::Args)]
struct GraphOpts {
    /// Surface spec (JSON).
    spec: PathBuf,
    /// Treat vortices as signed decorations instead of plain punctures.
    #[arg(long)]
    signed: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
    max_vertices: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Print n, aleph, triangle count, rk and validation diagnostics.
    Info { spec: PathBuf },
    /// Enumerate the flip graph and print its size.
    Enumerate {
        #[command(flatten)]
        opts: GraphOpts,
    },
    /// Run every check on the flip graph and the presentations.
    Verify {
        #[command(flatten)]
        opts: GraphOpts,
    },
    /// Quiver with potential of the initial (or first admissible) triangulation.
    Qp {
        #[command(flatten)]
        opts: GraphOpts,
        #[arg(long)]
        admissible: bool,
        /// Triangulation JSON to use instead.
        #[arg(long)]
        triangulation: Option<PathBuf>,
    },
    /// Mutate a quiver with potential (JSON) at a vertex.
    Mutate {
        qp: PathBuf,
        #[arg(long)]
        vertex: usize,
    },
    /// Surface braid presentation, or with --mt the mixed twist presentation
    /// of the first admissible triangulation.
    Presentation {
        spec: PathBuf,
        #[arg(long)]
        mt: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
        max_vertices: usize,
    },
    /// Abel-Jacobi image of a word such as "s1 s2 d1^-1".
    Aj {
        spec: PathBuf,
        word: String,
        /// Forget these punctures.
        #[arg(long, value_delimiter = ',')]
        relative: Option<Vec<String>>,
    },
    /// Write the flip graph as DOT or JSON.
    Export {
        #[command(flatten)]
        opts: GraphOpts,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("flip graph truncated at {0} vertices; raise --max-vertices")]
    Truncated(usize),
    #[error("{0} check(s) failed")]
    Failed(usize),
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::IncompleteGraph(k) => CliError::Truncated(k),
            e => CliError::Input(e.to_string()),
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}
input_error!(TriError, QuiverError, BraidError, sfl::SurfaceError, serde_json::Error, std::io::Error);

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<SurfaceSpec> {
    SurfaceSpec::from_json(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn mode(signed: bool) -> Mode {
    if signed {
        Mode::Signed
    } else {
        Mode::Undecorated
    }
}

fn build(opts: &GraphOpts) -> Result<(SurfaceSpec, FlipGraph)> {
    let spec = load_spec(&opts.spec)?;
    let g = FlipGraph::build(&spec, mode(opts.signed), opts.max_vertices)?;
    Ok((spec, g))
}

fn complete(g: &FlipGraph) -> Result<()> {
    if g.complete {
        Ok(())
    } else {
        Err(CliError::Truncated(g.vertices.len()))
    }
}

fn info(path: &Path) -> Result<()> {
    let spec = load_spec(path)?;
    println!(
        "n={} aleph={} triangles={} rk={}",
        spec.rank_open_arcs()?,
        spec.decoration_count()?,
        spec.triangle_count()?,
        spec.sbr_rank()
    );
    let problems = spec.validate();
    if problems.is_empty() {
        println!("valid");
        Ok(())
    } else {
        for v in &problems {
            println!("violation: {v}");
        }
        Err(CliError::Input("invalid surface spec".into()))
    }
}

fn enumerate(opts: &GraphOpts) -> Result<()> {
    let (_, g) = build(opts)?;
    let loops: usize = (0..g.vertices.len()).map(|v| g.lflip_loops(v)).sum();
    println!(
        "vertices={} edges={} loops={} complete={}",
        g.vertices.len(),
        g.edges.len(),
        loops,
        g.complete
    );
    complete(&g)
}

fn qp_of(g: &FlipGraph, v: usize) -> std::result::Result<QuiverWithPotential, QuiverError> {
    match g.mode {
        Mode::Undecorated => Ok(quiver::qp_from_triangulation(&g.vertices[v].rep.base)),
        Mode::Signed => quiver::qp_from_signed(&g.vertices[v].rep),
    }
}

fn verify(opts: &GraphOpts) -> Result<()> {
    let (spec, g) = build(opts)?;
    complete(&g)?;
    let mut failures = 0;
    let mut line = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let bad = g.regularity_violations();
    line("regularity", bad.is_empty(), format!("{} vertices, {} violations", g.vertices.len(), bad.len()));
    let loops_ok = (0..g.vertices.len()).all(|v| g.lflip_loops(v) == g.expected_loops(v));
    line("loops", loops_ok, "L-flip loops match self-folded edges at plain punctures".into());

    let rel = g.verify_relations()?;
    let br4 = g.verify_br4_assembly()?;
    let stats = rel.stats().into_iter().filter(|(name, _)| *name != "br4");
    for (name, s) in stats.chain([("br4", &br4.br4)]) {
        if s.found == 0 {
            line(name, true, "none found".into());
            continue;
        }
        line(name, s.counterexamples.is_empty(), format!("{}/{} close", s.verified, s.found));
    }

    let (mut checked, mut wrong) = (0, 0);
    for e in g.edges.iter().filter(|e| e.kind == EdgeKind::Flip) {
        let Ok(mu) = qp_of(&g, e.source)?.mutate(e.arc) else { continue };
        checked += 1;
        if quiver::quiver_iso(&qp_of(&g, e.target)?, &mu).is_none() {
            wrong += 1;
        }
    }
    line("flip-mutation", wrong == 0, format!("{} of {checked} edges agree", checked - wrong));

    if spec.decoration_count()? >= 2 {
        let p = braid::sbr_presentation(&spec)?;
        let r = braid::verify_presentation(&p, &HomContext::for_spec(&spec)?)?;
        line("sbr-presentation", r.ok(), format!("{} relations, {} failures", r.relations, r.failures.len()));
    }
    let (mut mts, mut mt_bad) = (0, 0);
    for v in &g.vertices {
        let t = &v.rep.base;
        let Ok(p) = braid::mt_presentation(t) else { continue };
        let ctx = HomContext::for_triangulation(t);
        let r = braid::verify_presentation(&p, &ctx)?;
        let ker = ctx.kernel_generators(&p, &t.isolated_punctures())?;
        mts += 1;
        if !r.ok() || ker.len() != p.generators.len() {
            mt_bad += 1;
        }
    }
    line("mt-presentation", mt_bad == 0, format!("{} of {mts} triangulations pass", mts - mt_bad));

    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(failures))
    }
}

fn qp(opts: &GraphOpts, admissible: bool, tri: Option<&Path>) -> Result<()> {
    let spec = load_spec(&opts.spec)?;
    let st = if let Some(path) = tri {
        SignedTriangulation::from_json(&serde_json::from_str(&read(path)?)?)?
    } else if admissible {
        let g = FlipGraph::build(&spec, mode(opts.signed), opts.max_vertices)?;
        g.vertices
            .iter()
            .find(|v| v.rep.base.is_admissible())
            .map(|v| v.rep.clone())
            .ok_or_else(|| CliError::Input("no admissible triangulation found".into()))?
    } else {
        let spec = if opts.signed { spec } else { spec.forget_vortices() };
        SignedTriangulation::initial(&spec)?
    };
    let q = if opts.signed {
        quiver::qp_from_signed(&st)?
    } else {
        quiver::qp_from_triangulation(&st.base)
    };
    let out = serde_json::json!({
        "triangulation": st.to_json(),
        "qp": q.to_json(),
        "loops": q.loops(),
        "two_cycles": q.two_cycles().len(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn mutate(path: &Path, k: usize) -> Result<()> {
    let v: serde_json::Value = serde_json::from_str(&read(path)?)?;
    let q = QuiverWithPotential::from_json(v.get("qp").unwrap_or(&v))?;
    println!("{}", serde_json::to_string_pretty(&q.mutate(k)?.to_json())?);
    Ok(())
}

fn first_admissible(spec: &SurfaceSpec, max_vertices: usize) -> Result<Triangulation> {
    let g = FlipGraph::build(spec, Mode::Undecorated, max_vertices)?;
    g.vertices
        .iter()
        .map(|v| &v.rep.base)
        .find(|t| t.is_admissible() && braid::mt_presentation(t).is_ok())
        .cloned()
        .ok_or_else(|| CliError::Input("no admissible triangulation without double arrows".into()))
}

fn presentation(path: &Path, mt: bool, format: Format, max_vertices: usize) -> Result<()> {
    let spec = load_spec(path)?;
    let p = if mt {
        braid::mt_presentation(&first_admissible(&spec.forget_vortices(), max_vertices)?)?
    } else {
        braid::sbr_presentation(&spec)?
    };
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&p.to_json())?),
        _ => print!("{}", p.to_text()),
    }
    Ok(())
}

fn aj(path: &Path, word: &str, relative: Option<&[String]>) -> Result<()> {
    let spec = load_spec(path)?;
    let word: Word = word.parse()?;
    let mode = match relative {
        None => AjMode::Full,
        Some(labels) => {
            let known: BTreeSet<String> = spec.puncture_labels().into_iter().collect();
            if let Some(bad) = labels.iter().find(|l| !known.contains(*l)) {
                return Err(CliError::Input(format!("unknown puncture {bad}")));
            }
            AjMode::Relative(labels.iter().cloned().collect())
        }
    };
    let ctx = HomContext::for_spec(&spec)?;
    println!("{}", ctx.aj(&word, &mode)?);
    Ok(())
}

fn export(opts: &GraphOpts, format: Format, out: Option<&Path>) -> Result<()> {
    let (_, g) = build(opts)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&g.to_json())? + "\n",
        _ => g.to_dot(),
    };
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    complete(&g)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Info { spec } => info(&spec),
        Command::Enumerate { opts } => enumerate(&opts),
        Command::Verify { opts } => verify(&opts),
        Command::Qp {
            opts,
            admissible,
            triangulation,
        } => qp(&opts, admissible, triangulation.as_deref()),
        Command::Mutate { qp, vertex } => mutate(&qp, vertex),
        Command::Presentation {
            spec,
            mt,
            format,
            max_vertices,
        } => presentation(&spec, mt, format, max_vertices),
        Command::Aj { spec, word, relative } => aj(&spec, &word, relative.as_deref()),
        Command::Export { opts, format, out } => export(&opts, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Failed(_) => 1,
                CliError::Input(_) => 2,
                CliError::Truncated(_) => 3,
            })
        }
    }
}
