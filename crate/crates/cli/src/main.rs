use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wavprod::atoms::{atomic_decompose, mass_ratio};
use wavprod::config::RunConfig;
use wavprod::corpus::{gen_corpus, CorpusKind, CorpusSpec, Payload};
use wavprod::divcurl::{divcurl_product, potential_fields, DivCurlParams};
use wavprod::grid::{read_grid, write_grid, write_grid_csv, GridFunction};
use wavprod::paraproduct::{paraproduct_split, pi3_l1_bound};
use wavprod::selfcheck::{run_criterion, run_selfcheck_with, CRITERIA};
use wavprod::spaces::{
    compute_norms, h1_square_norm, holder_product_bound, lp_norm, GrandMaximalParams, Lp, NormKind,
};
use wavprod::wavelet::{dwt_forward, dwt_inverse, filter_catalog_csv, project, Part};

#[derive(Parser)]
#[command(
    name = "wavprod",
    version,
    about = "Wavelet paraproducts, Orlicz norms and div-curl products on dyadic grids"
)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Wavelet filter (haar, db1 ... db8).
    #[arg(long, global = true)]
    filter: Option<String>,
    /// Directory for reports and generated files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fold {
    Pi2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectionPart {
    P,
    Q,
}

#[derive(Subcommand)]
enum Command {
    /// Forward wavelet transform: level energies, reconstruction residual and
    /// optional projections.
    Transform {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        j0: Option<i32>,
        /// Writes P_j or Q_j of the input for this level.
        #[arg(long)]
        level: Option<i32>,
        #[arg(long, value_enum, default_value = "p")]
        part: ProjectionPart,
        /// Destination of the projection (GFN1).
        #[arg(long)]
        projection: Option<PathBuf>,
        /// Also writes the projection as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Prints the filter catalog as CSV instead.
        #[arg(long)]
        catalog: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Paraproduct split fg = pi1 + pi2 + pi3 + coarse.
    Split {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        j0: Option<i32>,
        #[arg(long, value_enum)]
        fold_coarse: Option<Fold>,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Norms of a grid function.
    Norms {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated list of l1,l2,linf,bmo,bmo+,h1,llog,hlog.
        #[arg(long, default_value = "l1,l2,bmo,bmo+,h1,llog,hlog")]
        norms: String,
        #[arg(long)]
        j0: Option<i32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Atomic decomposition of the detail part of a grid function.
    Atoms {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        j0: Option<i32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// The ratio |fg|_Llog / (|f|_1 |g|_BMO+).
    Holder {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        j0: Option<i32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Div-curl product of F = grad u and G = curl v.
    Divcurl {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generates a corpus as GFN1 files plus a manifest.
    Gen {
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        dims: Option<usize>,
    },
    /// Runs the acceptance criteria.
    Selfcheck {
        /// Runs only this criterion.
        #[arg(long)]
        criterion: Option<usize>,
        /// Overrides a tolerance, as name=value.
        #[arg(long = "tolerance", value_parser = parse_override)]
        tolerances: Vec<(String, f64)>,
        /// Adds delta to one low-pass tap of every filter, as tap=delta.
        #[arg(long, value_parser = parse_perturbation)]
        perturb: Option<(usize, f64)>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    FiniteWaveletRandom,
    Atom,
    BmoLogExemplar,
    BandLimitedPotential,
}

impl From<Kind> for CorpusKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::FiniteWaveletRandom => CorpusKind::FiniteWaveletRandom,
            Kind::Atom => CorpusKind::Atom,
            Kind::BmoLogExemplar => CorpusKind::BmoLogExemplar,
            Kind::BandLimitedPotential => CorpusKind::BandLimitedPotential,
        }
    }
}

fn parse_override(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected name=value")?;
    let value = value.parse::<f64>().map_err(|e| e.to_string())?;
    Ok((name.to_string(), value))
}

fn parse_perturbation(s: &str) -> std::result::Result<(usize, f64), String> {
    let (tap, delta) = s.split_once('=').ok_or("expected tap=delta")?;
    Ok((
        tap.parse()
            .map_err(|e: std::num::ParseIntError| e.to_string())?,
        delta
            .parse()
            .map_err(|e: std::num::ParseFloatError| e.to_string())?,
    ))
}

struct Session {
    cfg: RunConfig,
    out: Option<PathBuf>,
}

impl Session {
    fn new(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(path) => RunConfig::from_path(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => RunConfig::default(),
        };
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        if let Some(filter) = &cli.filter {
            cfg.filter = filter.clone();
        }
        cfg.validate()?;
        if let Some(dir) = &cli.out {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(Self {
            cfg,
            out: cli.out.clone(),
        })
    }

    /// `explicit`, else `<out>/<name>`, else nothing.
    fn target(&self, explicit: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
        explicit
            .clone()
            .or_else(|| self.out.as_ref().map(|d| d.join(name)))
    }

    fn emit(&self, report: &Value, explicit: &Option<PathBuf>, name: &str) -> Result<()> {
        let text = serde_json::to_string_pretty(report)?;
        match self.target(explicit, name) {
            Some(path) => std::fs::write(&path, text + "\n")
                .with_context(|| format!("writing {}", path.display()))?,
            None => print_stdout(&(text + "\n"))?,
        }
        Ok(())
    }

    fn coarse(&self, flag: Option<i32>, f: &GridFunction) -> i32 {
        flag.unwrap_or_else(|| self.cfg.coarse_for(f.domain()))
    }

    fn maximal(&self) -> GrandMaximalParams {
        self.cfg
            .kernel
            .map(GrandMaximalParams::with_kernel)
            .unwrap_or_default()
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(path: &Path) -> Result<GridFunction> {
    read_grid(path).with_context(|| format!("reading {}", path.display()))
}

fn norms_of(f: &GridFunction) -> Value {
    json!({
        "l1": lp_norm(f, Lp::One),
        "l2": lp_norm(f, Lp::Two),
        "linf": lp_norm(f, Lp::Infinity),
    })
}

#[allow(clippy::too_many_arguments)]
fn transform(
    ctx: &Session,
    input: &Option<PathBuf>,
    j0: Option<i32>,
    level: Option<i32>,
    part: ProjectionPart,
    projection: &Option<PathBuf>,
    csv: &Option<PathBuf>,
    catalog: bool,
    report: &Option<PathBuf>,
) -> Result<()> {
    if catalog {
        let text = filter_catalog_csv();
        match ctx.target(report, "filters.csv") {
            Some(path) => std::fs::write(path, text)?,
            None => print_stdout(&text)?,
        }
        return Ok(());
    }
    let Some(input) = input else {
        bail!("transform needs --in or --catalog")
    };
    let f = load(input)?;
    let filter = ctx.cfg.load_filter()?;
    let coarse = ctx.coarse(j0, &f);
    let c = dwt_forward(&f, &filter, coarse)?;
    let back = dwt_inverse(&c);
    let residual = back.sub(&f)?.sup_norm() / f.sup_norm().max(f64::MIN_POSITIVE);
    let levels: Vec<Value> = (coarse..f.level())
        .map(|j| json!({"level": j, "energy": c.level_energy(j)}))
        .collect();
    let mut out = json!({
        "filter": filter.name(),
        "j0": coarse,
        "J": f.level(),
        "scaling_energy": c.energy() - c.detail_energy(),
        "detail_energy": c.detail_energy(),
        "levels": levels,
        "reconstruction_residual": residual,
    });
    if let Some(level) = level {
        let which = match part {
            ProjectionPart::P => Part::P,
            ProjectionPart::Q => Part::Q,
        };
        let p = project(&f, &filter, level, which)?;
        let name = format!(
            "{}{level}.gfn",
            if matches!(which, Part::P) { "P" } else { "Q" }
        );
        let target = ctx
            .target(projection, &name)
            .context("a projection needs --projection or --out")?;
        write_grid(&p, &target)?;
        if let Some(csv) = csv {
            write_grid_csv(&p, csv)?;
        }
        out["projection"] =
            json!({"level": level, "path": target.display().to_string(), "norms": norms_of(&p)});
    }
    ctx.emit(&out, report, "transform.json")
}

fn split(
    ctx: &Session,
    f: &Path,
    g: &Path,
    j0: Option<i32>,
    fold: Option<Fold>,
    prefix: &Path,
) -> Result<()> {
    let f = load(f)?;
    let g = load(g)?;
    let filter = ctx.cfg.load_filter()?;
    let coarse = ctx.coarse(j0, &f);
    let fold = fold.is_some() || ctx.cfg.fold_coarse;
    let s = paraproduct_split(&f, &g, &filter, coarse, fold)?;
    let name = |part: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(format!("_{part}"));
        PathBuf::from(p)
    };
    for (part, func) in [
        ("pi1", &s.pi1),
        ("pi2", &s.pi2),
        ("pi3", &s.pi3),
        ("coarse", &s.coarse),
    ] {
        write_grid(func, name(&format!("{part}.gfn")))?;
    }
    let product = f.mul(&g)?;
    let chain = pi3_l1_bound(&f, &g, &filter, coarse)?;
    let swapped = paraproduct_split(&g, &f, &filter, coarse, fold)?;
    let scale = (f.sup_norm() * g.sup_norm()).max(f64::MIN_POSITIVE);
    let report = json!({
        "filter": filter.name(),
        "j0": coarse,
        "fold_coarse": fold,
        "norms": {
            "f": norms_of(&f), "g": norms_of(&g), "fg": norms_of(&product),
            "pi1": norms_of(&s.pi1), "pi2": norms_of(&s.pi2), "pi3": norms_of(&s.pi3),
            "coarse": norms_of(&s.coarse),
        },
        "residuals": {
            "split": product.sub(&s.total())?.sup_norm() / scale,
            "symmetry": s.pi2.sub(&swapped.pi1)?.sup_norm(),
            "pi3_chain": chain,
        },
    });
    std::fs::write(
        name("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    Ok(())
}

fn norms(
    ctx: &Session,
    input: &Path,
    list: &str,
    j0: Option<i32>,
    report: &Option<PathBuf>,
) -> Result<()> {
    let f = load(input)?;
    let kinds = NormKind::parse_list(list)?;
    let filter = ctx.cfg.load_filter()?;
    let out = compute_norms(&f, &filter, ctx.coarse(j0, &f), &kinds, &ctx.maximal())?;
    ctx.emit(&serde_json::to_value(out)?, report, "norms.json")
}

fn atoms(ctx: &Session, input: &Path, j0: Option<i32>, report: &Option<PathBuf>) -> Result<()> {
    let f = load(input)?;
    let filter = ctx.cfg.load_filter()?;
    let mut c = dwt_forward(&f, &filter, ctx.coarse(j0, &f))?;
    let coarse_energy = c.energy() - c.detail_energy();
    c.clear_scaling();
    let d = atomic_decompose(&c)?;
    let out = json!({
        "filter": filter.name(),
        "j0": c.coarse_level(),
        "removed_coarse_energy": coarse_energy,
        "atoms": d.summaries(),
        "l1_mass": d.l1_mass,
        "h1": h1_square_norm(&c)?,
        "ratio": mass_ratio(&c, &d)?,
    });
    ctx.emit(&out, report, "atoms.json")
}

fn holder(
    ctx: &Session,
    f: &Path,
    g: &Path,
    j0: Option<i32>,
    report: &Option<PathBuf>,
) -> Result<()> {
    let f = load(f)?;
    let g = load(g)?;
    let filter = ctx.cfg.load_filter()?;
    let gc = dwt_forward(&g, &filter, ctx.coarse(j0, &g))?;
    let out = holder_product_bound(&f, &g, &gc)?;
    ctx.emit(&serde_json::to_value(out)?, report, "holder.json")
}

fn divcurl(ctx: &Session, u: &Path, v: &Path, report: &Option<PathBuf>) -> Result<()> {
    let u = load(u)?;
    let v = load(v)?;
    let (f, g) = potential_fields(&u, &v)?;
    let params = DivCurlParams {
        coarse: ctx.cfg.coarse,
        maximal: ctx.maximal(),
    };
    let r = divcurl_product(&f, &g, &ctx.cfg.load_filter()?, &params)?;
    ctx.emit(&r.summary(), report, "divcurl.json")
}

fn gen(ctx: &Session, kind: Option<Kind>, count: Option<usize>, dims: Option<usize>) -> Result<()> {
    let mut spec = match (&ctx.cfg.corpus, kind) {
        (Some(spec), None) => spec.clone(),
        (Some(spec), Some(k)) => CorpusSpec {
            kind: k.into(),
            ..spec.clone()
        },
        (None, k) => {
            let mut spec =
                CorpusSpec::new(k.map(Into::into).unwrap_or(CorpusKind::FiniteWaveletRandom));
            spec.filter = ctx.cfg.filter.clone();
            spec.finest = ctx.cfg.finest;
            spec.coarse = ctx.cfg.coarse;
            spec.count = ctx.cfg.corpus_size;
            if let Some(b) = &ctx.cfg.domain {
                spec.dims = b.origin.len();
                spec.origin = Some(b.origin.clone());
                spec.side = b.side;
            }
            spec
        }
    };
    if let Some(n) = count {
        spec.count = n;
    }
    if let Some(d) = dims {
        spec.dims = d;
        if spec.origin.as_ref().is_some_and(|o| o.len() != d) {
            spec.origin = None;
        }
    }
    let dir = ctx.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let items = gen_corpus(&spec, ctx.cfg.seed)?;
    let mut files = Vec::new();
    for item in &items {
        let stem = format!("item_{:05}", item.index);
        match &item.payload {
            Payload::Potentials { u, v } => {
                let (pu, pv) = (format!("{stem}_u.gfn"), format!("{stem}_v.gfn"));
                write_grid(u, dir.join(&pu))?;
                write_grid(v, dir.join(&pv))?;
                files.push(json!({"index": item.index, "u": pu, "v": pv}));
            }
            _ => {
                let f = item.function().context("corpus item without samples")?;
                let name = format!("{stem}.gfn");
                write_grid(&f, dir.join(&name))?;
                let mut entry = json!({"index": item.index, "file": name});
                if let Payload::Atom(a) = &item.payload {
                    entry["cube"] = json!({"level": a.cube().level, "corner": a.cube().corner});
                    entry["l2_norm"] = json!(a.l2_norm());
                }
                files.push(entry);
            }
        }
    }
    let manifest = json!({"seed": ctx.cfg.seed, "spec": spec, "items": files});
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

fn selfcheck(
    ctx: &Session,
    criterion: Option<usize>,
    overrides: &[(String, f64)],
    perturb: Option<(usize, f64)>,
    report: &Option<PathBuf>,
) -> Result<bool> {
    let mut cfg = ctx.cfg.selfcheck();
    for (name, value) in overrides {
        cfg.tolerances.set(name, *value)?;
    }
    if let Some((tap, delta)) = perturb {
        cfg.perturbation = Some(wavprod::selfcheck::Perturbation { tap, delta });
    }
    let summary = match criterion {
        Some(id) => {
            if !(1..=CRITERIA).contains(&id) {
                bail!("criterion must lie in 1..={CRITERIA}");
            }
            let result = run_criterion(id, &cfg)?;
            print_stdout(&format!("{}\n", result.line()))?;
            json!({
                "passed": result.passed,
                "first_failure": (!result.passed).then(|| format!("criterion {} ({})", result.id, result.title)),
                "seed": cfg.seed,
                "filter": cfg.filter,
                "criteria": [result],
            })
        }
        None => serde_json::to_value(run_selfcheck_with(&cfg, |r| {
            let _ = print_stdout(&format!("{}\n", r.line()));
        })?)?,
    };
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    if let Some(path) = ctx.target(report, "selfcheck.json") {
        std::fs::write(&path, text)?;
    }
    let passed = summary["passed"].as_bool().unwrap_or(false);
    if !passed {
        eprintln!(
            "selfcheck failed: {}",
            summary["first_failure"]
                .as_str()
                .unwrap_or("unknown criterion")
        );
    }
    Ok(passed)
}

fn run(cli: Cli) -> Result<bool> {
    let ctx = Session::new(&cli)?;
    match &cli.command {
        Command::Transform {
            input,
            j0,
            level,
            part,
            projection,
            csv,
            catalog,
            report,
        } => transform(
            &ctx, input, *j0, *level, *part, projection, csv, *catalog, report,
        )?,
        Command::Split {
            f,
            g,
            j0,
            fold_coarse,
            out_prefix,
        } => split(&ctx, f, g, *j0, *fold_coarse, out_prefix)?,
        Command::Norms {
            input,
            norms: list,
            j0,
            report,
        } => norms(&ctx, input, list, *j0, report)?,
        Command::Atoms { input, j0, report } => atoms(&ctx, input, *j0, report)?,
        Command::Holder { f, g, j0, report } => holder(&ctx, f, g, *j0, report)?,
        Command::Divcurl { u, v, report } => divcurl(&ctx, u, v, report)?,
        Command::Gen { kind, count, dims } => gen(&ctx, *kind, *count, *dims)?,
        Command::Selfcheck {
            criterion,
            tolerances,
            perturb,
            report,
        } => return selfcheck(&ctx, *criterion, tolerances, *perturb, report),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
