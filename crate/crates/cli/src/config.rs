//! Command line and `key = value` file parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{CommandFactory, Parser, ValueEnum};
use kepler_billiards::kepler_arc::ArcClass;
use kepler_billiards::planar::{pt, Pt};
use kepler_billiards::shadowing::SymbolWord;
use kepler_billiards::tables::{make_ellipse, make_string_table, make_width_table, StringSpec, WidthFourierSpec};
use kepler_billiards::{BoundaryTable, Complex64, KbError};

/// Failure of a CLI run, mapped to the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments or configuration (exit code 2).
    Usage(String),
    /// The computation failed or a verification did not pass (exit code 1).
    Numerical(String),
    /// `--help` or `--version` output (exit code 0).
    Help(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
            CliError::Help(_) => 0,
        }
    }

    /// Library error raised while handling the value of `key`.
    pub fn keyed(key: &str, e: KbError) -> Self {
        let msg = format!("{e} (key: {key})");
        match e {
            KbError::InvalidParameter(_) | KbError::OutsideTable(_) | KbError::NotConvex(_) | KbError::Construction(_) => {
                CliError::Usage(msg)
            }
            _ => CliError::Numerical(msg),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Help(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

fn clap_error(e: clap::Error) -> CliError {
    let text = e.render().to_string();
    match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Help(text),
        _ => CliError::Usage(text.trim_start_matches("error: ").trim_end().to_string()),
    }
}

fn usage(key: &str, msg: impl fmt::Display) -> CliError {
    CliError::Usage(format!("{msg} (key: {key})"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Boundary samples `u,x,y,kappa`.
    Table,
    /// One two-point Kepler arc.
    Arc,
    /// Phase portrait of the Kepler (or, with `--mu 0`, the classical) billiard.
    Portrait,
    /// Focal test and first/second kind classification of the center.
    Focal,
    /// Critical points of the perimeter function and their indices.
    Psi,
    /// Periodic orbits realizing symbolic words.
    Shadow,
}

/// Raw options. Every option may also be given in the `--config` file as
/// `key = value` with the long flag name as key.
#[derive(Debug, Clone, Parser)]
#[command(name = "kbill", version, about = "Kepler billiards in convex tables", args_override_self = true, allow_negative_numbers = true)]
pub struct Args {
    pub command: Command,
    /// `key = value` file; command line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `ellipse:A,B`, `width:a0=..,aK=..` or `string:a0=..,aK=..,c=X,Y,l=..`.
    #[arg(long)]
    pub table: Option<String>,
    /// Shorthand for `--table ellipse:A,B`.
    #[arg(long)]
    pub ellipse: Option<String>,
    /// Center of attraction `X,Y`.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub bounces: Option<usize>,
    /// Boundary samples for `table` and `focal`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Symbolic word over `T,T'` or `m,M`; repeat for several words.
    #[arg(long)]
    pub word: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p1: Option<String>,
    /// Arc class: direct, indirect, ccw or cw.
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Relative variation below which `phi` counts as constant.
    #[arg(long)]
    pub tol_focal: Option<f64>,
    /// Largest accepted energy residual of a portrait.
    #[arg(long)]
    pub tol_energy: Option<f64>,
    /// Largest accepted reflection residual of a realized orbit.
    #[arg(long)]
    pub tol_reflection: Option<f64>,
    /// Largest accepted replay deviation of a realized orbit.
    #[arg(long)]
    pub tol_replay: Option<f64>,
}

/// Table given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum TableSpec {
    Ellipse { a: f64, b: f64 },
    Width(WidthFourierSpec),
    String(StringSpec),
}

impl TableSpec {
    pub fn build(&self) -> Result<BoundaryTable, KbError> {
        match self {
            TableSpec::Ellipse { a, b } => make_ellipse(*a, *b),
            TableSpec::Width(w) => make_width_table(w).map(|(t, _)| t),
            TableSpec::String(s) => make_string_table(s),
        }
    }

    /// Default center: the focal point of a string table, the origin otherwise.
    pub fn default_center(&self) -> Pt {
        match self {
            TableSpec::String(s) => s.c,
            _ => pt(0.0, 0.0),
        }
    }
}

fn parse_num(key: &str, s: &str) -> CliResult<f64> {
    let v: f64 = s.trim().parse().map_err(|_| usage(key, format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(usage(key, format!("'{s}' is not finite")));
    }
    Ok(v)
}

/// `X,Y`
pub fn parse_point(key: &str, s: &str) -> CliResult<Pt> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(usage(key, format!("expected X,Y, got '{s}'")));
    }
    Ok(pt(parse_num(key, parts[0])?, parse_num(key, parts[1])?))
}

/// Keyed numeric lists: `a0=1,a3=0.3,c=3,0,l=6`. Bare numbers extend the
/// previous key.
fn keyed_lists(key: &str, body: &str) -> CliResult<Vec<(String, Vec<f64>)>> {
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    for tok in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((k, v)) = tok.split_once('=') {
            let k = k.trim().to_string();
            if out.iter().any(|(o, _)| *o == k) {
                return Err(usage(key, format!("table parameter '{k}' given twice")));
            }
            out.push((k, vec![parse_num(key, v)?]));
        } else {
            match out.last_mut() {
                Some((_, vals)) => vals.push(parse_num(key, tok)?),
                None => return Err(usage(key, format!("value '{tok}' has no parameter name"))),
            }
        }
    }
    Ok(out)
}

fn width_spec(key: &str, params: &[(String, Vec<f64>)], allowed_extra: &[&str]) -> CliResult<WidthFourierSpec> {
    let mut a0 = None;
    let mut modes = Vec::new();
    for (k, v) in params {
        if allowed_extra.contains(&k.as_str()) {
            continue;
        }
        let Some(idx) = k.strip_prefix('a') else {
            return Err(usage(key, format!("unknown table parameter '{k}'")));
        };
        let idx: u32 = idx.parse().map_err(|_| usage(key, format!("unknown table parameter '{k}'")))?;
        let coeff = match v.as_slice() {
            [re] => Complex64::new(*re, 0.0),
            [re, im] => Complex64::new(*re, *im),
            _ => return Err(usage(key, format!("'{k}' takes one or two numbers"))),
        };
        if idx == 0 {
            if coeff.im != 0.0 {
                return Err(usage(key, "a0 must be real"));
            }
            a0 = Some(coeff.re);
        } else {
            modes.push((idx, coeff));
        }
    }
    let a0 = a0.ok_or_else(|| usage(key, "missing a0"))?;
    modes.sort_by_key(|m| m.0);
    Ok(WidthFourierSpec::new(a0, modes))
}

impl FromStr for TableSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let key = "table";
        let (kind, body) = s.split_once(':').ok_or_else(|| usage(key, format!("expected KIND:PARAMS, got '{s}'")))?;
        match kind.trim() {
            "ellipse" => {
                let p = parse_point(key, body)?;
                Ok(TableSpec::Ellipse { a: p.re, b: p.im })
            }
            "circle" => {
                let r = parse_num(key, body)?;
                Ok(TableSpec::Ellipse { a: r, b: r })
            }
            "width" => Ok(TableSpec::Width(width_spec(key, &keyed_lists(key, body)?, &[])?)),
            "string" => {
                let params = keyed_lists(key, body)?;
                let width = width_spec(key, &params, &["c", "l"])?;
                let get = |name: &str| params.iter().find(|(k, _)| k == name).map(|(_, v)| v.clone());
                let c = match get("c").as_deref() {
                    Some([x, y]) => pt(*x, *y),
                    Some(_) => return Err(usage(key, "c takes two numbers")),
                    None => return Err(usage(key, "missing c")),
                };
                let ell = match get("l").as_deref() {
                    Some([l]) => *l,
                    Some(_) => return Err(usage(key, "l takes one number")),
                    None => return Err(usage(key, "missing l")),
                };
                Ok(TableSpec::String(StringSpec { width, c, ell }))
            }
            other => Err(usage(key, format!("unknown table kind '{other}'"))),
        }
    }
}

/// Tolerances with their defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub focal: f64,
    pub energy: f64,
    pub reflection: f64,
    pub replay: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { focal: 1e-6, energy: 1e-8, reflection: 1e-8, replay: 1e-6 }
    }
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub table: TableSpec,
    pub center: Pt,
    pub mu: f64,
    pub h: f64,
    pub seeds: usize,
    pub bounces: usize,
    pub samples: usize,
    pub words: Vec<SymbolWord>,
    pub p0: Option<Pt>,
    pub p1: Option<Pt>,
    pub class: ArcClass,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub tol: Tolerances,
}

/// Long flag names accepted as config keys.
pub fn known_keys() -> Vec<String> {
    Args::command()
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|k| k != "config" && k != "help" && k != "version")
        .collect()
}

/// Parses a `key = value` file. Blank lines and `#` comments are skipped;
/// underscores in keys are read as dashes.
pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, Vec<String>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage("config", format!("cannot read {}: {e}", path.display())))?;
    let known = known_keys();
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage("config", format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        let k = k.trim().replace('_', "-");
        if !known.contains(&k) {
            return Err(usage(&k, format!("{}:{}: unknown key '{k}'", path.display(), n + 1)));
        }
        let entry = out.entry(k.clone()).or_default();
        if !entry.is_empty() && k != "word" {
            return Err(usage(&k, format!("{}:{}: key '{k}' given twice", path.display(), n + 1)));
        }
        entry.push(v.trim().to_string());
    }
    Ok(out)
}

/// Builds the configuration from process arguments (program name first).
/// Values from `--config` are inserted ahead of the command line flags so
/// that the flags win.
pub fn parse_config<I, S>(args: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let first = Args::try_parse_from(&argv).map_err(clap_error)?;
    let args = match &first.config {
        None => first,
        Some(path) => {
            let file = read_config_file(path)?;
            let cli_words = !first.word.is_empty();
            let mut merged = vec![argv[0].clone(), argv[1].clone()];
            for (k, vals) in &file {
                if k == "word" && cli_words {
                    continue;
                }
                for v in vals {
                    merged.push(format!("--{k}={v}"));
                }
            }
            merged.extend(argv[2..].iter().cloned());
            Args::try_parse_from(&merged).map_err(clap_error)?
        }
    };
    resolve(args)
}

fn resolve(a: Args) -> CliResult<RunConfig> {
    let table = match (&a.table, &a.ellipse) {
        (Some(_), Some(_)) => return Err(usage("ellipse", "conflicts with --table")),
        (Some(t), None) => t.parse()?,
        (None, Some(e)) => format!("ellipse:{e}").parse().map_err(|_| usage("ellipse", format!("expected A,B, got '{e}'")))?,
        (None, None) => TableSpec::Ellipse { a: 2.0, b: 1.0 },
    };
    let center = match &a.center {
        Some(c) => parse_point("center", c)?,
        None => table.default_center(),
    };
    let h = a.h.unwrap_or(if a.command == Command::Shadow { 1e3 } else { 10.0 });
    if !(h > 0.0 && h.is_finite()) {
        return Err(usage("h", format!("energy must be positive, got {h}")));
    }
    let mu = a.mu.unwrap_or(1.0);
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(usage("mu", format!("mu must be nonnegative, got {mu}")));
    }
    let positive = |key: &str, v: Option<usize>, default: usize| -> CliResult<usize> {
        match v.unwrap_or(default) {
            0 => Err(usage(key, "must be positive")),
            n => Ok(n),
        }
    };
    let seeds = positive("seeds", a.seeds, 200)?;
    let bounces = positive("bounces", a.bounces, 500)?;
    let samples = positive("samples", a.samples, if a.command == Command::Focal { 1024 } else { 512 })?;
    let mut words = Vec::new();
    for w in &a.word {
        words.push(SymbolWord::parse(w).map_err(|e| CliError::keyed("word", e))?);
    }
    let p0 = a.p0.as_deref().map(|s| parse_point("p0", s)).transpose()?;
    let p1 = a.p1.as_deref().map(|s| parse_point("p1", s)).transpose()?;
    let class = match &a.class {
        Some(c) => c.parse().map_err(|e| CliError::keyed("class", e))?,
        None => ArcClass::Direct,
    };
    let d = Tolerances::default();
    let tol_of = |key: &str, v: Option<f64>, default: f64| -> CliResult<f64> {
        match v {
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(usage(key, format!("tolerance must be positive, got {t}"))),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    };
    let tol = Tolerances {
        focal: tol_of("tol-focal", a.tol_focal, d.focal)?,
        energy: tol_of("tol-energy", a.tol_energy, d.energy)?,
        reflection: tol_of("tol-reflection", a.tol_reflection, d.reflection)?,
        replay: tol_of("tol-replay", a.tol_replay, d.replay)?,
    };
    match a.command {
        Command::Arc => {
            if p0.is_none() {
                return Err(usage("p0", "arc needs --p0"));
            }
            if p1.is_none() {
                return Err(usage("p1", "arc needs --p1"));
            }
        }
        Command::Shadow if words.is_empty() => return Err(usage("word", "shadow needs at least one --word")),
        Command::Shadow if words.len() > 1 && a.csv.is_some() => {
            return Err(usage("csv", "--csv takes a single --word"));
        }
        _ => {}
    }
    if a.svg.is_some() && !matches!(a.command, Command::Table | Command::Portrait) {
        return Err(usage("svg", "only table and portrait produce SVG output"));
    }
    Ok(RunConfig {
        command: a.command,
        table,
        center,
        mu,
        h,
        seeds,
        bounces,
        samples,
        words,
        p0,
        p1,
        class,
        csv: a.csv,
        svg: a.svg,
        tol,
    })
}
