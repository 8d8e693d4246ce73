//! Run configuration: defaults, a `key = value` file, then command-line flags.
//!
//! Keys are the long flag names (`psi-res`, `contour-T`, ...); in a file `_`
//! may stand for `-` and case is ignored. Every problem found is reported at
//! once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use subsphere_core::geometry::SpheroidGeometry;
use subsphere_core::grid::LogGrid;
use subsphere_core::inversion::InversionParams;

use crate::error::{CliError, CliResult};
use crate::verify::Suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Phantom,
    Forward,
    Invert,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Phantom => "phantom",
            Command::Forward => "forward",
            Command::Invert => "invert",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Finite(f64),
    Infinite,
}

impl Lambda {
    pub fn geometry(self, n: usize) -> subsphere_core::Result<SpheroidGeometry> {
        match self {
            Lambda::Finite(v) => SpheroidGeometry::new(n, v),
            Lambda::Infinite => SpheroidGeometry::slice(n),
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Finite(v) => write!(f, "{v:?}"),
            Lambda::Infinite => f.write_str("inf"),
        }
    }
}

/// Flags shared by every subcommand. Values stay textual here so that
/// validation can report all problems together.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key = value file; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ambient dimension (3 or 4)
    #[arg(long)]
    pub n: Option<String>,
    /// Spheroid parameter λ > 0, or `inf` for the slice transform
    #[arg(long)]
    pub lambda: Option<String>,
    /// Resolution of the ψ rule on S^{n-2}
    #[arg(long = "psi-res")]
    pub psi_res: Option<String>,
    /// Resolution of the ω rule used by the forward transform
    #[arg(long = "quad-res")]
    pub quad_res: Option<String>,
    #[arg(long = "c-min")]
    pub c_min: Option<String>,
    #[arg(long = "c-max")]
    pub c_max: Option<String>,
    #[arg(long = "c-count")]
    pub c_count: Option<String>,
    /// Largest harmonic degree reconstructed
    #[arg(long = "m-max")]
    pub m_max: Option<String>,
    /// Abscissa of the inversion line, in (0, 1)
    #[arg(long)]
    pub rho: Option<String>,
    /// Relative regularization floor of the spectral division
    #[arg(long)]
    pub eps: Option<String>,
    /// Contour half-width T
    #[arg(long = "contour-T", alias = "contour-t")]
    pub contour_t: Option<String>,
    /// Contour step Δb
    #[arg(long = "contour-db")]
    pub contour_db: Option<String>,
    /// Decades dropped at each end of the c grid in reported profiles
    #[arg(long = "trim-decades")]
    pub trim_decades: Option<String>,
    /// Power-law tail terms fitted past c_max in the slice limit (0 = off)
    #[arg(long = "tail-terms")]
    pub tail_terms: Option<String>,
    /// Lower end of the error-report window in r
    #[arg(long = "eval-min")]
    pub eval_min: Option<String>,
    /// Upper end of the error-report window in r
    #[arg(long = "eval-max")]
    pub eval_max: Option<String>,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exact-profile table written by `phantom`
    #[arg(long = "profiles-out")]
    pub profiles_out: Option<PathBuf>,
    /// Exact-profile table to compare a reconstruction against
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Per-mode error report (CSV)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Directory for `b, re, im` dumps of the kernel lines
    #[arg(long = "dump-lines")]
    pub dump_lines: Option<PathBuf>,
    /// Phantom descriptor or preset (`single`, `four`)
    #[arg(long)]
    pub phantom: Option<String>,
    /// Worker thread cap
    #[arg(long)]
    pub threads: Option<String>,
    /// Comma-separated verification suites, or `all`
    #[arg(long)]
    pub suite: Option<String>,
    /// Treat every pipeline warning as an error (exit 5)
    #[arg(long)]
    pub strict: bool,
}

const KEYS: &[&str] = &[
    "n",
    "lambda",
    "psi-res",
    "quad-res",
    "c-min",
    "c-max",
    "c-count",
    "m-max",
    "rho",
    "eps",
    "contour-t",
    "contour-db",
    "trim-decades",
    "tail-terms",
    "eval-min",
    "eval-max",
    "in",
    "out",
    "profiles-out",
    "reference",
    "report",
    "dump-lines",
    "phantom",
    "threads",
    "suite",
    "strict",
];

/// Raw `key -> value` settings after layering.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(canonical(key), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_file(text: &str, path: &Path) -> CliResult<Self> {
        let mut out = Settings::default();
        let mut problems = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((key, value)) => out.set(key.trim(), value.trim()),
                None => problems.push(format!("{}:{}: expected `key = value`", path.display(), k + 1)),
            }
        }
        if problems.is_empty() {
            Ok(out)
        } else {
            Err(CliError::Config(problems))
        }
    }

    pub fn from_flags(flags: &Flags) -> CliResult<Self> {
        let mut s = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                Settings::parse_file(&text, path)?
            }
            None => Settings::default(),
        };
        let text = [
            ("n", &flags.n),
            ("lambda", &flags.lambda),
            ("psi-res", &flags.psi_res),
            ("quad-res", &flags.quad_res),
            ("c-min", &flags.c_min),
            ("c-max", &flags.c_max),
            ("c-count", &flags.c_count),
            ("m-max", &flags.m_max),
            ("rho", &flags.rho),
            ("eps", &flags.eps),
            ("contour-t", &flags.contour_t),
            ("contour-db", &flags.contour_db),
            ("trim-decades", &flags.trim_decades),
            ("tail-terms", &flags.tail_terms),
            ("eval-min", &flags.eval_min),
            ("eval-max", &flags.eval_max),
            ("phantom", &flags.phantom),
            ("threads", &flags.threads),
            ("suite", &flags.suite),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                s.set(key, v.clone());
            }
        }
        let paths = [
            ("in", &flags.input),
            ("out", &flags.out),
            ("profiles-out", &flags.profiles_out),
            ("reference", &flags.reference),
            ("report", &flags.report),
            ("dump-lines", &flags.dump_lines),
        ];
        for (key, value) in paths {
            if let Some(v) = value {
                s.set(key, v.display().to_string());
            }
        }
        if flags.strict {
            s.set("strict", "true");
        }
        Ok(s)
    }
}

fn canonical(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub lambda: Lambda,
    pub psi_res: usize,
    pub quad_res: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub c_count: usize,
    pub m_max: usize,
    pub rho: f64,
    pub eps: f64,
    pub contour_t: f64,
    pub contour_db: f64,
    pub trim_decades: f64,
    pub tail_terms: usize,
    pub eval_min: f64,
    pub eval_max: f64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub profiles_out: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub dump_lines: Option<PathBuf>,
    pub phantom: String,
    pub threads: Option<usize>,
    pub suites: Vec<Suite>,
    pub strict: bool,
}

struct Reader<'a> {
    settings: &'a Settings,
    problems: Vec<String>,
}

impl Reader<'_> {
    fn parse<T: std::str::FromStr>(&mut self, key: &str, default: T) -> T {
        match self.settings.get(key) {
            None => default,
            Some(text) => match text.parse() {
                Ok(v) => v,
                Err(_) => {
                    self.problems.push(format!("{key}: cannot parse `{text}`"));
                    default
                }
            },
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.settings.get(key).map(PathBuf::from)
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.problems.push(msg());
        }
    }
}

impl RunConfig {
    pub fn resolve(command: Command, settings: &Settings) -> CliResult<Self> {
        let mut r = Reader { settings, problems: Vec::new() };
        for key in settings.values.keys() {
            if !KEYS.contains(&key.as_str()) {
                r.problems.push(format!("unknown key `{key}`"));
            }
        }
        let n: usize = r.parse("n", 3);
        r.check(matches!(n, 3 | 4), || format!("n: must be 3 or 4 (got {n})"));
        let lambda = match settings.get("lambda") {
            None => Lambda::Finite(1.0),
            Some(t) if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") => Lambda::Infinite,
            Some(t) => match t.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Lambda::Finite(v),
                _ => {
                    r.problems.push(format!("lambda: expected a positive number or `inf`, got `{t}`"));
                    Lambda::Finite(1.0)
                }
            },
        };
        if let (Lambda::Finite(v), true) = (lambda, matches!(n, 3 | 4)) {
            if let Err(e) = SpheroidGeometry::new(n, v) {
                r.problems.push(format!("lambda: {e}"));
            }
        }
        let default_res = if n == 4 { 64 } else { 256 };
        let psi_res: usize = r.parse("psi-res", default_res);
        let quad_res: usize = r.parse("quad-res", default_res);
        r.check(psi_res >= 4, || format!("psi-res: must be at least 4 (got {psi_res})"));
        r.check(quad_res >= 4, || format!("quad-res: must be at least 4 (got {quad_res})"));

        let c_min: f64 = r.parse("c-min", 1e-3);
        let c_max: f64 = r.parse("c-max", 1e3);
        let c_count: usize = r.parse("c-count", 4096);
        let grid_ok = LogGrid::new(c_min, c_max, c_count);
        if let Err(e) = &grid_ok {
            r.problems.push(format!("c grid: {e}"));
        }

        // checked by `invert` against the ψ rule stored in the sinogram
        let m_max: usize = r.parse("m-max", 6);

        let rho: f64 = r.parse("rho", 0.5);
        let eps: f64 = r.parse("eps", 1e-4);
        let contour_t: f64 = r.parse("contour-t", 200.0);
        let contour_db: f64 = r.parse("contour-db", 0.05);
        let trim_decades: f64 = r.parse("trim-decades", 1.0);
        let tail_terms: usize = r.parse("tail-terms", 4);
        r.check(rho > 0.0 && rho < 1.0, || format!("rho: must lie in (0, 1) (got {rho})"));
        r.check(eps >= 0.0 && eps.is_finite(), || format!("eps: must be a non-negative number (got {eps})"));
        r.check(contour_t > 0.0 && contour_t.is_finite(), || format!("contour-T: must be positive (got {contour_t})"));
        r.check(contour_db > 0.0 && contour_db <= contour_t, || {
            format!("contour-db: must lie in (0, contour-T] (got {contour_db})")
        });
        r.check(trim_decades >= 0.0, || format!("trim-decades: must be non-negative (got {trim_decades})"));
        if let (Ok(g), Command::Phantom | Command::Forward) = (&grid_ok, command) {
            check_contour(&mut r.problems, g, contour_t, contour_db, trim_decades);
        }

        let eval_min: f64 = r.parse("eval-min", 0.2);
        let eval_max: f64 = r.parse("eval-max", 5.0);
        r.check(eval_min > 0.0 && eval_max > eval_min, || {
            format!("eval window: need 0 < eval-min < eval-max (got {eval_min}, {eval_max})")
        });

        let threads = match settings.get("threads") {
            None => None,
            Some(_) => {
                let t: usize = r.parse("threads", 1);
                r.check(t >= 1, || "threads: must be at least 1".into());
                Some(t.max(1))
            }
        };
        let suites = match Suite::parse_list(settings.get("suite").unwrap_or("all")) {
            Ok(s) => s,
            Err(e) => {
                r.problems.push(e);
                Vec::new()
            }
        };
        let strict = match settings.get("strict") {
            None => false,
            Some(t) => matches!(t.to_ascii_lowercase().as_str(), "true" | "1" | "yes"),
        };
        let phantom = settings.get("phantom").unwrap_or("single").to_string();
        if command == Command::Phantom && matches!(n, 3 | 4) {
            if let Err(e) = crate::descriptor::parse_phantom(&phantom, n) {
                r.problems.push(e);
            }
        }

        let input = r.path("in");
        let output = r.path("out");
        match command {
            Command::Forward | Command::Invert => r.check(input.is_some(), || "in: an input file is required".into()),
            _ => {}
        }
        match command {
            Command::Phantom | Command::Forward | Command::Invert => {
                r.check(output.is_some(), || "out: an output file is required".into())
            }
            Command::Verify => {}
        }
        let reference = r.path("reference");
        let report = r.path("report");
        if command == Command::Invert {
            r.check(report.is_none() || reference.is_some(), || "report: needs --reference".into());
        }

        if !r.problems.is_empty() {
            return Err(CliError::Config(r.problems));
        }
        Ok(RunConfig {
            command,
            n,
            lambda,
            psi_res,
            quad_res,
            c_min,
            c_max,
            c_count,
            m_max,
            rho,
            eps,
            contour_t,
            contour_db,
            trim_decades,
            tail_terms,
            eval_min,
            eval_max,
            input,
            output,
            profiles_out: r.path("profiles-out"),
            reference,
            report,
            dump_lines: r.path("dump-lines"),
            phantom,
            threads,
            suites,
            strict,
        })
    }

    pub fn geometry(&self) -> CliResult<SpheroidGeometry> {
        Ok(self.lambda.geometry(self.n)?)
    }

    pub fn c_grid(&self) -> CliResult<LogGrid> {
        Ok(LogGrid::new(self.c_min, self.c_max, self.c_count)?)
    }

    pub fn inversion_params(&self) -> CliResult<InversionParams> {
        let mut p = InversionParams::new(self.rho, self.eps, self.contour_t, self.contour_db)?;
        p.trim_decades = self.trim_decades;
        p.tail_terms = self.tail_terms;
        Ok(p)
    }

    /// The resolved configuration as ordered `key = value` pairs.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![
            ("command", self.command.name().to_string()),
            ("n", self.n.to_string()),
            ("lambda", self.lambda.to_string()),
            ("psi-res", self.psi_res.to_string()),
            ("quad-res", self.quad_res.to_string()),
            ("c-min", format!("{:?}", self.c_min)),
            ("c-max", format!("{:?}", self.c_max)),
            ("c-count", self.c_count.to_string()),
            ("m-max", self.m_max.to_string()),
            ("rho", format!("{:?}", self.rho)),
            ("eps", format!("{:?}", self.eps)),
            ("contour-T", format!("{:?}", self.contour_t)),
            ("contour-db", format!("{:?}", self.contour_db)),
            ("trim-decades", format!("{:?}", self.trim_decades)),
            ("tail-terms", self.tail_terms.to_string()),
            ("eval-min", format!("{:?}", self.eval_min)),
            ("eval-max", format!("{:?}", self.eval_max)),
            ("phantom", self.phantom.clone()),
            ("strict", self.strict.to_string()),
        ];
        let paths = [
            ("in", &self.input),
            ("out", &self.output),
            ("profiles-out", &self.profiles_out),
            ("reference", &self.reference),
            ("report", &self.report),
            ("dump-lines", &self.dump_lines),
        ];
        for (k, p) in paths {
            if let Some(p) = p {
                v.push((k, p.display().to_string()));
            }
        }
        if let Some(t) = self.threads {
            v.push(("threads", t.to_string()));
        }
        v
    }
}

/// Contour constraints the Mellin stage will enforce on a grid.
pub fn check_contour(problems: &mut Vec<String>, grid: &LogGrid, t: f64, db: f64, trim: f64) {
    let nyquist = std::f64::consts::PI / grid.log_extent();
    if db > nyquist {
        problems.push(format!(
            "contour-db: {db} exceeds π / ln(c_max / c_min) = {nyquist:.4} for this c grid"
        ));
    }
    let alias = std::f64::consts::PI / grid.step();
    if t > alias {
        problems.push(format!("contour-T: {t} exceeds π / Δu = {alias:.4} for this c grid"));
    }
    if subsphere_core::inversion::report_grid(grid, trim).is_err() {
        problems.push(format!("trim-decades: {trim} leaves no reporting grid inside [c_min, c_max]"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        let mut s = Settings::default();
        for (k, v) in pairs {
            s.set(k, *v);
        }
        s
    }

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::resolve(Command::Forward, &settings(&[("in", "p.txt"), ("out", "s.txt")])).unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.psi_res, 256);
        assert_eq!(c.c_count, 4096);
        assert_eq!(c.lambda, Lambda::Finite(1.0));
        let c = RunConfig::resolve(Command::Verify, &settings(&[("n", "4"), ("lambda", "inf")])).unwrap();
        assert_eq!(c.psi_res, 64);
        assert_eq!(c.lambda, Lambda::Infinite);
    }

    #[test]
    fn problems_are_aggregated() {
        let s = settings(&[("n", "7"), ("rho", "1.5"), ("c-min", "-1"), ("bogus", "1"), ("lambda", "x")]);
        match RunConfig::resolve(Command::Verify, &s) {
            Err(CliError::Config(p)) => assert!(p.len() >= 5, "{p:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_keys_are_canonicalized() {
        let text = "# comment\nPSI_RES = 32\ncontour_T = 100  # trailing\n\nlambda=inf\n";
        let s = Settings::parse_file(text, Path::new("x.conf")).unwrap();
        assert_eq!(s.get("psi-res"), Some("32"));
        assert_eq!(s.get("contour-t"), Some("100"));
        assert!(Settings::parse_file("nonsense", Path::new("x")).is_err());
    }

    #[test]
    fn contour_is_checked_against_the_grid() {
        let s = settings(&[("c-min", "1e-30"), ("c-max", "1e30"), ("c-count", "64"), ("in", "a"), ("out", "b")]);
        match RunConfig::resolve(Command::Forward, &s) {
            Err(CliError::Config(p)) => assert_eq!(p.len(), 2, "{p:?}"),
            other => panic!("{other:?}"),
        }
    }
}
