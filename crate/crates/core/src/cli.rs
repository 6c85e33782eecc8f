//! Command-line front end.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 validation or configuration
//! error, 3 numerical non-convergence, 4 resource guard.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::SprayConfig;
use crate::dimensions::find_complex_dimensions;
use crate::direct::direct_tube_volume;
use crate::error::{Result, TubeError};
use crate::model::{SprayModel, ValidationOptions};
use crate::moran::similarity_dimension;
use crate::report::{comparison_csv, comparison_json, format_f64, zeros_json};
use crate::selftest;
use crate::tube::{
    compare, complex_dimensions_for_pairs, default_abscissa, inverse_mellin_numeric, ResidueExpansion,
};

/// Environment variable capping the worker thread count; 0 means automatic.
pub const THREADS_ENV: &str = "TUBEFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tubeforge", version, about = "Tube volumes of self-similar sprays")]
pub struct Cli {
    /// Spray configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Do not require the generator's tube function to be nondecreasing.
    #[arg(long, global = true)]
    pub skip_monotonicity: bool,

    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Direct,
    Residues,
    Both,
    Invmellin,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the standing assumptions on the spray.
    Validate,
    /// Similarity dimension.
    Dim,
    /// Complex dimensions with |Im| <= T, as JSON.
    Czeros {
        #[arg(long = "T")]
        window: f64,
        /// Left edge of the search window.
        #[arg(long)]
        re_floor: Option<f64>,
    },
    /// Tube volume at one epsilon.
    Tube {
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        /// Conjugate pairs of complex dimensions in the residue sum.
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        /// Zero window for residues; integration half-length for invmellin.
        #[arg(long = "T")]
        window: Option<f64>,
        /// Abscissa of the inversion line; defaults to (D + n) / 2.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Direct and residue values over an epsilon grid.
    Scan {
        /// START:STOP:COUNT[:linear|log]
        #[arg(long)]
        grid: GridSpec,
        #[arg(long)]
        pairs: usize,
        #[arg(long = "T")]
        window: Option<f64>,
    },
    /// Built-in acceptance suite.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// `START:STOP:COUNT[:linear|log]`, logarithmic by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected START:STOP:COUNT[:linear|log], got {s:?}"));
        }
        let number = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let start = number(parts[0])?;
        let stop = number(parts[1])?;
        let count = parts[2].parse::<usize>().map_err(|e| format!("{:?}: {e}", parts[2]))?;
        let spacing = match parts.get(3).copied() {
            None | Some("log") => Spacing::Log,
            Some("linear") => Spacing::Linear,
            Some(other) => return Err(format!("unknown spacing {other:?}")),
        };
        if !(start.is_finite() && stop.is_finite() && start > 0.0 && stop > 0.0) {
            return Err("grid end points must be positive".into());
        }
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        Ok(Self { start, stop, count, spacing })
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

/// Parse arguments, run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "tubeforge: {e}");
        return e.exit_code();
    }
    match execute(&cli) {
        Ok((text, code)) => match emit(&cli, &text, out) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(err, "tubeforge: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = writeln!(err, "tubeforge: {e}");
            e.exit_code()
        }
    }
}

/// Thread count from the value of [`THREADS_ENV`]; unset means 0.
pub fn parse_threads(value: Option<&str>) -> Result<usize> {
    match value {
        None => Ok(0),
        Some(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| TubeError::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
    }
}

fn configure_threads() -> Result<()> {
    let threads = parse_threads(std::env::var(THREADS_ENV).ok().as_deref())?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn emit(cli: &Cli, text: &str, out: &mut dyn Write) -> Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| TubeError::Config(format!("{}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| TubeError::Config(format!("standard output: {e}"))),
    }
}

fn load_model(cli: &Cli) -> Result<SprayModel> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| TubeError::Config("--config is required for this subcommand".into()))?;
    SprayConfig::load(path)?.to_model()
}

fn options(cli: &Cli) -> ValidationOptions {
    ValidationOptions { check_monotonicity: !cli.skip_monotonicity }
}

fn validated_model(cli: &Cli) -> Result<SprayModel> {
    let model = load_model(cli)?;
    let report = model.validate(options(cli));
    if !report.passed() {
        return Err(TubeError::Validation(report));
    }
    Ok(model)
}

fn format_for(cli: &Cli, default: Format, allowed: &[Format]) -> Result<Format> {
    let format = cli.format.unwrap_or(default);
    if !allowed.contains(&format) {
        return Err(TubeError::Config(format!("{format:?} output is not available for this subcommand")));
    }
    Ok(format)
}

/// Text or JSON for a list of named numbers.
fn fields(format: Format, entries: &[(&str, String)]) -> String {
    let mut s = String::new();
    match format {
        Format::Json => {
            s.push('{');
            for (k, (name, value)) in entries.iter().enumerate() {
                let sep = if k == 0 { "" } else { ", " };
                let _ = write!(s, "{sep}\"{name}\": {value}");
            }
            s.push_str("}\n");
        }
        _ => {
            for (name, value) in entries {
                let _ = writeln!(s, "{name} {value}");
            }
        }
    }
    s
}

fn execute(cli: &Cli) -> Result<(String, i32)> {
    match &cli.command {
        Command::Validate => {
            let format = format_for(cli, Format::Text, &[Format::Text, Format::Json])?;
            let model = load_model(cli)?;
            let report = model.validate(options(cli));
            let text = match format {
                Format::Json => {
                    let items: Vec<String> = report
                        .violations
                        .iter()
                        .map(|v| serde_json::to_string(&v.to_string()).expect("string serialises"))
                        .collect();
                    format!("{{\"passed\": {}, \"violations\": [{}]}}\n", report.passed(), items.join(", "))
                }
                _ => format!("{report}\n"),
            };
            Ok((text, if report.passed() { 0 } else { 2 }))
        }
        Command::Dim => {
            let format = format_for(cli, Format::Text, &[Format::Text, Format::Json])?;
            let model = validated_model(cli)?;
            let d = similarity_dimension(model.ratios());
            let text = match format {
                Format::Json => fields(
                    format,
                    &[
                        ("dimension", format_f64(d.value)),
                        ("residual", format_f64(d.residual)),
                        ("iterations", d.iterations.to_string()),
                    ],
                ),
                _ => format!(
                    "{}\nresidual {}\niterations {}\n",
                    format_f64(d.value),
                    format_f64(d.residual),
                    d.iterations
                ),
            };
            Ok((text, 0))
        }
        Command::Czeros { window, re_floor } => {
            format_for(cli, Format::Json, &[Format::Json])?;
            let model = validated_model(cli)?;
            let zeros = find_complex_dimensions(&model, *window, *re_floor)?;
            Ok((zeros_json(&zeros), 0))
        }
        Command::Tube { eps, method, pairs, window, c } => {
            let format = format_for(cli, Format::Text, &[Format::Text, Format::Json])?;
            let model = validated_model(cli)?;
            let mut entries = vec![("epsilon", format_f64(*eps))];
            match method {
                Method::Invmellin => {
                    let c = c.unwrap_or_else(|| default_abscissa(&model));
                    let half_length = window.unwrap_or(200.0);
                    let v = inverse_mellin_numeric(&model, *eps, c, half_length)?;
                    entries.push(("invmellin", format_f64(v)));
                    entries.push(("c", format_f64(c)));
                    entries.push(("T", format_f64(half_length)));
                }
                Method::Direct => entries.push(("direct", format_f64(direct_tube_volume(&model, *eps)?))),
                Method::Residues | Method::Both => {
                    let g = model.generator().inradius();
                    if !(*eps < g) {
                        return Err(TubeError::Domain(format!(
                            "residue formula stated only for ε < g (ε = {eps}, g = {g})"
                        )));
                    }
                    let direct = if *method == Method::Both { Some(direct_tube_volume(&model, *eps)?) } else { None };
                    let (zeros, window) = match window {
                        Some(w) => (find_complex_dimensions(&model, *w, None)?, *w),
                        None => complex_dimensions_for_pairs(&model, *pairs)?,
                    };
                    let mut e = ResidueExpansion::new(&model, &zeros, *pairs, window)?.evaluate(*eps)?;
                    e.direct = direct;
                    if let Some(d) = direct {
                        entries.push(("direct", format_f64(d)));
                    }
                    entries.push(("residues", format_f64(e.residues())));
                    if let (Some(abs), Some(rel)) = (e.abs_error(), e.rel_error()) {
                        entries.push(("abs_err", format_f64(abs)));
                        entries.push(("rel_err", format_f64(rel)));
                    }
                    entries.push(("pairs_used", e.pairs_used.to_string()));
                    entries.push(("im_leakage", format_f64(e.im_leakage)));
                    entries.push(("T", format_f64(window)));
                }
            }
            Ok((fields(format, &entries), 0))
        }
        Command::Scan { grid, pairs, window } => {
            let format = format_for(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            let model = validated_model(cli)?;
            let rows = compare(&model, &grid.points(), *pairs, *window)?;
            let text = match format {
                Format::Json => comparison_json(&rows),
                _ => comparison_csv(&rows),
            };
            Ok((text, 0))
        }
        Command::Selftest => {
            format_for(cli, Format::Text, &[Format::Text])?;
            let report = selftest::run();
            Ok((report.to_string(), if report.passed() { 0 } else { 1 }))
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn config(name: &str) -> String {
        format!("{}/configs/{name}.json", env!("CARGO_MANIFEST_DIR"))
    }

    fn invoke(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("tubeforge").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn with_config(name: &str, args: &[&str]) -> (i32, String, String) {
        let path = config(name);
        let mut all = vec!["--config", path.as_str()];
        all.extend_from_slice(args);
        invoke(&all)
    }

    fn field(text: &str, name: &str) -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{name} ")))
            .unwrap_or_else(|| panic!("no {name} in {text}"))
            .parse()
            .unwrap()
    }

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "0.01:0.1:3".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 3);
        assert!((p[1] - 0.1f64.powf(1.5)).abs() < 1e-15);
        let g: GridSpec = "1:2:5:linear".parse().unwrap();
        assert_eq!(g.points(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!("0.5:1:1".parse::<GridSpec>().unwrap().points(), vec![0.5]);
        for bad in ["0:1:3", "1:2:0", "1:2", "1:2:3:cubic", "-1:2:3", "a:2:3"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn thread_variable() {
        assert_eq!(parse_threads(None).unwrap(), 0);
        assert_eq!(parse_threads(Some(" 8 ")).unwrap(), 8);
        let err = parse_threads(Some("many")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(invoke(&["frobnicate"]).0, 2);
        assert_eq!(invoke(&["--help"]).0, 0);
        let (code, _, err) = invoke(&["dim"]);
        assert_eq!(code, 2);
        assert!(err.contains("--config"));
        assert_eq!(invoke(&["--config", "/nonexistent/x.json", "dim"]).0, 2);
        assert_eq!(with_config("cantor", &["czeros", "--T", "5", "--format", "csv"]).0, 2);
    }

    #[test]
    fn dim_prints_cantor_dimension() {
        let (code, out, _) = with_config("cantor", &["dim"]);
        assert_eq!(code, 0);
        let d: f64 = out.lines().next().unwrap().parse().unwrap();
        assert!((d - 0.6309297536).abs() < 1e-10, "{out}");
    }

    #[test]
    fn tube_both_agrees_with_direct() {
        let (code, out, err) = with_config("cantor", &["tube", "--eps", "0.1", "--method", "both", "--pairs", "500"]);
        assert_eq!(code, 0, "{err}");
        assert!((field(&out, "direct") - 13.0 / 15.0).abs() < 1e-12);
        assert!((field(&out, "residues") - 13.0 / 15.0).abs() < 1e-3);
        assert_eq!(field(&out, "pairs_used"), 500.0);
    }

    #[test]
    fn residues_above_inradius_is_exit_2() {
        let (code, _, err) = with_config("cantor", &["tube", "--eps", "0.2", "--method", "residues"]);
        assert_eq!(code, 2);
        assert!(err.contains("ε < g"), "{err}");
    }

    #[test]
    fn tube_methods_and_json() {
        let (code, out, err) =
            with_config("square", &["tube", "--eps", "0.2", "--method", "invmellin", "--format", "json"]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let (_, direct, _) = with_config("square", &["tube", "--eps", "0.2", "--method", "direct"]);
        assert!((v["invmellin"].as_f64().unwrap() - field(&direct, "direct")).abs() < 1e-2);
        // c = 1 lies below D for the square spray.
        let (code, _, _) = with_config("square", &["tube", "--eps", "0.2", "--method", "invmellin", "--c", "1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn scan_emits_versioned_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        let (code, out, err) = with_config(
            "cantor",
            &["scan", "--grid", "0.01:0.3:4", "--pairs", "100", "--output", path.to_str().unwrap()],
        );
        assert_eq!(code, 0, "{err}");
        assert!(out.is_empty());
        let csv = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# tubeforge-csv v1");
        assert_eq!(lines[1], "epsilon,direct,residues,abs_err,rel_err,pairs_used,im_leakage");
        assert_eq!(lines.len(), 6);
        // 0.3 ≥ g: residue cells empty, direct present.
        let direct: f64 = lines[5].split(',').nth(1).unwrap().parse().unwrap();
        assert!((direct - 1.0).abs() < 1e-15);
        assert!(lines[5].ends_with(",,,,,"), "{}", lines[5]);
        for row in &lines[2..5] {
            let cells: Vec<&str> = row.split(',').collect();
            assert_eq!(cells.len(), 7);
            assert!(cells[4].parse::<f64>().unwrap() < 1e-3);
        }
    }

    #[test]
    fn czeros_json_is_sorted() {
        let (code, out, _) = with_config("cantor", &["czeros", "--T", "30"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let zeros = v.as_array().unwrap();
        assert_eq!(zeros.len(), 11);
        let ims: Vec<f64> = zeros.iter().map(|z| z["im"].as_f64().unwrap()).collect();
        assert!(ims.windows(2).all(|w| w[0] < w[1]));
        assert!(zeros.iter().all(|z| z["multiplicity"] == 1));
    }

    #[test]
    fn validate_reports_violations() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(
            &bad,
            r#"{"dimension": 1, "ratios": [0.3333333333333333, 0.3333333333333333],
                "generator": {"kappa": [2.0], "inradius": 0.16666666666666666, "volume": 0.4}}"#,
        )
        .unwrap();
        let bad = bad.to_str().unwrap();
        let (code, out, _) = invoke(&["--config", bad, "validate"]);
        assert_eq!(code, 2);
        assert!(out.contains("continuity at g violated"));
        assert_eq!(invoke(&["--config", bad, "dim"]).0, 2);
        assert_eq!(with_config("square", &["validate"]), (0, "pass\n".to_string(), String::new()));
    }

    #[test]
    fn monotonicity_can_be_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dip.json");
        // V_G(ε) = 3ε - 4ε² turns down before g = 1/2 but meets Vol there.
        std::fs::write(
            &path,
            r#"{"dimension": 2, "ratios": [0.5, 0.5, 0.5],
                "generator": {"kappa": [-4.0, 3.0], "inradius": 0.5, "volume": 0.5}}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        assert_eq!(invoke(&["--config", p, "validate"]).0, 2);
        assert_eq!(invoke(&["--config", p, "--skip-monotonicity", "validate"]).0, 0);
    }

    #[test]
    fn resource_guard_is_exit_4() {
        let (code, _, err) = with_config("cantor", &["tube", "--eps", "0.1", "--method", "residues", "--pairs", "200000"]);
        assert_eq!(code, 4, "{err}");
    }
}
