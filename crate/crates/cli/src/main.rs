//! Command-line front end for the groupfourier toolkit: transforms,
//! multiplier checks, the operator zoo, and L^p probes.
//!
//! Every run resolves its parameters from an optional config file (JSON or
//! flat `key = value` lines) overlaid by command-line flags — flags win —
//! and writes the resolved `run_config.json` next to its outputs, so any
//! run can be reproduced from that file alone.
//!
//! Exit codes: 0 pass, 2 fail, 3 inconclusive, 64 malformed input or
//! usage, 1 anything else.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use groupfourier::fourier::forward;
use groupfourier::grid::QuadratureGrid;
use groupfourier::group::GroupId;
use groupfourier::io;
use groupfourier::multiplier::{
    check_class_with, check_hm_with, check_noninvariant, class_table, hm_table, kappa,
    MultiplierReport, Verdict,
};
use groupfourier::probe::{apriori_ratio, opnorm_lower_bound, AprioriKind, ProbeResult};
use groupfourier::symbols::{InvariantSymbol, Symbol};
use groupfourier::zoo::{exceptional_set, known_names, symbol_by_name};
use groupfourier::HalfInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const EXIT_FAIL: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_MALFORMED: u8 = 64;

/// Cross-cutoff drift (between the two largest cutoffs) above which a
/// multi-cutoff check that would otherwise pass is downgraded to
/// inconclusive: the constants have not stabilized.
const CROSS_CUTOFF_DRIFT: f64 = 0.10;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Flat, fully serializable run description. Band limits and cutoffs are
/// stored as plain numbers (halves allowed for SU(2) labels).
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bands: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zoo: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<String>,
}

impl RunConfig {
    /// Overlay `self` (flag values) on top of `base` (config-file values):
    /// flags win wherever both are present.
    fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(base.command),
            group: self.group.or(base.group),
            band: self.band.or(base.band),
            cutoff: self.cutoff.or(base.cutoff),
            cutoffs: self.cutoffs.or(base.cutoffs),
            bands: self.bands.or(base.bands),
            seed: self.seed.or(base.seed),
            trials: self.trials.or(base.trials),
            cap: self.cap.or(base.cap),
            p: self.p.or(base.p),
            m: self.m.or(base.m),
            rho: self.rho.or(base.rho),
            order: self.order.or(base.order),
            kind: self.kind.or(base.kind),
            axis: self.axis.or(base.axis),
            c_re: self.c_re.or(base.c_re),
            c_im: self.c_im.or(base.c_im),
            window: self.window.or(base.window),
            zoo: self.zoo.or(base.zoo),
            file: self.file.or(base.file),
            input: self.input.or(base.input),
            output: self.output.or(base.output),
            out_dir: self.out_dir.or(base.out_dir),
        }
    }

    fn parse(text: &str, origin: &Path) -> Result<RunConfig, Failure> {
        let body = text.trim_start();
        if body.starts_with('{') {
            return serde_json::from_str(text)
                .map_err(|e| Failure::malformed(origin, format!("config: {e}")));
        }
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Failure::malformed(
                    origin,
                    format!("config line {}: expected key = value", idx + 1),
                ));
            };
            cfg.set_flat(key.trim(), value.trim())
                .map_err(|msg| Failure::malformed(origin, format!("config line {}: {msg}", idx + 1)))?;
        }
        Ok(cfg)
    }

    fn set_flat(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num(v: &str) -> Result<f64, String> {
            HalfInt::parse(v)
                .map(HalfInt::to_f64)
                .or_else(|| v.parse::<f64>().ok())
                .ok_or_else(|| format!("cannot parse number '{v}'"))
        }
        fn list(v: &str) -> Result<Vec<f64>, String> {
            v.split(',').map(|s| num(s.trim())).collect()
        }
        fn uint(v: &str) -> Result<u64, String> {
            v.parse::<u64>().map_err(|e| format!("cannot parse integer '{v}': {e}"))
        }
        match key {
            "command" => self.command = Some(value.to_string()),
            "group" => self.group = Some(value.to_string()),
            "band" => self.band = Some(num(value)?),
            "cutoff" => self.cutoff = Some(num(value)?),
            "cutoffs" => self.cutoffs = Some(list(value)?),
            "bands" => self.bands = Some(list(value)?),
            "seed" => self.seed = Some(uint(value)?),
            "trials" => self.trials = Some(uint(value)? as usize),
            "cap" => self.cap = Some(num(value)?),
            "p" => self.p = Some(num(value)?),
            "m" => self.m = Some(num(value)?),
            "rho" => self.rho = Some(num(value)?),
            "order" => self.order = Some(uint(value)? as usize),
            "kind" => self.kind = Some(value.to_string()),
            "axis" => self.axis = Some(uint(value)? as usize),
            "c_re" => self.c_re = Some(num(value)?),
            "c_im" => self.c_im = Some(num(value)?),
            "window" => self.window = Some(num(value)?),
            "zoo" => self.zoo = Some(value.to_string()),
            "file" => self.file = Some(value.to_string()),
            "input" | "in" => self.input = Some(value.to_string()),
            "output" | "out" => self.output = Some(value.to_string()),
            "out_dir" => self.out_dir = Some(value.to_string()),
            other => return Err(format!("unknown config key '{other}'")),
        }
        Ok(())
    }
}

/// Accessors that turn the merged config into validated values, with
/// errors naming both the flag and the config key.
struct Resolved(RunConfig);

impl Resolved {
    fn require<T>(value: Option<T>, what: &str) -> Result<T, Failure> {
        value.ok_or_else(|| {
            Failure::usage(format!("missing required value '{what}' (flag --{what} or config key {what})"))
        })
    }

    fn group(&self) -> Result<GroupId, Failure> {
        let spec = self.0.group.as_deref().unwrap_or("su2");
        GroupId::parse(spec).map_err(|e| Failure::usage(e.to_string()))
    }

    fn half(value: f64, what: &str) -> Result<HalfInt, Failure> {
        HalfInt::try_from_f64(value).ok_or_else(|| {
            Failure::usage(format!("'{what}' must be an integer or half-integer, got {value}"))
        })
    }

    fn band(&self) -> Result<HalfInt, Failure> {
        Self::half(Self::require(self.0.band, "band")?, "band")
    }

    fn cutoff(&self) -> Result<HalfInt, Failure> {
        Self::half(Self::require(self.0.cutoff, "cutoff")?, "cutoff")
    }

    /// `--cutoffs a,b,c` if present, else the single `--cutoff`, ascending.
    fn cutoffs(&self) -> Result<Vec<HalfInt>, Failure> {
        let raw = match (&self.0.cutoffs, self.0.cutoff) {
            (Some(list), _) if !list.is_empty() => list.clone(),
            (_, Some(single)) => vec![single],
            _ => return Err(Failure::usage("missing required value 'cutoff' (flag --cutoff/--cutoffs or config keys cutoff/cutoffs)".into())),
        };
        let mut out = Vec::with_capacity(raw.len());
        for v in raw {
            out.push(Self::half(v, "cutoffs")?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn bands(&self) -> Result<Vec<HalfInt>, Failure> {
        let raw = Self::require(self.0.bands.clone(), "bands")?;
        let mut out = Vec::with_capacity(raw.len());
        for v in raw {
            out.push(Self::half(v, "bands")?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn seed(&self) -> u64 {
        self.0.seed.unwrap_or(0)
    }

    fn trials(&self) -> usize {
        self.0.trials.unwrap_or(32)
    }

    fn p(&self) -> f64 {
        self.0.p.unwrap_or(2.0)
    }

    fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.0.out_dir.as_deref().unwrap_or("."))
    }

    fn input(&self) -> Result<PathBuf, Failure> {
        Ok(PathBuf::from(Self::require(self.0.input.clone(), "in")?))
    }

    fn output(&self) -> Result<PathBuf, Failure> {
        Ok(PathBuf::from(Self::require(self.0.output.clone(), "out")?))
    }

    /// The invariant symbol a check or probe operates on: either a zoo name
    /// generated at `support` or a symbol file (which must be invariant).
    fn symbol_source(&self, support: HalfInt) -> Result<InvariantSymbol, Failure> {
        match (&self.0.zoo, &self.0.file) {
            (Some(name), None) => {
                let group = self.group()?;
                symbol_by_name(group, name, support).map_err(|e| {
                    Failure::usage(format!(
                        "unknown or unsupported zoo symbol '{name}' for {group}: {e} (known: {})",
                        known_names(group).join(", ")
                    ))
                })
            }
            (None, Some(path)) => {
                let path = Path::new(path);
                match load_symbol(path)? {
                    Symbol::Invariant(s) => Ok(s),
                    Symbol::Full(_) => Err(Failure::usage(format!(
                        "{} holds an x-dependent symbol; use `check noninv`",
                        path.display()
                    ))),
                }
            }
            (Some(_), Some(_)) => Err(Failure::usage("--zoo and --file are mutually exclusive".into())),
            (None, None) => Err(Failure::usage(
                "a symbol source is required: --zoo <name> or --file <symbol.json>".into(),
            )),
        }
    }

    /// Write the resolved configuration next to the run's outputs.
    fn emit(&self, command: &str) -> Result<(), Failure> {
        let dir = self.out_dir();
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::other(format!("cannot create {}: {e}", dir.display())))?;
        let mut cfg = self.0.clone();
        cfg.command = Some(command.to_string());
        cfg.seed = Some(self.seed());
        let text = serde_json::to_string_pretty(&cfg)
            .map_err(|e| Failure::other(format!("serializing run config: {e}")))?;
        write_text(&dir.join("run_config.json"), &text)
    }
}

// ---------------------------------------------------------------------------
// Failure plumbing
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum Failure {
    /// Unreadable or invalid input file / bad usage: exit 64, message names
    /// the offending record.
    Malformed(String),
    /// Everything else: exit 1.
    Other(String),
}

impl Failure {
    fn malformed(path: &Path, msg: impl std::fmt::Display) -> Failure {
        Failure::Malformed(format!("{}: {msg}", path.display()))
    }

    fn usage(msg: String) -> Failure {
        Failure::Malformed(msg)
    }

    fn other(msg: impl Into<String>) -> Failure {
        Failure::Other(msg.into())
    }
}

impl From<groupfourier::Error> for Failure {
    fn from(e: groupfourier::Error) -> Failure {
        Failure::Other(e.to_string())
    }
}

fn load_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::malformed(path, e))
}

fn load_symbol(path: &Path) -> Result<Symbol, Failure> {
    io::symbol_from_json(&load_text(path)?).map_err(|e| Failure::malformed(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Failure::other(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, text).map_err(|e| Failure::other(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "groupfourier",
    version,
    about = "Fourier transforms, multiplier checks, and L^p probes on SU(2) and the torus"
)]
struct Cli {
    /// Config file (JSON or flat `key = value` lines); flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for reports and the resolved run_config.json.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Seed for every randomized step of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward transform: grid-function CSV in, coefficients JSON out.
    Transform(TransformArgs),
    /// Inverse transform: coefficients JSON in, grid-function CSV out.
    Synthesize(SynthesizeArgs),
    /// Multiplier / symbol-class checks (exit 0 pass, 2 fail, 3 inconclusive).
    #[command(subcommand)]
    Check(CheckCommand),
    /// Named operators: symbols, exceptional shifts, parametrices.
    #[command(subcommand)]
    Zoo(ZooCommand),
    /// Randomized L^p probes.
    #[command(subcommand)]
    Probe(ProbeCommand),
}

#[derive(Args)]
struct TransformArgs {
    /// Group: su2, t1, t2, ...
    #[arg(long)]
    group: Option<String>,
    /// Band limit of the quadrature grid (halves allowed on su2).
    #[arg(long, value_name = "B")]
    band: Option<String>,
    /// Input grid-function CSV (node_index,re,im).
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output coefficients JSON.
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    /// Group stated in the coefficient file (checked against it): su2, t1, ...
    #[arg(long)]
    group: Option<String>,
    /// Grid band limit; defaults to the coefficient file's support limit.
    #[arg(long, value_name = "B")]
    band: Option<String>,
    /// Input coefficients JSON.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output grid-function CSV.
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SymbolSourceArgs {
    /// Group the zoo symbol lives on: su2 (default), t1, t2, ...
    #[arg(long)]
    group: Option<String>,
    /// Zoo symbol name (identity, d1.., laplacian, sublaplacian, heat,
    /// sublaplacian-parametrix, heat-parametrix).
    #[arg(long, value_name = "NAME")]
    zoo: Option<String>,
    /// Symbol JSON file (alternative to --zoo).
    #[arg(long, value_name = "FILE")]
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Hörmander–Mikhlin invariant multiplier check.
    Hm {
        #[command(flatten)]
        source: SymbolSourceArgs,
        /// Evaluation cutoff (largest label the conditions are read at).
        #[arg(long, value_name = "C")]
        cutoff: Option<String>,
        /// Cutoff ladder, e.g. 8,16,32; the report gains a stability verdict.
        #[arg(long, value_name = "C1,C2,..", value_delimiter = ',')]
        cutoffs: Option<Vec<String>>,
        /// Fixed cap on every constant; default 10x the zeroth-order constant.
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Symbol-class membership check with weights ⟨ξ⟩^(m − ρ|α|).
    Class {
        #[command(flatten)]
        source: SymbolSourceArgs,
        /// Evaluation cutoff (largest label the conditions are read at).
        #[arg(long, value_name = "C")]
        cutoff: Option<String>,
        /// Cutoff ladder, e.g. 8,16,32; the report gains a stability verdict.
        #[arg(long, value_name = "C1,C2,..", value_delimiter = ',')]
        cutoffs: Option<Vec<String>>,
        /// Order m of the class.
        #[arg(long, allow_hyphen_values = true)]
        m: Option<f64>,
        /// Decay gain ρ per difference order, in [0, 1].
        #[arg(long)]
        rho: Option<f64>,
        /// Largest difference order |α| tested (default 2).
        #[arg(long)]
        order: Option<usize>,
        /// Fixed cap on every constant; default 10x the zeroth-order constant.
        #[arg(long)]
        cap: Option<f64>,
    },
    /// x-dependent (full-symbol) multiplier check at integrability p.
    Noninv {
        /// Full-symbol JSON file.
        #[arg(long, value_name = "FILE")]
        file: Option<PathBuf>,
        /// Evaluation cutoff (largest label the conditions are read at).
        #[arg(long, value_name = "C")]
        cutoff: Option<String>,
        /// Integrability exponent of the target L^p estimate (default 2).
        #[arg(long)]
        p: Option<f64>,
        /// Fixed cap on every constant; default 10x the zeroth-order constant.
        #[arg(long)]
        cap: Option<f64>,
    },
}

#[derive(Subcommand)]
enum ZooCommand {
    /// Write a named operator's symbol to JSON.
    Symbol {
        /// Group the operator lives on: su2 (default), t1, t2, ...
        #[arg(long)]
        group: Option<String>,
        /// Operator name; see `--help` of `check hm` for the list.
        #[arg(long, value_name = "NAME")]
        name: Option<String>,
        /// Support limit of the emitted symbol.
        #[arg(long, value_name = "C")]
        cutoff: Option<String>,
        /// Output path (default <out-dir>/symbol.json).
        #[arg(long = "out", value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Print the exceptional shifts of X = D_axis on SU(2): c with X + c
    /// non-invertible, one per line, within |Im c| <= window.
    Exceptional {
        /// Axis of the field (1, 2, or 3).
        #[arg(long)]
        axis: Option<usize>,
        /// Imaginary window half-width (default 2).
        #[arg(long)]
        window: Option<f64>,
        /// Optional JSON output with the lattice description.
        #[arg(long = "out", value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Write the diagonal parametrix symbol of a second-order operator.
    Parametrix {
        /// Operator to invert: sublaplacian or heat.
        #[arg(long, value_name = "NAME")]
        name: Option<String>,
        /// Support limit of the emitted symbol.
        #[arg(long, value_name = "C")]
        cutoff: Option<String>,
        /// Output path (default <out-dir>/symbol.json).
        #[arg(long = "out", value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ProbeCommand {
    /// Monte-Carlo lower bound for the L^p -> L^p norm of a multiplier.
    Opnorm {
        #[command(flatten)]
        source: SymbolSourceArgs,
        /// Lebesgue exponent p of the norms in the ratio (default 2).
        #[arg(long)]
        p: Option<f64>,
        /// Band-limit ladder, e.g. 8,16,32.
        #[arg(long, value_name = "B1,B2,..", value_delimiter = ',')]
        bands: Option<Vec<String>>,
        /// Random band-limited inputs per band (default 32).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// A-priori inequality ratios on SU(2) (exact enumeration at p = 2).
    Apriori {
        /// subelliptic | xplusc
        #[arg(long, value_name = "KIND")]
        kind: Option<String>,
        /// Axis for kind=xplusc (default 3).
        #[arg(long)]
        axis: Option<usize>,
        /// Real part of the shift c (kind=xplusc).
        #[arg(long, allow_hyphen_values = true)]
        c_re: Option<f64>,
        /// Imaginary part of the shift c (kind=xplusc).
        #[arg(long, allow_hyphen_values = true)]
        c_im: Option<f64>,
        /// Lebesgue exponent p of the norms in the ratio (default 2).
        #[arg(long)]
        p: Option<f64>,
        /// Band-limit ladder, e.g. 8,16,32.
        #[arg(long, value_name = "B1,B2,..", value_delimiter = ',')]
        bands: Option<Vec<String>>,
        /// Random band-limited inputs per band (ignored at p = 2).
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn half_list(values: &Option<Vec<String>>, what: &str) -> Result<Option<Vec<f64>>, Failure> {
    let Some(values) = values else { return Ok(None) };
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let h = HalfInt::parse(v)
            .ok_or_else(|| Failure::usage(format!("'{what}' entries must be integers or halves, got '{v}'")))?;
        out.push(h.to_f64());
    }
    Ok(Some(out))
}

fn half_scalar(value: &Option<String>, what: &str) -> Result<Option<f64>, Failure> {
    let Some(v) = value else { return Ok(None) };
    let h = HalfInt::parse(v)
        .ok_or_else(|| Failure::usage(format!("'{what}' must be an integer or half-integer, got '{v}'")))?;
    Ok(Some(h.to_f64()))
}

fn path_string(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.to_string_lossy().into_owned())
}

impl Cli {
    /// Collect every flag into the flat config shape for the merge.
    fn flag_config(&self) -> Result<RunConfig, Failure> {
        let mut cfg = RunConfig {
            seed: self.seed,
            out_dir: path_string(&self.out_dir),
            ..RunConfig::default()
        };
        match &self.command {
            Command::Transform(a) => {
                cfg.group = a.group.clone();
                cfg.band = half_scalar(&a.band, "band")?;
                cfg.input = path_string(&a.input);
                cfg.output = path_string(&a.output);
            }
            Command::Synthesize(a) => {
                cfg.group = a.group.clone();
                cfg.band = half_scalar(&a.band, "band")?;
                cfg.input = path_string(&a.input);
                cfg.output = path_string(&a.output);
            }
            Command::Check(CheckCommand::Hm { source, cutoff, cutoffs, cap }) => {
                cfg.group = source.group.clone();
                cfg.zoo = source.zoo.clone();
                cfg.file = path_string(&source.file);
                cfg.cutoff = half_scalar(cutoff, "cutoff")?;
                cfg.cutoffs = half_list(cutoffs, "cutoffs")?;
                cfg.cap = *cap;
            }
            Command::Check(CheckCommand::Class { source, cutoff, cutoffs, m, rho, order, cap }) => {
                cfg.group = source.group.clone();
                cfg.zoo = source.zoo.clone();
                cfg.file = path_string(&source.file);
                cfg.cutoff = half_scalar(cutoff, "cutoff")?;
                cfg.cutoffs = half_list(cutoffs, "cutoffs")?;
                cfg.m = *m;
                cfg.rho = *rho;
                cfg.order = *order;
                cfg.cap = *cap;
            }
            Command::Check(CheckCommand::Noninv { file, cutoff, p, cap }) => {
                cfg.file = path_string(file);
                cfg.cutoff = half_scalar(cutoff, "cutoff")?;
                cfg.p = *p;
                cfg.cap = *cap;
            }
            Command::Zoo(ZooCommand::Symbol { group, name, cutoff, output }) => {
                cfg.group = group.clone();
                cfg.zoo = name.clone();
                cfg.cutoff = half_scalar(cutoff, "cutoff")?;
                cfg.output = path_string(output);
            }
            Command::Zoo(ZooCommand::Exceptional { axis, window, output }) => {
                cfg.axis = *axis;
                cfg.window = *window;
                cfg.output = path_string(output);
            }
            Command::Zoo(ZooCommand::Parametrix { name, cutoff, output }) => {
                cfg.zoo = name.clone();
                cfg.cutoff = half_scalar(cutoff, "cutoff")?;
                cfg.output = path_string(output);
            }
            Command::Probe(ProbeCommand::Opnorm { source, p, bands, trials }) => {
                cfg.group = source.group.clone();
                cfg.zoo = source.zoo.clone();
                cfg.file = path_string(&source.file);
                cfg.p = *p;
                cfg.bands = half_list(bands, "bands")?;
                cfg.trials = *trials;
            }
            Command::Probe(ProbeCommand::Apriori { kind, axis, c_re, c_im, p, bands, trials }) => {
                cfg.kind = kind.clone();
                cfg.axis = *axis;
                cfg.c_re = *c_re;
                cfg.c_im = *c_im;
                cfg.p = *p;
                cfg.bands = half_list(bands, "bands")?;
                cfg.trials = *trials;
            }
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_transform(r: &Resolved) -> Result<u8, Failure> {
    let group = r.group()?;
    let band = r.band()?;
    let input = r.input()?;
    let output = r.output()?;
    r.emit("transform")?;
    let grid = QuadratureGrid::get(group, band)?;
    let f = io::grid_function_from_csv(&load_text(&input)?, Arc::clone(&grid))
        .map_err(|e| Failure::malformed(&input, e))?;
    let coeffs = forward(&f)?;
    write_text(&output, &io::coefficients_to_json(&coeffs)?)?;
    println!(
        "transformed {} ({} nodes) -> {} ({} labels)",
        input.display(),
        grid.node_count(),
        output.display(),
        coeffs.iter().count()
    );
    Ok(0)
}

fn cmd_synthesize(r: &Resolved) -> Result<u8, Failure> {
    let input = r.input()?;
    let output = r.output()?;
    let coeffs = io::coefficients_from_json(&load_text(&input)?)
        .map_err(|e| Failure::malformed(&input, e))?;
    if let Some(spec) = r.0.group.as_deref() {
        let stated = GroupId::parse(spec).map_err(|e| Failure::usage(e.to_string()))?;
        if stated != coeffs.group() {
            return Err(Failure::usage(format!(
                "--group {stated} does not match the coefficient file's group {}",
                coeffs.group()
            )));
        }
    }
    let band = match r.0.band {
        Some(v) => Resolved::half(v, "band")?,
        None => coeffs.support_limit(),
    };
    r.emit("synthesize")?;
    let grid = QuadratureGrid::get(coeffs.group(), band)?;
    let f = groupfourier::fourier::inverse(&coeffs, &grid)?;
    write_text(&output, &io::grid_function_to_csv(&f))?;
    println!(
        "synthesized {} ({} labels) -> {} ({} nodes)",
        input.display(),
        coeffs.iter().count(),
        output.display(),
        grid.node_count()
    );
    Ok(0)
}

/// Stable file suffix for a cutoff: "16" or "7.5".
fn half_suffix(h: HalfInt) -> String {
    if h.is_integer() {
        format!("{}", h.twice() / 2)
    } else {
        format!("{}", h.to_f64())
    }
}

/// Run one check at each cutoff, write per-cutoff reports, fold the verdicts,
/// downgrade to inconclusive when the two largest cutoffs disagree by more
/// than CROSS_CUTOFF_DRIFT, and map the verdict to an exit code.
fn run_check_ladder<F>(r: &Resolved, cutoffs: &[HalfInt], check: F) -> Result<u8, Failure>
where
    F: Fn(HalfInt) -> Result<MultiplierReport, Failure>,
{
    let dir = r.out_dir();
    let single = cutoffs.len() == 1;
    let mut reports: Vec<MultiplierReport> = Vec::with_capacity(cutoffs.len());
    for &cutoff in cutoffs {
        let report = check(cutoff)?;
        let stem = if single {
            "report".to_string()
        } else {
            format!("report_{}", half_suffix(cutoff))
        };
        write_text(&dir.join(format!("{stem}.json")), &io::report_to_json(&report)?)?;
        write_text(&dir.join(format!("{stem}.csv")), &io::report_to_csv(&report))?;
        let worst = report
            .conditions
            .iter()
            .map(|c| c.constant)
            .fold(0.0f64, f64::max);
        println!(
            "{} @ cutoff {}: {} [conditions {}, worst constant {:.6e}, instability {:.2}%]",
            report.check,
            half_suffix(cutoff),
            report.verdict,
            report.conditions.len(),
            worst,
            report.worst_instability() * 100.0
        );
        reports.push(report);
    }

    // Any failure is final. Otherwise the largest cutoff speaks for the
    // ladder — earlier rungs exist to expose drift, not to veto — and the
    // drift between the two largest rungs can still withhold a pass.
    let mut verdict = if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else {
        reports.last().expect("at least one cutoff").verdict
    };
    if reports.len() >= 2 && verdict == Verdict::Pass {
        let last = &reports[reports.len() - 1];
        let prev = &reports[reports.len() - 2];
        let mut drift = 0.0f64;
        for c in &last.conditions {
            if let Some(p) = prev.condition(&c.id) {
                let denom = p.constant.abs().max(f64::MIN_POSITIVE);
                drift = drift.max((c.constant - p.constant).abs() / denom);
            }
        }
        println!(
            "cross-cutoff drift {:.2}% between cutoffs {} and {}",
            drift * 100.0,
            half_suffix(prev.cutoff),
            half_suffix(last.cutoff)
        );
        if drift > CROSS_CUTOFF_DRIFT {
            verdict = Verdict::Inconclusive;
        }
    }
    println!("verdict: {verdict}");
    Ok(match verdict {
        Verdict::Pass => 0,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn cmd_check_hm(r: &Resolved) -> Result<u8, Failure> {
    let cutoffs = r.cutoffs()?;
    let group = r.group()?;
    let top = *cutoffs.last().expect("nonempty");
    let margin = HalfInt::from_int(kappa(group.dimension()) as i64);
    let sigma = r.symbol_source(top + margin)?;
    r.emit("check hm")?;
    // One difference pass at the top cutoff serves every rung.
    let table = hm_table(&sigma, top)?;
    run_check_ladder(r, &cutoffs, |cutoff| {
        check_hm_with(&table, cutoff, r.0.cap).map_err(Failure::from)
    })
}

fn cmd_check_class(r: &Resolved) -> Result<u8, Failure> {
    let cutoffs = r.cutoffs()?;
    let m = Resolved::require(r.0.m, "m")?;
    let rho = Resolved::require(r.0.rho, "rho")?;
    let order = r.0.order.unwrap_or(2);
    let top = *cutoffs.last().expect("nonempty");
    let sigma = r.symbol_source(top + HalfInt::from_int(order as i64))?;
    r.emit("check class")?;
    let table = class_table(&sigma, order, top)?;
    run_check_ladder(r, &cutoffs, |cutoff| {
        check_class_with(&table, m, rho, cutoff, r.0.cap).map_err(Failure::from)
    })
}

fn cmd_check_noninv(r: &Resolved) -> Result<u8, Failure> {
    let cutoffs = r.cutoffs()?;
    let p = r.p();
    let path = PathBuf::from(Resolved::require(r.0.file.clone(), "file")?);
    let symbol = match load_symbol(&path)? {
        Symbol::Full(s) => s,
        Symbol::Invariant(_) => {
            return Err(Failure::usage(format!(
                "{} holds an invariant symbol; use `check hm` or `check class`",
                path.display()
            )))
        }
    };
    r.emit("check noninv")?;
    run_check_ladder(r, &cutoffs, |cutoff| {
        check_noninvariant(&symbol, p, cutoff, r.0.cap).map_err(Failure::from)
    })
}

fn cmd_zoo_symbol(r: &Resolved) -> Result<u8, Failure> {
    let group = r.group()?;
    let name = Resolved::require(r.0.zoo.clone(), "name")?;
    let cutoff = r.cutoff()?;
    let output = match &r.0.output {
        Some(p) => PathBuf::from(p),
        None => r.out_dir().join("symbol.json"),
    };
    r.emit("zoo symbol")?;
    let sigma = symbol_by_name(group, &name, cutoff).map_err(|e| {
        Failure::usage(format!(
            "unknown or unsupported zoo symbol '{name}' for {group}: {e} (known: {})",
            known_names(group).join(", ")
        ))
    })?;
    write_text(&output, &io::symbol_to_json(&Symbol::Invariant(sigma.clone()))?)?;
    println!(
        "wrote symbol '{name}' ({group}, support {}, {} labels) to {}",
        half_suffix(sigma.support_limit()),
        sigma.iter().count(),
        output.display()
    );
    Ok(0)
}

/// `a+bi` with the shortest faithful decimal digits, e.g. `0-1.5i`.
fn format_complex(c: Complex64) -> String {
    // Adding 0.0 turns -0.0 into +0.0 so zeros print unsigned.
    let (re, im) = (c.re + 0.0, c.im + 0.0);
    if im >= 0.0 {
        format!("{re}+{im}i")
    } else {
        format!("{re}-{}i", -im)
    }
}

fn cmd_zoo_exceptional(r: &Resolved) -> Result<u8, Failure> {
    let axis = Resolved::require(r.0.axis, "axis")?;
    let window = r.0.window.unwrap_or(2.0);
    r.emit("zoo exceptional")?;
    let set = exceptional_set(axis, window)?;
    for member in &set.members {
        println!("{}", format_complex(*member));
    }
    if let Some(path) = &r.0.output {
        #[derive(Serialize)]
        struct ExceptionalFile {
            axis: usize,
            window: f64,
            offset: [f64; 2],
            step: f64,
            members: Vec<[f64; 2]>,
        }
        let file = ExceptionalFile {
            axis,
            window,
            offset: [set.offset.re, set.offset.im],
            step: set.step,
            members: set.members.iter().map(|c| [c.re, c.im]).collect(),
        };
        let text = serde_json::to_string_pretty(&file)
            .map_err(|e| Failure::other(format!("serializing exceptional set: {e}")))?;
        write_text(Path::new(path), &text)?;
    }
    Ok(0)
}

fn cmd_zoo_parametrix(r: &Resolved) -> Result<u8, Failure> {
    let name = Resolved::require(r.0.zoo.clone(), "name")?;
    let cutoff = r.cutoff()?;
    let output = match &r.0.output {
        Some(p) => PathBuf::from(p),
        None => r.out_dir().join("symbol.json"),
    };
    let full = match name.as_str() {
        "sublaplacian" | "heat" => format!("{name}-parametrix"),
        other => {
            return Err(Failure::usage(format!(
                "unknown parametrix '{other}' (expected sublaplacian or heat)"
            )))
        }
    };
    r.emit("zoo parametrix")?;
    let sigma = symbol_by_name(GroupId::Su2, &full, cutoff)?;
    write_text(&output, &io::symbol_to_json(&Symbol::Invariant(sigma.clone()))?)?;
    println!(
        "wrote parametrix of '{name}' (su2, support {}, declared order {}) to {}",
        half_suffix(sigma.support_limit()),
        sigma.declared_order().unwrap_or(f64::NAN),
        output.display()
    );
    Ok(0)
}

fn emit_probe(r: &Resolved, result: &ProbeResult) -> Result<(), Failure> {
    let dir = r.out_dir();
    write_text(&dir.join("probe.json"), &io::probe_to_json(result)?)?;
    write_text(&dir.join("probe.csv"), &io::probe_to_csv(result))?;
    write_text(&dir.join("probe.gnuplot"), &io::probe_to_gnuplot(result))?;
    println!("{} p={} [{}]", result.kind, result.p, result.method);
    for (band, stat) in result.band_limits.iter().zip(&result.statistics) {
        println!("band {}: {}", half_suffix(*band), stat);
    }
    match result.trend {
        Some(slope) => println!("log-log trend: {slope:+.4}"),
        None => println!("log-log trend: n/a (fewer than three positive points)"),
    }
    Ok(())
}

fn cmd_probe_opnorm(r: &Resolved) -> Result<u8, Failure> {
    let bands = r.bands()?;
    let top = *bands.last().expect("nonempty");
    let sigma = r.symbol_source(top)?;
    r.emit("probe opnorm")?;
    let result = opnorm_lower_bound(&sigma, r.p(), &bands, r.trials(), r.seed())?;
    emit_probe(r, &result)?;
    Ok(0)
}

fn cmd_probe_apriori(r: &Resolved) -> Result<u8, Failure> {
    let bands = r.bands()?;
    let kind_name = Resolved::require(r.0.kind.clone(), "kind")?;
    let kind = match kind_name.to_ascii_lowercase().as_str() {
        "subelliptic" => AprioriKind::SubElliptic,
        "xplusc" => {
            let axis = r.0.axis.unwrap_or(3);
            let c = Complex64::new(
                Resolved::require(r.0.c_re, "c_re")?,
                r.0.c_im.unwrap_or(0.0),
            );
            AprioriKind::XPlusC { axis, c }
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown probe kind '{other}' (expected subelliptic or xplusc)"
            )))
        }
    };
    r.emit("probe apriori")?;
    let result = apriori_ratio(kind, r.p(), &bands, r.trials(), r.seed())?;
    emit_probe(r, &result)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn run(cli: Cli) -> Result<u8, Failure> {
    let file_cfg = match &cli.config {
        Some(path) => RunConfig::parse(&load_text(path)?, path)?,
        None => RunConfig::default(),
    };
    let merged = cli.flag_config()?.over(file_cfg);
    let resolved = Resolved(merged);
    match &cli.command {
        Command::Transform(_) => cmd_transform(&resolved),
        Command::Synthesize(_) => cmd_synthesize(&resolved),
        Command::Check(CheckCommand::Hm { .. }) => cmd_check_hm(&resolved),
        Command::Check(CheckCommand::Class { .. }) => cmd_check_class(&resolved),
        Command::Check(CheckCommand::Noninv { .. }) => cmd_check_noninv(&resolved),
        Command::Zoo(ZooCommand::Symbol { .. }) => cmd_zoo_symbol(&resolved),
        Command::Zoo(ZooCommand::Exceptional { .. }) => cmd_zoo_exceptional(&resolved),
        Command::Zoo(ZooCommand::Parametrix { .. }) => cmd_zoo_parametrix(&resolved),
        Command::Probe(ProbeCommand::Opnorm { .. }) => cmd_probe_opnorm(&resolved),
        Command::Probe(ProbeCommand::Apriori { .. }) => cmd_probe_apriori(&resolved),
    }
}

fn main() -> ExitCode {
    // NONCOMM_FOURIER_THREADS caps the rayon pool for the whole process.
    if let Ok(spec) = std::env::var("NONCOMM_FOURIER_THREADS") {
        match spec.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: NONCOMM_FOURIER_THREADS must be a positive integer, got '{spec}'");
                return ExitCode::from(EXIT_MALFORMED);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { EXIT_MALFORMED as i32 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Malformed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_MALFORMED)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
