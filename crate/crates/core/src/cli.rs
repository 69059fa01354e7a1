//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 numeric domain, 4 singularity.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::coherent::{
    mobius_coherent, mobius_label_value, overlap_bruteforce, overlap_theta, torus_coherent,
    two_mode_coherent, CoherentLabel, Deform, MobiusLabel, TorusLabel, DEFAULT_CUTOFF, MIN_CUTOFF,
};
use crate::diagnostics;
use crate::entangle::{
    apply_d, apply_m_ss, entropy, entropy_bits, gamma_measurement, hs_dimension,
    hs_dimension_dense, ideal_entangled_pair, mobius_pair_ratio, oam_state, parse_op_tag, schmidt,
    torus_mobius_ratio, PairBasis, ProbeSet, Side, DEFAULT_TORUS_WINDOW,
};
use crate::error::Error;
use crate::geometry::{mesh, Mesh, Surface, TorusShape};
use crate::io::{to_json_string, Cell, Envelope, ErrorDoc, Table};
use crate::lattice::{Axis, LatticeState, ModeIndex, Sign};
use crate::mechanics::{
    band_start, equator_circulation, integrate_phi_span, periods_span, Constraint, Trajectory,
};
use crate::two_mode::TwoModeState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "torus-mobius",
    version,
    about = "Coherent and entangled states on torus and Möbius lattices"
)]
pub struct Cli {
    #[command(flatten)]
    pub job: JobConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct JobConfig {
    /// Lattice truncation radius.
    #[arg(long, global = true, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: u32,
    /// Series and comparison tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Output format; meshes and trajectories default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl JobConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.cutoff < MIN_CUTOFF {
            return Err(format!(
                "--cutoff must be >= {MIN_CUTOFF}, got {}",
                self.cutoff
            ));
        }
        if !(self.tol > 0.0) {
            return Err(format!("--tol must be positive, got {}", self.tol));
        }
        Ok(())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a coherent state and list its amplitudes.
    #[command(subcommand)]
    State(StateCmd),
    /// Overlap of two torus coherent states.
    Overlap(OverlapArgs),
    /// Entangling operators and entangled states.
    #[command(subcommand)]
    Entangle(EntangleCmd),
    /// Coherent-state measurements.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Figure data: meshes and trajectories.
    #[command(subcommand)]
    Geom(GeomCmd),
    /// Comparison reports.
    #[command(subcommand)]
    Diag(DiagCmd),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct TorusArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub l1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub l2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a2: f64,
}

impl TorusArgs {
    fn label(&self) -> crate::Result<TorusLabel> {
        Ok([
            CoherentLabel::new(self.l1, self.a1)?,
            CoherentLabel::new(self.l2, self.a2)?,
        ])
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct MobiusArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
}

impl MobiusArgs {
    fn label(&self) -> crate::Result<MobiusLabel> {
        MobiusLabel::new(self.l, self.r, self.phi)
    }
}

#[derive(Debug, Subcommand)]
pub enum StateCmd {
    TorusCs(TorusArgs),
    MobiusCs(MobiusArgs),
    TwoMode {
        #[command(flatten)]
        z: TorusArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lw1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        aw1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lw2: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        aw2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OverlapMethod {
    Brute,
    Theta,
    Both,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[arg(value_enum)]
    pub method: OverlapMethod,
    #[command(flatten)]
    pub z: TorusArgs,
    /// Second label; each component defaults to the first label's.
    #[arg(long, allow_negative_numbers = true)]
    pub lp1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub ap1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lp2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub ap2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    #[value(name = "+1", alias = "plus", alias = "+")]
    Plus,
    #[value(name = "-1", alias = "minus", alias = "-")]
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum EntangleCmd {
    /// `D̂ⁿᵢₖ` on a basis pair.
    DOp {
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        i: u8,
        #[arg(long, default_value_t = 1)]
        k: u8,
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        j: ModeIndex,
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        jp: ModeIndex,
    },
    /// `M̂^{(ss′)}` on a basis pair.
    MSs {
        #[arg(long, value_enum, default_value = "+1", allow_hyphen_values = true)]
        s: SignArg,
        #[arg(long, value_enum, default_value = "-1", allow_hyphen_values = true)]
        sp: SignArg,
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        j: ModeIndex,
        #[arg(long, default_value = "2,0", allow_hyphen_values = true)]
        jp: ModeIndex,
    },
    /// The two-term entangled pair.
    Pair {
        #[arg(long, allow_hyphen_values = true)]
        j: ModeIndex,
        #[arg(long, allow_hyphen_values = true)]
        jp: ModeIndex,
    },
    /// `Σ √λ_l |l⟩|−l⟩` from comma-separated weights for `l = −L..=L`.
    Oam {
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pipeline {
    /// `M̂^{(ss′)}` on a Möbius coherent pair.
    Mobius,
    /// `Ŵ_∩` on a torus ⊗ Möbius coherent product.
    TorusMobius,
}

#[derive(Debug, Subcommand)]
pub enum MeasureCmd {
    /// Default-grid Möbius probes on one factor of the Möbius row pair basis.
    Gamma {
        #[arg(long, value_enum, default_value = "left")]
        side: SideArg,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
    },
    /// `λ = Tr(γρ)/Tr(γρ₀)` on both sides.
    Ratio {
        #[arg(long, value_enum, default_value = "mobius")]
        pipeline: Pipeline,
        #[arg(long, value_enum, default_value = "+1", allow_hyphen_values = true)]
        s: SignArg,
        #[arg(long, value_enum, default_value = "-1", allow_hyphen_values = true)]
        sp: SignArg,
        #[command(flatten)]
        xi: MobiusArgs,
        /// Second Möbius label (mobius pipeline).
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        l2: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        phi2: f64,
        /// Torus label (torus-mobius pipeline), same on both axes.
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        lt: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        at: f64,
        #[arg(long, default_value = "ladder+1")]
        w_torus: String,
        #[arg(long, default_value = "ladder+1")]
        w_mobius: String,
        /// Torus factor window.
        #[arg(long, default_value_t = DEFAULT_TORUS_WINDOW)]
        window: u32,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ShapeArgs {
    #[arg(long = "R", default_value_t = 1.0)]
    pub big_r: f64,
    #[arg(long = "r", default_value_t = 0.5)]
    pub r: f64,
    #[arg(long = "l", default_value_t = 0.0, allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long = "m", default_value_t = 1.0)]
    pub m: f64,
}

impl ShapeArgs {
    fn shape(&self) -> crate::Result<TorusShape> {
        TorusShape::new(self.big_r, self.r, self.l, self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshSurface {
    Torus,
    Mobius,
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathSurface {
    Torus,
    Mobius,
}

#[derive(Debug, Subcommand)]
pub enum GeomCmd {
    Mesh {
        #[arg(long, value_enum, default_value = "torus")]
        surface: MeshSurface,
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 64)]
        n_phi: usize,
        /// `θ` samples on the torus, transverse samples on the strip.
        #[arg(long, default_value_t = 16)]
        n_second: usize,
        /// Transverse deformation `𝒵`.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        deform: f64,
    },
    Trajectory {
        #[arg(long, value_enum, default_value = "torus")]
        surface: PathSurface,
        #[command(flatten)]
        shape: ShapeArgs,
        /// Turns of `φ`.
        #[arg(long, default_value_t = 1.0)]
        periods: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        phi_dot: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum DiagCmd {
    MSemantics {
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        j: ModeIndex,
        #[arg(long, default_value_t = 1)]
        axis: u8,
        #[arg(long, default_value_t = 6)]
        max_power: u32,
    },
    XiFactor {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        l: f64,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 16)]
        n_phi: usize,
    },
    Lagrangian {
        #[command(flatten)]
        shape: ShapeArgs,
    },
    TInvariance {
        #[arg(long, default_value_t = 0.5)]
        r: f64,
    },
    ThetaApprox {
        #[arg(long, default_value_t = 1.0)]
        max_log: f64,
        #[arg(long, default_value_t = 40)]
        n: usize,
    },
    Embedding {
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        l: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

enum Output {
    Json(Envelope),
    Csv(Table),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Contract(m) => Failure::Usage(m),
            other => Failure::Numeric(other),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Singular(_) => EXIT_SINGULAR,
        Error::Contract(_) => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

/// Runs the CLI with process stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI writing to the given streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let doc = ErrorDoc::new("usage", e.to_string().trim_end(), EXIT_USAGE);
            let _ = writeln!(err, "{}", to_json_string(&doc).unwrap_or_default());
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(output) => match emit(&cli.job, output, out) {
            Ok(()) => EXIT_OK,
            Err(msg) => report(err, ErrorDoc::new("io", msg, EXIT_USAGE)),
        },
        Err(Failure::Usage(msg)) => report(err, ErrorDoc::new("usage", msg, EXIT_USAGE)),
        Err(Failure::Numeric(e)) => {
            let code = exit_code(&e);
            report(err, ErrorDoc::from_error(&e, code))
        }
    }
}

fn report(err: &mut dyn Write, doc: ErrorDoc) -> i32 {
    let _ = writeln!(err, "{}", to_json_string(&doc).unwrap_or_default());
    doc.exit_code
}

fn emit(job: &JobConfig, output: Output, out: &mut dyn Write) -> Result<(), String> {
    let text = match output {
        Output::Json(env) => to_json_string(&env).map_err(|e| e.to_string())? + "\n",
        Output::Csv(t) => t.to_csv().map_err(|e| e.to_string())?,
    };
    match &job.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn lattice_amplitudes(s: &LatticeState) -> Value {
    Value::Array(
        s.iter()
            .map(|(j, a)| json!({"j": [j.j1, j.j2], "amp": to_value(&a)}))
            .collect(),
    )
}

fn pair_amplitudes(s: &TwoModeState) -> Value {
    Value::Array(
        s.iter()
            .map(|((j, k), a)| json!({"j": [j.j1, j.j2], "jp": [k.j1, k.j2], "amp": to_value(&a)}))
            .collect(),
    )
}

fn lattice_table(s: &LatticeState) -> Table {
    let mut t = Table::new(&["j1", "j2", "re", "im"]);
    for (j, a) in s.iter() {
        t.push(vec![j.j1.into(), j.j2.into(), a.re.into(), a.im.into()]);
    }
    t
}

fn pair_table(s: &TwoModeState) -> Table {
    let mut t = Table::new(&["j1", "j2", "jp1", "jp2", "re", "im"]);
    for ((j, k), a) in s.iter() {
        t.push(vec![
            j.j1.into(),
            j.j2.into(),
            k.j1.into(),
            k.j2.into(),
            a.re.into(),
            a.im.into(),
        ]);
    }
    t
}

fn wants_csv(job: &JobConfig) -> bool {
    job.format == Some(Format::Csv)
}

fn entanglement_summary(st: &TwoModeState) -> crate::Result<Value> {
    let sv = schmidt(st);
    Ok(json!({
        "schmidt": sv,
        "schmidt_rank": sv.iter().filter(|v| **v > 0.0).count(),
        "entropy": entropy(&sv)?,
        "entropy_bits": entropy_bits(&sv)?,
    }))
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    let job = &cli.job;
    job.validate().map_err(Failure::Usage)?;
    let cutoff = job.cutoff;
    match &cli.command {
        Command::State(cmd) => {
            let (kind, params, lattice, pair) = match cmd {
                StateCmd::TorusCs(z) => {
                    let s = torus_coherent(&z.label()?, cutoff)?;
                    (
                        "state/torus-cs",
                        json!({"l1": z.l1, "a1": z.a1, "l2": z.l2, "a2": z.a2, "cutoff": cutoff}),
                        Some(s),
                        None,
                    )
                }
                StateCmd::MobiusCs(m) => {
                    let lbl = m.label()?;
                    let s = mobius_coherent(&lbl, cutoff)?;
                    let params = json!({"l": m.l, "r": m.r, "phi": m.phi, "cutoff": cutoff, "xi": to_value(&mobius_label_value(&lbl))});
                    ("state/mobius-cs", params, Some(s), None)
                }
                StateCmd::TwoMode {
                    z,
                    lw1,
                    aw1,
                    lw2,
                    aw2,
                } => {
                    let w = [
                        CoherentLabel::new(*lw1, *aw1)?,
                        CoherentLabel::new(*lw2, *aw2)?,
                    ];
                    let s = two_mode_coherent(&z.label()?, &w, cutoff)?;
                    let params = json!({"l1": z.l1, "a1": z.a1, "l2": z.l2, "a2": z.a2,
                        "lw1": lw1, "aw1": aw1, "lw2": lw2, "aw2": aw2, "cutoff": cutoff});
                    ("state/two-mode", params, None, Some(s))
                }
            };
            if wants_csv(job) {
                return Ok(Output::Csv(match (&lattice, &pair) {
                    (Some(s), _) => lattice_table(s),
                    (_, Some(p)) => pair_table(p),
                    _ => unreachable!(),
                }));
            }
            let (amps, norm, len) = match (&lattice, &pair) {
                (Some(s), _) => (lattice_amplitudes(s), s.norm(), s.len()),
                (_, Some(p)) => (pair_amplitudes(p), p.norm(), p.len()),
                _ => unreachable!(),
            };
            Ok(Output::Json(Envelope::new(
                kind,
                params,
                json!({"amplitudes": amps}),
                json!({"norm": norm, "terms": len}),
            )))
        }
        Command::Overlap(o) => {
            let z = o.z.label()?;
            let zp = TorusArgs {
                l1: o.lp1.unwrap_or(o.z.l1),
                a1: o.ap1.unwrap_or(o.z.a1),
                l2: o.lp2.unwrap_or(o.z.l2),
                a2: o.ap2.unwrap_or(o.z.a2),
            };
            let z2 = zp.label()?;
            let mut result = serde_json::Map::new();
            let mut brute = None;
            let mut theta = None;
            if o.method != OverlapMethod::Theta {
                let b = overlap_bruteforce(
                    &torus_coherent(&z, cutoff)?,
                    &torus_coherent(&z2, cutoff)?,
                )?;
                result.insert("brute".into(), to_value(&b));
                brute = Some(b);
            }
            if o.method != OverlapMethod::Brute {
                let t = overlap_theta(&z, &z2)?;
                result.insert("theta".into(), to_value(&t));
                theta = Some(t);
            }
            let diagnostics = match (brute, theta) {
                (Some(b), Some(t)) => {
                    let d = (b - t).norm();
                    json!({"difference": d, "agree": d <= job.tol * b.norm().max(1.0)})
                }
                _ => json!({}),
            };
            let params = json!({"z": [o.z.l1, o.z.a1, o.z.l2, o.z.a2], "zp": [zp.l1, zp.a1, zp.l2, zp.a2], "cutoff": cutoff});
            Ok(Output::Json(Envelope::new(
                "overlap",
                params,
                Value::Object(result),
                diagnostics,
            )))
        }
        Command::Entangle(cmd) => entangle(cmd, cutoff, job),
        Command::Measure(cmd) => measure(cmd, cutoff),
        Command::Geom(cmd) => geom(cmd, job),
        Command::Diag(cmd) => diag(cmd, cutoff),
    }
}

fn basis_pair(j: ModeIndex, jp: ModeIndex, cutoff: u32) -> crate::Result<TwoModeState> {
    TwoModeState::from_amplitudes((cutoff, cutoff), [((j, jp), Complex64::new(1.0, 0.0))])
}

fn entangle(cmd: &EntangleCmd, cutoff: u32, job: &JobConfig) -> Result<Output, Failure> {
    let (kind, params, st) = match cmd {
        EntangleCmd::DOp { n, i, k, j, jp } => {
            let (ai, ak) = (Axis::from_number(*i)?, Axis::from_number(*k)?);
            let st = apply_d(*n, ai, ak, &basis_pair(*j, *jp, cutoff)?)?;
            (
                "entangle/d-op",
                json!({"n": n, "i": i, "k": k, "j": [j.j1, j.j2], "jp": [jp.j1, jp.j2]}),
                st,
            )
        }
        EntangleCmd::MSs { s, sp, j, jp } => {
            let st = apply_m_ss((*s).into(), (*sp).into(), &basis_pair(*j, *jp, cutoff)?)?;
            let sign = |x: &SignArg| if *x == SignArg::Plus { 1 } else { -1 };
            (
                "entangle/m-ss",
                json!({"s": sign(s), "sp": sign(sp), "j": [j.j1, j.j2], "jp": [jp.j1, jp.j2]}),
                st,
            )
        }
        EntangleCmd::Pair { j, jp } => {
            let st = ideal_entangled_pair(*j, *jp, cutoff)?;
            (
                "entangle/pair",
                json!({"j": [j.j1, j.j2], "jp": [jp.j1, jp.j2]}),
                st,
            )
        }
        EntangleCmd::Oam { weights } => {
            let st = oam_state(weights)?;
            ("entangle/oam", json!({"weights": weights}), st)
        }
    };
    if wants_csv(job) {
        return Ok(Output::Csv(pair_table(&st)));
    }
    let mut result = entanglement_summary(&st)?;
    result["state"] = pair_amplitudes(&st);
    let mut params = params;
    params["cutoff"] = json!(cutoff);
    Ok(Output::Json(Envelope::new(
        kind,
        params,
        result,
        json!({"norm": st.norm(), "dropped_norm": st.dropped_norm()}),
    )))
}

fn measure(cmd: &MeasureCmd, cutoff: u32) -> Result<Output, Failure> {
    match cmd {
        MeasureCmd::Gamma { side, r } => {
            let row: Vec<ModeIndex> = (-(cutoff as i64)..=cutoff as i64)
                .map(|j| ModeIndex::new(j, 0))
                .collect();
            let basis = PairBasis {
                first: row.clone(),
                second: row,
            };
            let probes = ProbeSet::default_mobius(*r)?;
            let s = match side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            let g = gamma_measurement(s, &probes, &basis, cutoff)?;
            let other = gamma_measurement(
                match s {
                    Side::Left => Side::Right,
                    Side::Right => Side::Left,
                },
                &probes,
                &basis,
                cutoff,
            )?;
            let gram: Vec<Vec<Value>> = (0..g.gram.nrows())
                .map(|a| {
                    (0..g.gram.ncols())
                        .map(|b| to_value(&g.gram[(a, b)]))
                        .collect()
                })
                .collect();
            let result = json!({
                "dim": g.dim(),
                "probes": probes.probes.len(),
                "hs_dimension": hs_dimension(&g),
                "hs_dimension_other_side": hs_dimension(&other),
                "gram": gram,
            });
            let diagnostics = json!({"hs_dimension_dense": hs_dimension_dense(&g)});
            Ok(Output::Json(Envelope::new(
                "measure/gamma",
                json!({"side": format!("{side:?}").to_lowercase(), "r": r, "cutoff": cutoff}),
                result,
                diagnostics,
            )))
        }
        MeasureCmd::Ratio {
            pipeline,
            s,
            sp,
            xi,
            l2,
            phi2,
            lt,
            at,
            w_torus,
            w_mobius,
            window,
        } => {
            let lbl = xi.label()?;
            let (kind, params, rep) = match pipeline {
                Pipeline::Mobius => {
                    let lbl2 = MobiusLabel::new(*l2, xi.r, *phi2)?;
                    let rep = mobius_pair_ratio((*s).into(), (*sp).into(), &lbl, &lbl2, cutoff)?;
                    let sign = |x: &SignArg| if *x == SignArg::Plus { 1 } else { -1 };
                    let params = json!({"s": sign(s), "sp": sign(sp), "xi": [xi.l, xi.r, xi.phi], "xi2": [l2, xi.r, phi2], "cutoff": cutoff});
                    ("measure/ratio/mobius", params, rep)
                }
                Pipeline::TorusMobius => {
                    let (wt, wm) = (parse_op_tag(w_torus)?, parse_op_tag(w_mobius)?);
                    let a = CoherentLabel::new(*lt, *at)?;
                    let rep = torus_mobius_ratio(wt, wm, &[a, a], &lbl, cutoff, *window)?;
                    let params = json!({"w_torus": wt.to_string(), "w_mobius": wm.to_string(), "torus": [lt, at],
                        "xi": [xi.l, xi.r, xi.phi], "cutoff": cutoff, "window": window});
                    ("measure/ratio/torus-mobius", params, rep)
                }
            };
            Ok(Output::Json(Envelope::new(
                kind,
                params,
                to_value(&rep),
                json!({"probe_grid": {"phases": 8, "l": [-0.5, 0.0, 0.5]}}),
            )))
        }
    }
}

fn mesh_rows(t: &mut Table, m: &Mesh, with_surface: bool) {
    for v in &m.vertices {
        let mut row: Vec<Cell> = Vec::new();
        if with_surface {
            row.push(m.surface.name().into());
        }
        row.extend(v.iter().map(|x| Cell::Float(*x)));
        t.push(row);
    }
}

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut t = Table::new(&["t", "x", "y", "z", "energy"]);
    for s in &tr.samples {
        t.push(vec![
            s.t.into(),
            s.position[0].into(),
            s.position[1].into(),
            s.position[2].into(),
            s.energy.into(),
        ]);
    }
    t
}

fn geom(cmd: &GeomCmd, job: &JobConfig) -> Result<Output, Failure> {
    match cmd {
        GeomCmd::Mesh {
            surface,
            shape,
            n_phi,
            n_second,
            deform,
        } => {
            let sh = shape.shape()?;
            let build = |s: Surface| -> crate::Result<Mesh> {
                Ok(mesh(s, &sh, *n_phi, *n_second)?.deformed(*deform))
            };
            let meshes = match surface {
                MeshSurface::Torus => vec![build(Surface::Torus)?],
                MeshSurface::Mobius => vec![build(Surface::Mobius)?],
                MeshSurface::Intersection => vec![build(Surface::Torus)?, build(Surface::Mobius)?],
            };
            if job.format == Some(Format::Json) {
                let params = json!({"surface": format!("{surface:?}").to_lowercase(), "shape": to_value(&sh),
                    "n_phi": n_phi, "n_second": n_second, "deform": deform});
                let diagnostics =
                    json!({"strip_offset": "linear in [-r, r] along the normal section"});
                return Ok(Output::Json(Envelope::new(
                    "geom/mesh",
                    params,
                    to_value(&meshes),
                    diagnostics,
                )));
            }
            let table = if meshes.len() == 1 {
                let mut t = Table::new(&meshes[0].header());
                mesh_rows(&mut t, &meshes[0], false);
                t
            } else {
                let mut t = Table::new(&["surface", "phi", "param", "x", "y", "z"]);
                for m in &meshes {
                    mesh_rows(&mut t, m, true);
                }
                t
            };
            Ok(Output::Csv(table))
        }
        GeomCmd::Trajectory {
            surface,
            shape,
            periods,
            dt,
            phi_dot,
        } => {
            let sh = shape.shape()?;
            let (constraint, start) = match surface {
                PathSurface::Torus => (Constraint::None, equator_circulation(&sh, *phi_dot)),
                PathSurface::Mobius => (Constraint::Mobius, band_start(&sh, *phi_dot)),
            };
            let tr = integrate_phi_span(&sh, constraint, &start, *dt, periods_span(*periods))?;
            if job.format == Some(Format::Json) {
                let params = json!({"surface": format!("{surface:?}").to_lowercase(), "shape": to_value(&sh),
                    "periods": periods, "dt": dt, "phi_dot": phi_dot});
                let diagnostics = json!({"closure_gap": tr.closure_gap(), "energy_drift": tr.energy_drift(), "error": tr.error});
                return Ok(Output::Json(Envelope::new(
                    "geom/trajectory",
                    params,
                    to_value(&tr.samples),
                    diagnostics,
                )));
            }
            Ok(Output::Csv(trajectory_table(&tr)))
        }
    }
}

fn diag(cmd: &DiagCmd, cutoff: u32) -> Result<Output, Failure> {
    let (kind, params, result) = match cmd {
        DiagCmd::MSemantics { j, axis, max_power } => {
            let ax = Axis::from_number(*axis)?;
            let c = cutoff.max(j.radius() as u32 + *max_power + 1);
            let rep = diagnostics::m_semantics(*j, ax, *max_power, c)?;
            (
                "diag/m-semantics",
                json!({"j": [j.j1, j.j2], "axis": axis, "max_power": max_power, "cutoff": c}),
                to_value(&rep),
            )
        }
        DiagCmd::XiFactor { l, r, n_phi } => {
            let rep = diagnostics::xi_factor(*l, *r, *n_phi, cutoff)?;
            (
                "diag/xi-factor",
                json!({"l": l, "r": r, "n_phi": n_phi, "cutoff": cutoff}),
                to_value(&rep),
            )
        }
        DiagCmd::Lagrangian { shape } => {
            let sh = shape.shape()?;
            (
                "diag/lagrangian",
                json!({"shape": to_value(&sh)}),
                to_value(&diagnostics::lagrangian_table(&sh)?),
            )
        }
        DiagCmd::TInvariance { r } => {
            let mut labels = Vec::new();
            for l in [-0.5, 0.0, 0.5, (1.0 + r).ln()] {
                for phi in [0.0, 1.0, std::f64::consts::PI, 5.0] {
                    labels.push(MobiusLabel::new(l, *r, phi)?);
                }
            }
            let rows = diagnostics::t_invariance(&labels, cutoff)?;
            (
                "diag/t-invariance",
                json!({"r": r, "cutoff": cutoff}),
                to_value(&rows),
            )
        }
        DiagCmd::ThetaApprox { max_log, n } => {
            let curve = diagnostics::theta_approx_curve(*max_log, (*n).max(1))?;
            let worst = curve
                .iter()
                .map(|p| p.relative_error.abs())
                .fold(0.0, f64::max);
            (
                "diag/theta-approx",
                json!({"max_log": max_log, "n": n}),
                json!({"curve": to_value(&curve), "max_relative_error": worst}),
            )
        }
        DiagCmd::Embedding { r, l, samples } => {
            let rep = diagnostics::embedding_consistency(*r, *l, (*samples).max(1));
            (
                "diag/embedding",
                json!({"r": r, "l": l, "samples": samples}),
                to_value(&rep),
            )
        }
    };
    Ok(Output::Json(Envelope::new(kind, params, result, json!({}))))
}
