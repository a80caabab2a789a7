//! Batch front end: JSON config in, CSV/JSON out.
//!
//! Every subcommand takes `--config FILE`. Output goes to the directory
//! named by `FPL2_OUT_DIR` if set, else `output_dir` from the config, else
//! the working directory. Floats are written with 15 significant digits.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bethe::{self, round15, RootSetRecord, Schedule};
use crate::cft_scaling::{central_charge_closed, fit_scaling, ground_state_series};
use crate::couplings::CouplingSet;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_dense, spectra_match};
use crate::loop_oracle::{arrow_partition_function, loop_partition_function};
use crate::rmatrix::{self, GaugeSet, RepPair, QUOTED_ENTRIES, QUOTED_EXPONENTS};
use crate::transfer::{self, build_sector_block, build_transfer, charge_operator, ChargeVector, Variant};
use crate::C64;

pub const OUT_DIR_ENV: &str = "FPL2_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "fpl2", version, about = "FPL2 loop model workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// R-matrix and transfer-matrix identities; exit 0 iff all pass
    CheckAlgebra(Args),
    /// Sector-resolved transfer-matrix spectra
    Spectrum(Args),
    /// Partition functions from arrows, loops and the transfer matrix
    Oracle(Args),
    /// Bethe roots and eigenvalues
    Bethe {
        #[command(flatten)]
        args: Args,
        /// Root-set JSON to warm-start from
        #[arg(long)]
        seed_from: Option<PathBuf>,
    },
    /// Central-charge fit from Bethe ground states
    Scaling(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BetheMode {
    #[default]
    Ground,
    Sector,
    Continued,
}

/// Parameters shared by all subcommands; each reads the fields it needs.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(default)]
    pub omega_branch: u8,
    pub width: Option<usize>,
    pub rows: Option<usize>,
    /// Charge sectors `(Q1, Q2, Q3)`; all sectors if absent.
    pub sectors: Option<Vec<[i32; 3]>>,
    pub root_counts: Option<[usize; 3]>,
    pub top_k: Option<usize>,
    pub mode: Option<BetheMode>,
    pub tries: Option<usize>,
    pub seed: Option<u64>,
    pub radius: Option<f64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub l_min: Option<usize>,
    pub l_max: Option<usize>,
    pub l_step: Option<usize>,
    #[serde(default)]
    pub with_l3: bool,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        match (cfg.n, cfg.gamma) {
            (Some(_), Some(_)) | (None, None) => return Err(Error::Config("give exactly one of n, gamma".into())),
            _ => {}
        }
        if let Some(t) = cfg.tolerance {
            if !(t > 0.0) {
                return Err(Error::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(cfg)
    }

    pub fn couplings(&self) -> Result<CouplingSet> {
        match (self.n, self.gamma) {
            (Some(n), None) => CouplingSet::from_n(n, self.omega_branch),
            (None, Some(g)) => CouplingSet::from_gamma(g, self.omega_branch),
            _ => Err(Error::Config("give exactly one of n, gamma".into())),
        }
    }

    fn need<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("missing field `{name}`")))
    }

    fn out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::CheckAlgebra(a) => cmd_check_algebra(&load(&a.config)?),
        Command::Spectrum(a) => cmd_spectrum(&load(&a.config)?).map(|_| 0),
        Command::Oracle(a) => cmd_oracle(&load(&a.config)?).map(|_| 0),
        Command::Bethe { args, seed_from } => cmd_bethe(&load(&args.config)?, seed_from.as_deref()).map(|_| 0),
        Command::Scaling(a) => cmd_scaling(&load(&a.config)?).map(|_| 0),
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

/// 15 significant digits, shortest form, no negative zero; scientific
/// notation outside `[1e-4, 1e15)`.
pub fn fmt15(x: f64) -> String {
    let r = round15(x);
    if r == 0.0 {
        "0".into()
    } else if !r.is_finite() || (1e-4..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn write_out(cfg: &RunConfig, name: &str, body: &str) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(name);
    std::fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(path)
}

/// One line of the algebra report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub name: String,
    /// `pass`, `fail`, `skip` or `info`.
    pub status: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckRow {
    fn bound(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let status = if value <= tolerance { "pass" } else { "fail" };
        CheckRow { name: name.into(), status, value, tolerance }
    }

    fn skip(name: impl Into<String>, tolerance: f64) -> Self {
        CheckRow { name: name.into(), status: "skip", value: f64::NAN, tolerance }
    }
}

fn max_norm(m: &nalgebra::DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The identity suite behind `check-algebra`.
pub fn algebra_checks(cpl: &CouplingSet, cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let tol = cfg.tolerance.unwrap_or(1e-10);
    let mut rows = Vec::new();

    for pair in RepPair::ALL {
        let name = format!("projectors_{pair:?}").to_lowercase();
        match rmatrix::projector_pair(pair, cpl) {
            Ok(p) => {
                let e1 = max_norm(&(&p.p_special * &p.p_special - &p.p_special));
                let e2 = max_norm(&(&p.p_special * &p.p_complement));
                rows.push(CheckRow::bound(name, e1.max(e2), 1e-12f64.max(tol * 1e-2)));
            }
            Err(Error::Degenerate(_)) => rows.push(CheckRow::skip(name, tol)),
            Err(e) => return Err(e),
        }
    }

    let quoted = |g: &GaugeSet| {
        let r = rmatrix::loop_r_with(cpl, g);
        QUOTED_ENTRIES
            .iter()
            .zip(QUOTED_EXPONENTS)
            .map(|(&(i, j), (p, q))| (r.entry_1(i, j) - cpl.omega_pow(p) - cpl.omega_pow(q)).norm())
            .fold(0.0, f64::max)
    };
    rows.push(CheckRow::bound("quoted_entries_frozen_gauge", quoted(&GaugeSet::FROZEN), 1e-12));
    let printed = quoted(&GaugeSet::PRINTED);
    rows.push(CheckRow { name: "quoted_entries_printed_gauge".into(), status: "info", value: printed, tolerance: 1e-12 });

    let quantum = eigenvalues_dense(rmatrix::composite_quantum_r(cpl).to_dense())?;
    let c4 = cpl.c_pref.powi(4);
    let gauged = eigenvalues_dense(rmatrix::loop_r(cpl).to_dense() * c4)?;
    let ok = spectra_match(&quantum, &gauged, tol, 1e-6);
    rows.push(CheckRow { name: "gauge_equivalent_spectra".into(), status: if ok { "pass" } else { "fail" }, value: f64::NAN, tolerance: tol });

    let samples = cfg.samples.unwrap_or(5);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(11));
    let mut unit = || C64::from_polar(1.0, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    let pairs: Vec<(C64, C64)> = (0..samples).map(|_| (unit(), unit())).collect();
    match commutator_norm(cpl, &pairs) {
        Ok(v) => rows.push(CheckRow::bound("commuting_family_l2", v, tol)),
        Err(Error::Degenerate(_)) => rows.push(CheckRow::skip("commuting_family_l2", tol)),
        Err(e) => return Err(e),
    }

    for l in 1..=cfg.width.unwrap_or(3).min(3) {
        let v = charge_commutator(cpl, l)?;
        rows.push(CheckRow { name: format!("charge_conservation_l{l}"), status: if v == 0.0 { "pass" } else { "fail" }, value: v, tolerance: 0.0 });
    }
    Ok(rows)
}

/// Largest entry of `[T(x,y), T(x',y')]` over consecutive pairs at L = 2.
pub fn commutator_norm(cpl: &CouplingSet, pairs: &[(C64, C64)]) -> Result<f64> {
    let ts = pairs
        .iter()
        .map(|&p| Ok(build_transfer(2, Variant::TwoRowQuantum(Some(p)), cpl)?.op.to_dense()))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let scale = max_norm(&ts[i]) * max_norm(&ts[j]);
            worst = worst.max(max_norm(&(&ts[i] * &ts[j] - &ts[j] * &ts[i])) / scale.max(1.0));
        }
    }
    Ok(worst)
}

/// Largest entry of `[T, Q_i]` over `i = 1, 2, 3`; exactly zero when the
/// charges are conserved.
pub fn charge_commutator(cpl: &CouplingSet, width: usize) -> Result<f64> {
    let t = build_transfer(width, Variant::TwoRowLoop, cpl)?.op;
    let mut worst = 0.0f64;
    for i in 1..=3 {
        let q = charge_operator(i, width)?;
        worst = worst.max(t.compose(&q)?.max_abs_diff(&q.compose(&t)?));
    }
    Ok(worst)
}

pub fn cmd_check_algebra(cfg: &RunConfig) -> Result<i32> {
    let cpl = cfg.couplings()?;
    let rows = algebra_checks(&cpl, cfg)?;
    let mut out = String::from("check,status,value,tolerance\n");
    for r in &rows {
        let v = if r.value.is_nan() { String::new() } else { fmt15(r.value) };
        let _ = writeln!(out, "{},{},{},{}", r.name, r.status, v, fmt15(r.tolerance));
        println!("[{}] {}", r.status.to_uppercase(), r.name);
    }
    write_out(cfg, "check_algebra.csv", &out)?;
    Ok(if rows.iter().any(|r| r.status == "fail") { 1 } else { 0 })
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    let cpl = cfg.couplings()?;
    let l = cfg.need(cfg.width, "width")?;
    if l > 3 {
        return Err(Error::Domain(format!("spectrum supports L <= 3, got {l}")));
    }
    let sectors: Vec<ChargeVector> = match &cfg.sectors {
        Some(s) => s.iter().map(|&q| ChargeVector(q)).collect(),
        None => transfer::sectors(l),
    };
    let mut out = String::from("q1,q2,q3,m1,m2,m3,dim,index,re,im,modulus\n");
    for sec in sectors {
        let block = build_sector_block(l, Variant::TwoRowLoop, &cpl, sec)?;
        let ev = block.spectrum(cfg.top_k)?;
        let m = sec.0.map(|q| l as i32 - q);
        for (k, z) in ev.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{k},{},{},{}",
                sec.0[0], sec.0[1], sec.0[2], m[0], m[1], m[2], block.dim(), fmt15(z.re), fmt15(z.im), fmt15(z.norm())
            );
        }
    }
    write_out(cfg, "spectrum.csv", &out)?;
    Ok(())
}

/// `tr T^M`, summed over charge sectors.
pub fn trace_power(cpl: &CouplingSet, width: usize, rows: usize) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for sec in transfer::sectors(width) {
        let b = build_sector_block(width, Variant::TwoRowLoop, cpl, sec)?.to_dense();
        let mut p = b.clone();
        for _ in 1..rows {
            p = &p * &b;
        }
        total += p.trace();
    }
    Ok(total)
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<()> {
    let cpl = cfg.couplings()?;
    let l = cfg.need(cfg.width, "width")?;
    let m = cfg.need(cfg.rows, "rows")?;
    if m == 0 {
        return Err(Error::Domain("rows must be positive".into()));
    }
    let za = arrow_partition_function(l, m, &cpl)?;
    let zl = loop_partition_function(l, m, &cpl)?;
    let zt = trace_power(&cpl, l, m)?;
    let rel = |z: C64| (z - zt).norm() / zt.norm().max(f64::MIN_POSITIVE);
    let mut out = String::from("n,L,M,z_arrow_re,z_arrow_im,z_loop_re,z_loop_im,trace_re,trace_im,rel_err_arrow,rel_err_loop\n");
    let _ = writeln!(
        out,
        "{},{l},{m},{},{},{},{},{},{},{},{}",
        fmt15(cpl.n),
        fmt15(za.re),
        fmt15(za.im),
        fmt15(zl.re),
        fmt15(zl.im),
        fmt15(zt.re),
        fmt15(zt.im),
        fmt15(rel(za)),
        fmt15(rel(zl))
    );
    write_out(cfg, "oracle.csv", &out)?;
    Ok(())
}

#[derive(Serialize)]
struct BetheReport {
    n: f64,
    gamma: f64,
    width: usize,
    mode: &'static str,
    solutions: Vec<RootSetRecord>,
}

/// Reads either a bare root-set record or a `bethe` report (first solution).
pub fn read_seed(path: &Path) -> Result<bethe::RootSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let rec = match v.get("solutions") {
        Some(s) => s.get(0).cloned().ok_or_else(|| Error::Config("seed file has no solutions".into()))?,
        None => v,
    };
    let rec: RootSetRecord = serde_json::from_value(rec).map_err(|e| Error::Config(e.to_string()))?;
    rec.to_roots()
}

pub fn cmd_bethe(cfg: &RunConfig, seed_from: Option<&Path>) -> Result<()> {
    let cpl = cfg.couplings()?;
    let l = cfg.need(cfg.width, "width")?;
    let mode = cfg.mode.unwrap_or_default();
    let seed = seed_from.map(read_seed).transpose()?;
    let roots: Vec<bethe::RootSet> = match mode {
        BetheMode::Ground => match seed {
            Some(s) if s.width == l => vec![bethe::solve(&s, &cpl, &Schedule::Direct)?],
            s => vec![bethe::solve_ground_state(&cpl, l, s.as_ref())?],
        },
        BetheMode::Sector => match seed {
            Some(s) => vec![bethe::solve(&s, &cpl, &Schedule::Direct)?],
            None => {
                let m = cfg.need(cfg.root_counts, "root_counts")?;
                let sols = bethe::solve_sector(&cpl, l, m, cfg.tries.unwrap_or(200), cfg.seed.unwrap_or(1))?;
                sols.into_iter().map(|s| s.roots).collect()
            }
        },
        BetheMode::Continued => {
            let (rs, _) = bethe::continued_ground_state(&cpl, l, cfg.radius.unwrap_or(0.5), 400)?;
            vec![rs]
        }
    };
    let solutions = roots.iter().map(RootSetRecord::from_roots).collect::<Result<Vec<_>>>()?;
    let report = BetheReport {
        n: round15(cpl.n),
        gamma: round15(cpl.gamma),
        width: l,
        mode: match mode {
            BetheMode::Ground => "ground",
            BetheMode::Sector => "sector",
            BetheMode::Continued => "continued",
        },
        solutions,
    };
    let mut body = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    body.push('\n');
    write_out(cfg, "bethe.json", &body)?;
    Ok(())
}

pub fn cmd_scaling(cfg: &RunConfig) -> Result<()> {
    let cpl = cfg.couplings()?;
    let (lo, hi, step) = (cfg.l_min.unwrap_or(4), cfg.l_max.unwrap_or(16), cfg.l_step.unwrap_or(2));
    if lo == 0 || step == 0 || hi < lo {
        return Err(Error::Config(format!("bad width range {lo}..={hi} step {step}")));
    }
    let widths: Vec<usize> = (lo..=hi).step_by(step).collect();
    let series = ground_state_series(&cpl, &widths)?;
    let fit = fit_scaling(&series, cfg.with_l3, None)?;
    let closed = central_charge_closed(cpl.gamma)?;
    let mut out = String::from("n,L_min,L_max,f0,c_est,c_closed,abs_err\n");
    let _ = writeln!(
        out,
        "{},{lo},{hi},{},{},{},{}",
        fmt15(cpl.n),
        fmt15(fit.f0),
        fmt15(fit.coefficient),
        fmt15(closed),
        fmt15((fit.coefficient - closed).abs())
    );
    write_out(cfg, "scaling.csv", &out)?;
    let mut s = String::from("L,log_t\n");
    for (l, y) in &series.entries {
        let _ = writeln!(s, "{l},{}", fmt15(*y));
    }
    write_out(cfg, "scaling_series.csv", &s)?;
    Ok(())
}
