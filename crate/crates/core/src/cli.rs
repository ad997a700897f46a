//! Batch front end: JSON run configs, command dispatch and JSON-lines reports.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bethe::{
    apply_constraints, constraint_residuals, find_solutions, gauge_offdiagonal, require_constraints, spectrum_match, verify_solution, Branch,
    BoundaryConstraint, SolverOptions, CONSTRAINT_TOL,
};
use crate::error::{Error, Result};
use crate::params::{ModelParams, Sampler};
use crate::partition::{partition_report, z_single_site, PartitionInput, PartitionKind};
use crate::residual::ResidualReport;
use crate::sos::{sos_identity_suite, DynParams, SosCheck};
use crate::tensor::eigenvalues;
use crate::vertex::{hamiltonian, hamiltonian_direct, hamiltonian_suite, vertex_identity_suite, HamiltonianMode, VertexCheck, HAMILTONIAN_COMMUTATOR_TOL, HAMILTONIAN_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;
pub const EXIT_NO_CONVERGENCE: i32 = 5;

/// Largest chain the `spectrum` command diagonalizes.
pub const SPECTRUM_MAX_N: usize = 8;

#[derive(Parser, Debug, Clone)]
#[command(name = "bethe-sos", version, about = "Identity checks, Bethe states and partition functions for the open XXZ / SOS pair")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run config; complex numbers as [re, im].
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Multiplies every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of sites (overrides the config).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Seed for sampled parameters and spectral points (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Run the identity suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Solve the Bethe equations for one family and verify the eigenstates.
    Bethe {
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long)]
        m: Option<usize>,
        /// Derive the barred boundary parameters from the constraints.
        #[arg(long)]
        constrained: bool,
    },
    /// Match Bethe eigenvalues against the dense transfer matrix and Hamiltonian spectra.
    Spectrum {
        #[arg(long)]
        constrained: bool,
    },
    /// Domain-wall partition functions.
    Partition {
        #[arg(long, value_enum, default_value_t = KindArg::Bminus)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Vertex,
    Sos,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchArg {
    B1,
    B2,
    P1,
    P2,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::B1 => Branch::Bminus1,
            BranchArg::B2 => Branch::Bminus2,
            BranchArg::P1 => Branch::Bplus1,
            BranchArg::P2 => Branch::Bplus2,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    Bminus,
    Cminus,
    Bplus,
    Cplus,
}

impl From<KindArg> for PartitionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Bminus => PartitionKind::Bminus,
            KindArg::Cminus => PartitionKind::Cminus,
            KindArg::Bplus => PartitionKind::Bplus,
            KindArg::Cplus => PartitionKind::Cplus,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Det,
    Contract,
    Both,
}

#[derive(Deserialize, Serialize, Debug, Clone, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub pole: Option<f64>,
    pub identity: Option<f64>,
    pub bethe: Option<f64>,
    pub partition: Option<f64>,
}

/// Run configuration. Every field is optional; unset couplings are drawn from the seed.
#[derive(Deserialize, Serialize, Debug, Clone, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N", alias = "n")]
    pub n: Option<usize>,
    pub eta: Option<C64>,
    pub xi: Option<Vec<C64>>,
    pub delta: Option<C64>,
    pub zeta: Option<C64>,
    pub tau: Option<C64>,
    pub delta_bar: Option<C64>,
    pub zeta_bar: Option<C64>,
    pub tau_bar: Option<C64>,
    /// Set all ξ to zero.
    pub homogeneous: Option<bool>,
    /// Free dynamical parameters for the SOS suite.
    pub theta: Option<C64>,
    pub omega: Option<C64>,
    /// Spectral parameters for `partition`.
    pub lambdas: Option<Vec<C64>>,
    pub sector_s: Option<i32>,
    pub constraint_n: Option<i32>,
    pub constraint_m: Option<i32>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub starts: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// One row of a report.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Row {
    pub check: String,
    pub trial: usize,
    pub params_digest: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Summary {
    pub summary: bool,
    pub command: String,
    pub config: Value,
    pub checks: usize,
    pub passed: usize,
    pub all_pass: bool,
    pub data: Value,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.summary.all_pass {
            EXIT_OK
        } else {
            EXIT_TOLERANCE
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DegenerateParameter { .. } | Error::SingularPrefactor(_) | Error::FormMismatch(_) => EXIT_DEGENERATE,
        Error::NoConvergence { .. } | Error::CollapsedRoots(_) | Error::NullState(_) => EXIT_NO_CONVERGENCE,
        Error::NonIdentityResidue(_) => EXIT_TOLERANCE,
        Error::UnknownLeg(_) | Error::Layout(_) | Error::NotHomogeneous | Error::BadSector(_) | Error::ConstraintViolated(_) | Error::Config(_) => EXIT_CONFIG,
    }
}

/// Short hex digest of a JSON value.
pub fn digest(v: &Value) -> String {
    let bytes = Sha256::digest(v.to_string().as_bytes());
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Sampled couplings with the config's explicit values laid over them.
pub fn resolve_params(cfg: &RunConfig, n_flag: Option<usize>, seed: u64) -> Result<ModelParams> {
    let n = n_flag.or(cfg.n).unwrap_or(2);
    if n == 0 {
        return Err(Error::Config("N must be at least 1".into()));
    }
    let mut p = ModelParams::random(n, &mut Sampler::new(seed));
    let set = |slot: &mut C64, v: Option<C64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut p.eta, cfg.eta);
    set(&mut p.delta, cfg.delta);
    set(&mut p.zeta, cfg.zeta);
    set(&mut p.tau, cfg.tau);
    set(&mut p.delta_bar, cfg.delta_bar);
    set(&mut p.zeta_bar, cfg.zeta_bar);
    set(&mut p.tau_bar, cfg.tau_bar);
    if let Some(xi) = &cfg.xi {
        if xi.len() != n {
            return Err(Error::Config(format!("xi has {} entries for N = {n}", xi.len())));
        }
        p.xi = xi.clone();
    }
    if cfg.homogeneous == Some(true) {
        p = p.homogeneous();
    }
    if let Some(eps) = cfg.tolerances.pole {
        p.pole_eps = eps;
    }
    p.validate()?;
    Ok(p)
}

struct Ctx {
    rows: Vec<Row>,
    digest: String,
    scale: f64,
}

impl Ctx {
    fn push(&mut self, check: &str, trial: usize, residual: f64, tolerance: f64) {
        let tolerance = tolerance * self.scale;
        let pass = residual.is_finite() && residual < tolerance;
        self.rows.push(Row { check: check.to_string(), trial, params_digest: self.digest.clone(), residual, tolerance, pass });
    }

    fn push_report(&mut self, r: &ResidualReport, tolerance: f64) {
        for (i, &x) in r.residuals.iter().enumerate() {
            self.push(&r.check, i, x, tolerance);
        }
    }
}

fn cplx(z: C64) -> Value {
    json!([z.re, z.im])
}

fn cplx_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| cplx(*z)).collect())
}

/// Execute one command. Rows come back sorted by (check, trial).
pub fn run(cli: &Cli) -> Result<Report> {
    let start = std::time::Instant::now();
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if !(cli.tol_scale > 0.0) || !cli.tol_scale.is_finite() {
        return Err(Error::Config("--tol-scale must be positive".into()));
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let mut p = resolve_params(&cfg, cli.n, seed)?;
    let (name, echo_extra, data, rows) = match &cli.command {
        Command::Verify { suite } => {
            let echo = json!({ "suite": suite });
            let mut ctx = Ctx { rows: Vec::new(), digest: digest(&json!([p, echo])), scale: cli.tol_scale };
            let data = cmd_verify(&mut ctx, &cfg, &p, *suite, seed)?;
            ("verify", echo, data, ctx.rows)
        }
        Command::Bethe { branch, m, constrained } => {
            let branch = Branch::from(*branch);
            let (s, m) = sector_and_roots(&cfg, &p, branch, *m)?;
            p = bind(&cfg, &p, s, *constrained)?;
            let echo = json!({ "branch": branch.tag(), "m": m, "sector_s": s, "constrained": constrained });
            let mut ctx = Ctx { rows: Vec::new(), digest: digest(&json!([p, echo])), scale: cli.tol_scale };
            let data = cmd_bethe(&mut ctx, &cfg, &p, branch, m, seed)?;
            ("bethe", echo, data, ctx.rows)
        }
        Command::Spectrum { constrained } => {
            if p.n > SPECTRUM_MAX_N {
                return Err(Error::Config(format!("spectrum needs N <= {SPECTRUM_MAX_N}")));
            }
            let s = cfg.sector_s.unwrap_or((p.n % 2) as i32);
            p = bind(&cfg, &p, s, *constrained)?;
            let echo = json!({ "sector_s": s, "constrained": constrained });
            let mut ctx = Ctx { rows: Vec::new(), digest: digest(&json!([p, echo])), scale: cli.tol_scale };
            let data = cmd_spectrum(&mut ctx, &cfg, &p, s, seed)?;
            ("spectrum", echo, data, ctx.rows)
        }
        Command::Partition { kind, method } => {
            let kind = PartitionKind::from(*kind);
            let lambdas = match &cfg.lambdas {
                Some(l) => l.clone(),
                None => Sampler::new(seed ^ 0x9e37_79b9).points(p.n),
            };
            let input = PartitionInput::new(kind, lambdas, p.clone())?;
            let echo = json!({ "kind": kind, "method": method, "lambdas": cplx_list(&input.lambdas) });
            let mut ctx = Ctx { rows: Vec::new(), digest: digest(&json!([p, echo])), scale: cli.tol_scale };
            let data = cmd_partition(&mut ctx, &cfg, &input, *method, seed)?;
            ("partition", echo, data, ctx.rows)
        }
    };
    let mut rows = rows;
    rows.sort_by(|a, b| a.check.cmp(&b.check).then(a.trial.cmp(&b.trial)));
    let passed = rows.iter().filter(|r| r.pass).count();
    let summary = Summary {
        summary: true,
        command: name.to_string(),
        config: json!({ "params": p, "seed": seed, "tol_scale": cli.tol_scale, "options": echo_extra, "file": cfg }),
        checks: rows.len(),
        passed,
        all_pass: passed == rows.len(),
        data,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(Report { rows, summary })
}

fn sector_and_roots(cfg: &RunConfig, p: &ModelParams, branch: Branch, m: Option<usize>) -> Result<(i32, usize)> {
    match (m, cfg.sector_s) {
        (Some(m), Some(s)) => {
            if branch.roots_for_sector(p.n, s)? != m {
                return Err(Error::Config(format!("--m {m} does not reach sector {s} for {}", branch.tag())));
            }
            Ok((s, m))
        }
        (Some(m), None) => Ok((branch.sector(p.n, m), m)),
        (None, s) => {
            let s = s.unwrap_or((p.n % 2) as i32);
            Ok((s, branch.roots_for_sector(p.n, s)?))
        }
    }
}

fn bind(cfg: &RunConfig, p: &ModelParams, s: i32, constrained: bool) -> Result<ModelParams> {
    let c = BoundaryConstraint::new(s, cfg.constraint_n.unwrap_or(0), cfg.constraint_m.unwrap_or(0));
    c.check(p.n)?;
    if constrained {
        apply_constraints(p, &c)
    } else {
        require_constraints(p, s)?;
        Ok(p.clone())
    }
}

fn cmd_verify(ctx: &mut Ctx, cfg: &RunConfig, p: &ModelParams, suite: Suite, seed: u64) -> Result<Value> {
    let trials = cfg.trials.unwrap_or(20);
    let override_tol = cfg.tolerances.identity;
    let mut counts = serde_json::Map::new();
    if matches!(suite, Suite::Vertex | Suite::All) {
        for (k, check) in VertexCheck::ALL.into_iter().enumerate() {
            let r = vertex_identity_suite(check, p, seed.wrapping_add(k as u64), trials)?;
            ctx.push_report(&r, override_tol.unwrap_or(check.tolerance()));
        }
        if p.is_homogeneous() {
            let reps = hamiltonian_suite(p, seed, 5)?;
            ctx.push_report(&reps[0], HAMILTONIAN_TOL);
            ctx.push_report(&reps[1], HAMILTONIAN_COMMUTATOR_TOL);
        }
        counts.insert("vertex".into(), json!(VertexCheck::ALL.len()));
    }
    if matches!(suite, Suite::Sos | Suite::All) {
        let mut sampler = Sampler::new(seed ^ 0x5eed);
        let theta = cfg.theta.unwrap_or_else(|| sampler.point_where(|t| p.check_dynamical(t).is_ok()));
        let omega = cfg.omega.unwrap_or_else(|| sampler.point());
        let d = DynParams { theta, theta_bar: p.theta_bar(), omega };
        for (k, check) in SosCheck::ALL.into_iter().enumerate() {
            let r = sos_identity_suite(check, p, &d, seed.wrapping_add(100 + k as u64), trials)?;
            ctx.push_report(&r, override_tol.unwrap_or(check.tolerance()));
        }
        counts.insert("sos".into(), json!(SosCheck::ALL.len()));
        counts.insert("theta".into(), cplx(theta));
        counts.insert("omega".into(), cplx(omega));
    }
    counts.insert("trials".into(), json!(trials));
    Ok(Value::Object(counts))
}

const CHECK_EQUATIONS: &str = "bethe.equations";

fn cmd_bethe(ctx: &mut Ctx, cfg: &RunConfig, p: &ModelParams, branch: Branch, m: usize, seed: u64) -> Result<Value> {
    let tol = cfg.tolerances.bethe.unwrap_or(1e-8);
    let opts = SolverOptions::default();
    let starts = cfg.starts.unwrap_or(if m == 1 { 64 } else { 200 });
    let sols = find_solutions(branch, m, p, seed, starts, &opts)?;
    if sols.is_empty() {
        return Err(Error::NoConvergence { iterations: starts, residual: f64::NAN });
    }
    let mut sampler = Sampler::new(seed.wrapping_add(1));
    let mus: Vec<C64> = (0..3).map(|_| sampler.spectral(p)).collect();
    let s = sols[0].sector;
    let cr = constraint_residuals(p, s);
    ctx.push("bethe.constraints", 0, cr[0].max(cr[1]), CONSTRAINT_TOL);
    ctx.push("bethe.gauge_offdiagonal", 0, gauge_offdiagonal(mus[0], p, s), 1e-10);
    let mut out = Vec::new();
    for (i, sol) in sols.iter().enumerate() {
        let v = verify_solution(sol, p, &mus)?;
        ctx.push(CHECK_EQUATIONS, i, sol.max_residual(), opts.tol);
        ctx.push("bethe.sos_eigen", i, v.sos_residuals.iter().copied().fold(0.0, f64::max), tol);
        ctx.push("bethe.vertex_eigen", i, v.vertex_residuals.iter().copied().fold(0.0, f64::max), tol);
        ctx.push("bethe.dense_match", i, v.dense_match, tol);
        let energy = v.energy.map(|[e, rq, kappa]| {
            ctx.push("bethe.energy", i, (e - rq - kappa).norm() / e.norm().max(1e-300), tol);
            json!({ "energy": cplx(e), "rayleigh": cplx(rq), "kappa": cplx(kappa) })
        });
        out.push(json!({
            "roots": cplx_list(&sol.roots),
            "residuals": sol.residuals,
            "mu": cplx_list(&mus),
            "eigenvalues": cplx_list(&v.eigenvalues),
            "energy": energy,
        }));
    }
    Ok(json!({
        "branch": branch.tag(),
        "m": m,
        "sector_s": s,
        "eigenvalue": format!("{:?}", branch.eigenvalue_kind()),
        "gauge_binding": if branch.is_minus() { "theta" } else { "theta_bar" },
        "solutions": out,
    }))
}

fn cmd_spectrum(ctx: &mut Ctx, cfg: &RunConfig, p: &ModelParams, s: i32, seed: u64) -> Result<Value> {
    let tol = cfg.tolerances.bethe.unwrap_or(1e-8);
    let opts = SolverOptions::default();
    let mut sampler = Sampler::new(seed.wrapping_add(1));
    let mus: Vec<C64> = (0..3).map(|_| sampler.spectral(p)).collect();
    let mut verified = Vec::new();
    let mut per_branch = serde_json::Map::new();
    for branch in Branch::ALL {
        let m = branch.roots_for_sector(p.n, s)?;
        let starts = cfg.starts.unwrap_or(if m == 1 { 64 } else { 200 });
        let sols = find_solutions(branch, m, p, seed, starts, &opts)?;
        let mut kept = 0;
        for sol in sols {
            if verify_solution(&sol, p, &mus).map(|v| v.worst() < tol).unwrap_or(false) {
                verified.push(sol);
                kept += 1;
            }
        }
        per_branch.insert(branch.tag().into(), json!({ "m": m, "verified": kept }));
    }
    let sm = spectrum_match(p, &verified, mus[0], tol)?;
    for (i, (_, _, lam)) in sm.bethe.iter().enumerate() {
        let d = sm.dense.iter().map(|z| (z - lam).norm() / lam.norm().max(1e-300)).fold(f64::INFINITY, f64::min);
        ctx.push("spectrum.transfer_match", i, d, tol);
    }
    let mut h_matched = Value::Null;
    if p.is_homogeneous() {
        let h = hamiltonian(p, HamiltonianMode::FromTransfer)?;
        let hd = eigenvalues(&hamiltonian_direct(p)?);
        let mut hit = vec![false; hd.len()];
        for (i, sol) in verified.iter().enumerate() {
            let e = crate::bethe::energy(sol, p)? - h.kappa;
            let (j, d) = hd.iter().enumerate().map(|(j, z)| (j, (z - e).norm() / e.norm().max(1.0))).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            if d < tol {
                hit[j] = true;
            }
            ctx.push("spectrum.hamiltonian_match", i, d, tol);
        }
        h_matched = json!(hit.iter().filter(|h| **h).count());
    }
    Ok(json!({
        "sector_s": s,
        "mu": cplx(sm.mu),
        "dimension": sm.dimension,
        "matched": sm.matched,
        "unmatched_dense": sm.dimension - sm.matched,
        "unmatched_bethe": sm.unmatched_bethe,
        "hamiltonian_matched": h_matched,
        "branches": per_branch,
    }))
}

/// Tolerance for one property residual key of the partition suite.
pub fn property_tolerance(key: &str) -> f64 {
    if key.contains("recursion") {
        1e-9
    } else if key.contains("polynomial") {
        1e-8
    } else {
        1e-10
    }
}

fn cmd_partition(ctx: &mut Ctx, cfg: &RunConfig, input: &PartitionInput, method: MethodArg, seed: u64) -> Result<Value> {
    let tol = cfg.tolerances.partition.unwrap_or(1e-9);
    let det = matches!(method, MethodArg::Det | MethodArg::Both);
    let contract = matches!(method, MethodArg::Contract | MethodArg::Both);
    let rep = partition_report(input, det, contract, seed)?;
    let tag = input.kind.tag();
    if let Some(d) = rep.rel_disagreement {
        ctx.push(&format!("partition.{tag}.det_vs_contract"), 0, d, tol);
    }
    if input.kind == PartitionKind::Bminus && input.n() == 1 {
        let p = &input.params;
        let z1 = z_single_site(input.lambdas[0], p.xi[0], p.delta, p.zeta, p.eta);
        for (name, v) in [("det", rep.value_det), ("contract", rep.value_contract)] {
            if let Some(v) = v {
                ctx.push(&format!("partition.bminus.closed_form.{name}"), 0, (v - z1).norm() / z1.norm().max(1e-300), 1e-12);
            }
        }
    }
    for (k, v) in &rep.property_residuals {
        ctx.push(&format!("partition.{tag}.{k}"), 0, *v, property_tolerance(k));
    }
    let opt = |z: Option<C64>| z.map(cplx).unwrap_or(Value::Null);
    Ok(json!({
        "kind": tag,
        "value_det": opt(rep.value_det),
        "value_contract": opt(rep.value_contract),
        "value_recursion": opt(rep.value_recursion),
        "rel_disagreement": rep.rel_disagreement,
        "prefactor_convention": rep.prefactor_convention,
    }))
}

/// Render a report. JSON: one object per row and a trailing summary; CSV: rows only.
pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut out = String::new();
            for r in &report.rows {
                out.push_str(&serde_json::to_string(r).map_err(|e| Error::Config(e.to_string()))?);
                out.push('\n');
            }
            out.push_str(&serde_json::to_string(&report.summary).map_err(|e| Error::Config(e.to_string()))?);
            out.push('\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &report.rows {
                w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
        }
        Format::Text => {
            let mut out = String::new();
            for r in &report.rows {
                let mark = if r.pass { "PASS" } else { "FAIL" };
                out.push_str(&format!("{mark} {}[{}] residual {:.3e} < {:.1e}\n", r.check, r.trial, r.residual, r.tolerance));
            }
            let s = &report.summary;
            out.push_str(&format!("{}: {}/{} checks passed in {:.2}s\n", s.command, s.passed, s.checks, s.wall_time));
            Ok(out)
        }
    }
}

/// The JSON-lines rendering with `wall_time` removed, for comparing runs.
pub fn comparable(report: &Report) -> String {
    let mut r = report.clone();
    r.summary.wall_time = 0.0;
    render(&r, Format::Json).unwrap_or_default()
}

/// Worker count from `BETHE_SOS_THREADS`; absent means one.
pub fn thread_count(var: Option<&str>) -> Result<usize> {
    match var {
        None => Ok(1),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(Error::Config(format!("BETHE_SOS_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::ZERO;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("bethe-sos").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn config_reads_complex_pairs() {
        let cfg = RunConfig::from_json(r#"{"N": 2, "eta": [0.3, -0.1], "xi": [[0.1, 0.0], [0.0, 0.2]], "tolerances": {"pole": 1e-7}}"#).unwrap();
        let p = resolve_params(&cfg, None, 0).unwrap();
        assert_eq!(p.eta, C64::new(0.3, -0.1));
        assert_eq!(p.xi[1], C64::new(0.0, 0.2));
        assert_eq!(p.pole_eps, 1e-7);
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        let e = RunConfig::from_json(r#"{"N": 2, "etaa": [0, 0]}"#).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
    }

    #[test]
    fn xi_length_is_checked() {
        let cfg = RunConfig::from_json(r#"{"N": 3, "xi": [[0.1, 0.0]]}"#).unwrap();
        assert!(matches!(resolve_params(&cfg, None, 0), Err(Error::Config(_))));
    }

    #[test]
    fn thread_variable() {
        assert_eq!(thread_count(None).unwrap(), 1);
        assert_eq!(thread_count(Some("3")).unwrap(), 3);
        assert!(thread_count(Some("0")).is_err());
    }

    #[test]
    fn rows_are_sorted() {
        let r = run(&cli(&["partition", "--n", "2", "--seed", "3"])).unwrap();
        let keys: Vec<_> = r.rows.iter().map(|r| (r.check.clone(), r.trial)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(r.summary.all_pass);
    }

    #[test]
    fn zero_is_degenerate_for_eta() {
        let cfg = RunConfig { eta: Some(ZERO), ..Default::default() };
        assert!(resolve_params(&cfg, Some(2), 0).is_err());
    }
}
