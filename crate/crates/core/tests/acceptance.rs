//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use bethe_sos::bethe::{
    apply_constraints, find_solutions, gauged_transfer_residual, spectrum_match, verify_solution, BoundaryConstraint, Branch, SolverOptions,
};
use bethe_sos::cli::{comparable, run, Cli};
use bethe_sos::partition::{z_contraction, z_determinant, z_property_suite, z_single_site, PartitionInput, PartitionKind};
use bethe_sos::sos::{sos_identity_suite, DynParams, SosCheck, SosTransferKind};
use bethe_sos::vertex::{hamiltonian_suite, vertex_identity_suite, VertexCheck};
use bethe_sos::{ModelParams, Sampler};
use clap::Parser;
use num_complex::Complex64 as C64;

const POINTS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn dyn_params(p: &ModelParams, seed: u64) -> DynParams {
    let mut s = Sampler::new(seed);
    let theta = s.point_where(|t| p.check_dynamical(t).is_ok());
    DynParams { theta, theta_bar: p.theta_bar(), omega: s.point() }
}

/// Worst residual of a set of SOS checks over the given chain lengths.
fn sos_worst(checks: &[SosCheck], sizes: &[usize], seed: u64) -> bethe_sos::Result<(f64, String)> {
    let mut worst = (0.0, String::new());
    for &n in sizes {
        let p = ModelParams::random(n, &mut Sampler::new(seed + n as u64));
        let d = dyn_params(&p, seed + 50);
        for &check in checks {
            let r = sos_identity_suite(check, &p, &d, seed + 7, POINTS)?;
            if !(r.max_residual <= worst.0) {
                worst = (r.max_residual, format!("{} at N={n}", r.check));
            }
        }
    }
    Ok(worst)
}

fn identity_suites() -> bethe_sos::Result<Outcome> {
    let tol = 1e-10;
    let start = Instant::now();
    let vertex = [VertexCheck::Ybe, VertexCheck::Unitarity, VertexCheck::Z2, VertexCheck::Crossing, VertexCheck::Reflection, VertexCheck::DualReflection];
    let mut worst: (f64, String) = (0.0, String::new());
    let mut count = 0;
    for n in 1..=3 {
        let p = ModelParams::random(n, &mut Sampler::new(100 + n as u64));
        for check in vertex {
            let r = vertex_identity_suite(check, &p, 3, POINTS)?;
            count += 1;
            if !(r.max_residual <= worst.0) {
                worst = (r.max_residual, format!("{} at N={n}", r.check));
            }
        }
    }
    let sos = [
        SosCheck::Dybe1,
        SosCheck::Dybe2,
        SosCheck::IceRule,
        SosCheck::Unitarity,
        SosCheck::Crossing1,
        SosCheck::Crossing2,
        SosCheck::Parity,
        SosCheck::DynReflection,
        SosCheck::SosAlgebra,
        SosCheck::DualSosAlgebra,
    ];
    let s = sos_worst(&sos, &[1, 2, 3], 200)?;
    count += 3 * sos.len();
    if !(s.0 <= worst.0) {
        worst = s;
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: worst.0 < tol && secs < 60.0,
        detail: format!("{count} suites x {POINTS} points, worst {:.2e} ({}), tol {tol:.0e}, {secs:.1} s of 60 s", worst.0, worst.1),
    })
}

fn gauge_layer() -> bethe_sos::Result<Outcome> {
    let tol = 1e-10;
    let checks = [
        SosCheck::VertexFace1,
        SosCheck::VertexFace2,
        SosCheck::MonodromyGauge,
        SosCheck::DualMonodromyGauge,
        SosCheck::DoubleRowGauge,
        SosCheck::DualDoubleRowGauge,
        SosCheck::KDiagonalization,
    ];
    let (mut worst, mut at) = sos_worst(&checks, &[2, 3], 300)?;
    for n in [2usize, 3] {
        let free = ModelParams::random(n, &mut Sampler::new(310 + n as u64));
        let s = (n % 2) as i32;
        let p = apply_constraints(&free, &BoundaryConstraint::new(s, 0, 0))?;
        let mut sm = Sampler::new(7);
        for _ in 0..5 {
            let mu = sm.spectral(&p);
            for which in [SosTransferKind::Sos1, SosTransferKind::Sos2] {
                let r = gauged_transfer_residual(mu, which, &p, s)?;
                if !(r <= worst) {
                    worst = r;
                    at = format!("gauged transfer {which:?} at N={n}");
                }
            }
        }
    }
    Ok(Outcome { pass: worst < tol, detail: format!("worst {worst:.2e} ({at}), tol {tol:.0e}") })
}

fn hamiltonian() -> bethe_sos::Result<Outcome> {
    let (tol_id, tol_comm) = (1e-8, 1e-9);
    let (mut id, mut comm) = (0.0f64, 0.0f64);
    for n in [2usize, 3] {
        let p = ModelParams::random(n, &mut Sampler::new(400 + n as u64)).homogeneous();
        let reps = hamiltonian_suite(&p, 9, 5)?;
        id = id.max(reps[0].max_residual);
        comm = comm.max(reps[1].max_residual);
    }
    Ok(Outcome {
        pass: id < tol_id && comm < tol_comm,
        detail: format!("identity remainder {id:.2e} (tol {tol_id:.0e}), [H, T(mu)] at 5 mu {comm:.2e} (tol {tol_comm:.0e})"),
    })
}

fn bethe() -> bethe_sos::Result<Outcome> {
    let tol = 1e-8;
    let free = ModelParams::random(2, &mut Sampler::new(500));
    let p = apply_constraints(&free, &BoundaryConstraint::new(0, 0, 0))?;
    let sols = find_solutions(Branch::Bminus1, 1, &p, 1, 64, &SolverOptions::default())?;
    let mut sm = Sampler::new(501);
    let mus: Vec<C64> = (0..3).map(|_| sm.spectral(&p)).collect();
    let mut good = Vec::new();
    let mut worst = f64::INFINITY;
    for sol in &sols {
        let v = verify_solution(sol, &p, &mus)?;
        worst = worst.min(v.worst());
        if v.worst() < tol {
            good.push(sol.clone());
        }
    }
    let sm = spectrum_match(&p, &good, mus[0], tol)?;
    Ok(Outcome {
        pass: !good.is_empty(),
        detail: format!(
            "{} of {} solutions verified (best {worst:.2e}, tol {tol:.0e}); matched {}/{} eigenvalues of T_XXZ",
            good.len(),
            sols.len(),
            sm.matched,
            sm.dimension
        ),
    })
}

fn partition() -> bethe_sos::Result<Outcome> {
    let start = Instant::now();
    let mut det_worst = 0.0f64;
    for n in 1..=4 {
        for kind in PartitionKind::ALL {
            for k in 0..10 {
                let input = PartitionInput::random(kind, n, &mut Sampler::new(600 + 10 * n as u64 + k));
                det_worst = det_worst.max(rel(z_determinant(&input)?, z_contraction(&input)?));
            }
        }
    }
    let mut closed = 0.0f64;
    for k in 0..10 {
        let input = PartitionInput::random(PartitionKind::Bminus, 1, &mut Sampler::new(700 + k));
        let p = &input.params;
        let z1 = z_single_site(input.lambdas[0], p.xi[0], p.delta, p.zeta, p.eta);
        closed = closed.max(rel(z_determinant(&input)?, z1)).max(rel(z_contraction(&input)?, z1));
    }
    let mut prop_fail = Vec::new();
    let mut prop_worst = 0.0f64;
    for n in [2usize, 3] {
        for k in 0..3 {
            let input = PartitionInput::random(PartitionKind::Bminus, n, &mut Sampler::new(800 + 10 * n as u64 + k));
            for (name, r) in z_property_suite(&input, k)? {
                prop_worst = prop_worst.max(r);
                if !(r < bethe_sos::cli::property_tolerance(&name)) {
                    prop_fail.push(format!("{name} at N={n}"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: det_worst < 1e-9 && closed < 1e-12 && prop_fail.is_empty() && secs < 120.0,
        detail: format!(
            "det vs contraction {det_worst:.2e} (tol 1e-9), N=1 closed form {closed:.2e} (tol 1e-12), properties worst {prop_worst:.2e}{}, {secs:.1} s of 120 s",
            if prop_fail.is_empty() { String::new() } else { format!(" failing {prop_fail:?}") }
        ),
    })
}

fn inter_algebra() -> bethe_sos::Result<Outcome> {
    let tol = 1e-10;
    let (w, at) = sos_worst(&[SosCheck::SpinReversal, SosCheck::TransferSpinReversal, SosCheck::PlusMinusMap], &[2, 3], 900)?;
    Ok(Outcome { pass: w < tol, detail: format!("worst {w:.2e} ({at}), tol {tol:.0e}") })
}

fn determinism() -> bethe_sos::Result<Outcome> {
    let commands: [&[&str]; 4] = [
        &["verify", "--suite", "all", "--n", "3", "--seed", "11"],
        &["bethe", "--branch", "b1", "--n", "3", "--m", "1", "--constrained", "--seed", "11"],
        &["spectrum", "--n", "3", "--constrained", "--seed", "11"],
        &["partition", "--kind", "cplus", "--n", "3", "--seed", "11"],
    ];
    let mut mismatches = Vec::new();
    for args in commands {
        let cli = Cli::parse_from(std::iter::once("bethe-sos").chain(args.iter().copied()));
        let a = comparable(&run(&cli)?);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().map_err(|e| bethe_sos::Error::Config(e.to_string()))?;
        let b = pool.install(|| run(&cli).map(|r| comparable(&r)))?;
        let bin = |threads: &str| {
            Command::new(env!("CARGO_BIN_EXE_bethe-sos")).args(args).env("BETHE_SOS_THREADS", threads).output().map(|o| strip_wall_time(&o.stdout))
        };
        let (c, d) = (bin("1"), bin("3"));
        let same = matches!((&c, &d), (Ok(c), Ok(d)) if c == d) && a == b;
        if !same {
            mismatches.push(args[0]);
        }
    }
    Ok(Outcome {
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            format!("{} commands byte-identical across repeated runs and thread counts", commands.len())
        } else {
            format!("differing reports: {mismatches:?}")
        },
    })
}

/// JSON lines with the `wall_time` field of the summary removed.
fn strip_wall_time(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| match serde_json::from_str::<serde_json::Value>(l) {
            Ok(serde_json::Value::Object(mut m)) => {
                m.remove("wall_time");
                serde_json::Value::Object(m).to_string()
            }
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> bethe_sos::Result<Outcome>); 7] = [
        ("identity suites", identity_suites),
        ("gauge layer", gauge_layer),
        ("hamiltonian reconstruction", hamiltonian),
        ("bethe verification", bethe),
        ("partition functions", partition),
        ("inter-algebra relations", inter_algebra),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let out = f().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        failed += usize::from(!out.pass);
        println!("criterion {} {name}: {} ({})", i + 1, if out.pass { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
