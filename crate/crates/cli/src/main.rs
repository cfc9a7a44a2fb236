use std::path::PathBuf;
use std::process::ExitCode;

use badcantor::cantor::certificate::Certificate;
use badcantor::cantor::{lattice_schedule, summary_line, StepReport};
use badcantor::config::RunConfig;
use badcantor::constants::derive_exponents;
use badcantor::curve::{build_curve, ShiftField};
use badcantor::error::{ConfigError, Error, OracleError};
use badcantor::interval::RationalInterval;
use badcantor::lattice::{shortest_nonzero, EscapeKernel, EscapeScales};
use badcantor::oracle::transfer::planted_instance;
use badcantor::oracle::{bad_constant_estimate, transference_check, verify_certificate};
use badcantor::pipeline::construct;
use badcantor::rational::fmt_q;
use badcantor::real::PRECISIONS;
use badcantor::weight::validate_weights;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "badcantor", version, about = "Certified inhomogeneous badly approximable points on curves")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Config key override; the file wins on conflict.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Same as --set output=PATH.
    #[arg(long, short)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Constants, Cantor construction and certificate.
    Construct(Common),
    /// Check a certificate's quality claim exactly.
    Verify {
        certificate: PathBuf,
        /// Write the certificate with its report section here.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Finite-range bad constant estimate at `oracle_x`.
    Oracle(Common),
    /// Randomized transference suite on planted systems.
    TransferTest(Common),
    /// Shortest-vector norms along the flow, one record per line.
    LatticeProbe(Common),
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    let mut sets = c.set.clone();
    if let Some(o) = &c.output {
        sets.push(format!("output={o}"));
    }
    for w in cfg.apply_overrides(&sets)? {
        warn!("{w}");
    }
    Ok(cfg)
}

fn write_or_print(path: Option<&str>, body: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn run_construct(c: &Common) -> Result<i32, Error> {
    let cfg = load(c)?;
    let mut sink = |r: &StepReport| info!("q={} windows={} removed={}", r.q, r.windows.len(), r.removed.len());
    let run = construct(&cfg, &mut sink)?;
    let summary = summary_line(&run.state);
    for f in &run.state.proof_failures {
        warn!("proof expectation failed: {f}");
    }
    if run.state.is_extinct() {
        eprintln!("{summary}");
        for row in &run.state.ledger {
            eprintln!(
                "q={} tracked={} alive_children={} measure={} lattice={} dangerous={} windows={}",
                row.q,
                row.tracked,
                row.alive_children,
                row.removed_measure,
                row.removed_lattice,
                row.removed_dangerous,
                row.windows
            );
        }
    }
    let cert = run.certificate()?;
    write_or_print(cfg.output(), &cert.serialize())?;
    if cfg.output().is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(0)
}

fn run_verify(path: &PathBuf, output: Option<&PathBuf>) -> Result<i32, Error> {
    let mut cert = Certificate::parse(&std::fs::read_to_string(path)?)?;
    let report = verify_certificate(&cert)?;
    cert.report = report.to_section();
    if let Some(o) = output {
        std::fs::write(o, cert.serialize())?;
    }
    let checked = report.table.len();
    match report.into_result() {
        Ok(r) => {
            let worst =
                r.worst.map(|w| format!(", worst m={} value={:.6e}", w.m, w.value.approx())).unwrap_or_default();
            println!("pass: {checked} denominators in ({}, {}]{worst}", fmt_q(&r.m_lower), r.m_upper);
            Ok(0)
        }
        Err(e) => {
            for (k, v) in cert.report.iter().filter(|(k, _)| k.starts_with("failure_")) {
                eprintln!("{k}: {v}");
            }
            Err(e.into())
        }
    }
}

fn run_oracle(c: &Common) -> Result<i32, Error> {
    let cfg = load(c)?;
    let curve = build_curve(cfg.curve()?, cfg.domain()?)?;
    let weight = validate_weights(&cfg.weights()?)?;
    let x = cfg.oracle_x()?;
    let dom = curve.domain();
    let on = RationalInterval::new(dom.a.clone(), dom.b.clone())?;
    let shift = ShiftField::derive(cfg.shift()?, curve.n(), &on, cfg.lipschitz()?)?;
    let (qb, m0) = (cfg.oracle_q()?, cfg.oracle_m0()?);
    if qb <= m0 {
        return Err(ConfigError::Field { key: "oracle_Q".into(), message: "must exceed oracle_M0".into() }.into());
    }
    let est = bad_constant_estimate(&curve, &shift, &weight, &x, qb, m0);
    let body =
        format!("x\t{}\nrange\t({m0}, {qb}]\nargmin_m\t{}\nestimate\t{:.12e}\n", fmt_q(&x), est.m, est.value.approx());
    write_or_print(cfg.output(), &body)?;
    Ok(0)
}

fn run_transfer(c: &Common) -> Result<i32, Error> {
    let cfg = load(c)?;
    let count = cfg.transfer_count()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.transfer_seed()?);
    let floor_b = cfg.transfer_bound()?;
    let (mut found, mut vacuous, mut missing) = (0usize, 0usize, 0usize);
    let mut lines = String::new();
    for k in 0..count {
        let n = 1 + k % 2;
        let (inst, _) = planted_instance(&mut rng, n);
        let b = inst.dual_box_bound()?.max(floor_b);
        match transference_check(&inst, b) {
            Ok(r) => {
                found += 1;
                let show = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
                lines.push_str(&format!("{k}\t{n}\t{}\t{}\t{}\n", show(&r.u), show(&r.v), fmt_q(&r.iota_pow)));
            }
            Err(OracleError::NoPrimalSolution) => vacuous += 1,
            Err(OracleError::SearchExhausted) => {
                missing += 1;
                lines.push_str(&format!("{k}\t{n}\tmissing\n"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_or_print(cfg.output(), &lines)?;
    println!("systems={count} dual_found={found} vacuous={vacuous} missing={missing}");
    Ok(if missing == 0 { 0 } else { 1 })
}

fn run_probe(c: &Common) -> Result<i32, Error> {
    let cfg = load(c)?;
    let curve = build_curve(cfg.curve()?, cfg.domain()?)?;
    let weight = validate_weights(&cfg.weights()?)?;
    let x = cfg.probe_x()?;
    let prec = PRECISIONS[1];
    let ex = derive_exponents(cfg.r()?, &weight, prec);
    let scales = EscapeScales { weight, ln_r: ex.ln_r, epsilon: ex.epsilon };
    let mut out = String::from("q\tl\tx\tshortest_norm\tescapes\n");
    for qq in 0..=cfg.probe_q_max()? {
        let mut ls: Vec<usize> = lattice_schedule(qq).into_iter().flat_map(|(_, l)| l).collect();
        ls.insert(0, 1);
        ls.sort_unstable();
        ls.dedup();
        for l in ls {
            let mut k = EscapeKernel::new(&curve, &scales, qq, l);
            let norm = shortest_nonzero(&k.basis_at(&x, prec)?)?.norm;
            let esc = k.escapes_at(&x)?;
            out.push_str(&format!("{qq}\t{l}\t{}\t{}\t{esc}\n", fmt_q(&x), norm.to_sci(40)));
        }
    }
    write_or_print(cfg.output(), &out)?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Construct(c) => run_construct(c),
        Cmd::Verify { certificate, output } => run_verify(certificate, output.as_ref()),
        Cmd::Oracle(c) => run_oracle(c),
        Cmd::TransferTest(c) => run_transfer(c),
        Cmd::LatticeProbe(c) => run_probe(c),
    };
    match res {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
