#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crn_core::certificate::{verify_certificate, CertificateCheck, Settings, StabilityCertificate};
use crn_core::conservation::{conservation_residual, find_conserved_matrix, lift};
use crn_core::dynamics::{format_state, integrate, newton_equilibrium, LyapunovSpec, Method, NewtonOptions};
use crn_core::parser::parse_network;
use crn_core::reconstruct::{certify, complex_balance_residual, equilibrium_residual, CertifyOptions};
use crn_core::{Certification, Network, NetworkDocument, Trajectory, Verdict};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const BALANCE_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "crn", version, about = "Stability certificates for mass action networks via complex balanced reconstructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structural report: complexes, linkage classes, rank, deficiency.
    Info(Common),
    /// Conserved matrix and the free/non-free species partition.
    Conserved(Common),
    /// Positive equilibrium by Newton's method in the class of the start point.
    Equilibrium(Common),
    /// Full pipeline; emits a JSON stability certificate.
    Reconstruct(Common),
    /// Trajectories of the network and/or its reverse reconstruction as CSV.
    Simulate(SimulateArgs),
    /// Recompute every residual of a certificate.
    Verify(VerifyArgs),
}

/// Options shared by every subcommand that reads a `.crn` file.
#[derive(Args, Debug, Clone)]
struct Common {
    /// Network file.
    input: PathBuf,
    /// Lower bound on the diagonal of D (upper bound is its reciprocal).
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Closure radius of the candidate complex set.
    #[arg(long, default_value_t = 1)]
    radius: usize,
    /// Number of conservation laws to use (default: as many as exist).
    #[arg(long)]
    q: Option<usize>,
    /// Start point / class anchor, e.g. `1,2` or `(1, 2)`.
    #[arg(long)]
    x0: Option<String>,
    /// Extra candidate complex over the free species, e.g. `2,0`. Repeatable.
    #[arg(long = "add-complex")]
    add_complex: Vec<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    /// Fixed RK4 step.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Use adaptive Dormand-Prince 5(4) instead of RK4.
    #[arg(long)]
    adaptive: bool,
    #[arg(long, value_enum, default_value_t = System::Original)]
    system: System,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Certificate JSON file.
    certificate: PathBuf,
    /// Network to check against (default: the one embedded in the certificate).
    #[arg(long)]
    network: Option<PathBuf>,
    /// Number of random points for the pointwise field comparison.
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum System {
    Original,
    Reverse,
    /// Requires `--out`; the reverse trajectory goes to `<stem>_reverse.<ext>`.
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Info(c) => info(&c),
        Command::Conserved(c) => conserved(&c),
        Command::Equilibrium(c) => equilibrium(&c),
        Command::Reconstruct(c) => reconstruct(&c),
        Command::Simulate(s) => simulate(&s),
        Command::Verify(v) => verify(&v),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("output: cannot write {}", p.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<NetworkDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("parse: cannot read {}", path.display()))?;
    parse_network(&text).with_context(|| format!("parse: {}", path.display()))
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    inner
        .split(',')
        .map(|t| {
            let t = t.trim();
            match t.split_once('/') {
                Some((a, b)) => Ok(a.trim().parse::<f64>()? / b.trim().parse::<f64>()?),
                None => t.parse::<f64>().map_err(anyhow::Error::from),
            }
        })
        .collect::<Result<Vec<_>>>()
        .with_context(|| format!("arguments: `{s}` is not a comma-separated list of numbers"))
}

fn check_settings(c: &Common) -> Result<()> {
    if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
        bail!("arguments: --epsilon must lie in (0, 1)");
    }
    if c.radius < 1 {
        bail!("arguments: --radius must be at least 1");
    }
    Ok(())
}

fn start_point(c: &Common, doc: &NetworkDocument) -> Result<Option<Vec<f64>>> {
    let x0 = match &c.x0 {
        Some(s) => Some(parse_vector(s)?),
        None => doc.x0.clone(),
    };
    if let Some(x) = &x0 {
        if x.len() != doc.network.num_species() {
            bail!(
                "arguments: start point has {} entries, network has {} species",
                x.len(),
                doc.network.num_species()
            );
        }
    }
    Ok(x0)
}

/// Equilibrium from `--x0` (Newton), else `@equilibrium`, else Newton from `@x0` or all ones.
fn find_equilibrium(c: &Common, doc: &NetworkDocument) -> Result<Vec<f64>> {
    let net = &doc.network;
    if c.x0.is_none() {
        if let Some(x) = &doc.equilibrium {
            let r = equilibrium_residual(net, x).context("equilibrium")?;
            if r > 1e-8 {
                bail!("equilibrium: the given @equilibrium has residual {r:e}");
            }
            return Ok(x.clone());
        }
    }
    let x0 = start_point(c, doc)?.unwrap_or_else(|| vec![1.0; net.num_species()]);
    newton_equilibrium(net, &x0, &NewtonOptions::default()).context("equilibrium")
}

fn certify_options(c: &Common, doc: &NetworkDocument) -> Result<CertifyOptions<f64>> {
    check_settings(c)?;
    let mut extra = Vec::new();
    for s in &c.add_complex {
        let v = parse_vector(s)?;
        let e = v
            .iter()
            .map(|x| {
                if *x >= 0.0 && x.fract() == 0.0 {
                    Ok(*x as u32)
                } else {
                    Err(anyhow!("arguments: --add-complex entries must be nonnegative integers, got `{s}`"))
                }
            })
            .collect::<Result<Vec<u32>>>()?;
        extra.push(e);
    }
    Ok(CertifyOptions {
        epsilon: c.epsilon,
        radius: c.radius,
        q_target: c.q,
        non_free: None,
        equilibrium: Some(find_equilibrium(c, doc)?),
        x0: None,
        extra_complexes: extra,
    })
}

fn run_certify(c: &Common, doc: &NetworkDocument) -> Result<Certification> {
    let opts = certify_options(c, doc)?;
    Ok(certify(&doc.network, &opts)?)
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::LocallyAsymptoticallyStable => EXIT_OK,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn format_reactions(net: &Network) -> String {
    let names = net.species_names();
    let mut s = String::new();
    for r in net.reactions() {
        s.push_str(&format!(
            "  {} -> {} ; k = {}\n",
            r.reactant.format(&names),
            r.product.format(&names),
            r.rate
        ));
    }
    s
}

fn format_matrix(rows: &[Vec<f64>]) -> String {
    rows.iter()
        .map(|r| format!("  [{}]\n", r.iter().map(|v| format!("{v:>10.6}")).collect::<Vec<_>>().join(" ")))
        .collect()
}

#[derive(Serialize)]
struct InfoOutput {
    name: Option<String>,
    species: Vec<String>,
    #[serde(flatten)]
    report: crn_core::model::StructureReport,
    equilibrium: Option<Vec<f64>>,
    complex_balance_residual: Option<f64>,
    complex_balanced: Option<bool>,
}

fn info(c: &Common) -> Result<u8> {
    let doc = load(&c.input)?;
    let net = &doc.network;
    let report = net.structure_report();
    let eq = find_equilibrium(c, &doc).ok();
    let balance = match &eq {
        Some(x) => Some(complex_balance_residual(net, x).context("complex balance")?),
        None => None,
    };
    let out = InfoOutput {
        name: doc.name.clone(),
        species: net.species_names(),
        report,
        equilibrium: eq,
        complex_balance_residual: balance,
        complex_balanced: balance.map(|b| b < BALANCE_TOL),
    };
    let text = match c.format.unwrap_or(Format::Text) {
        Format::Json => serde_json::to_string_pretty(&out)?,
        _ => {
            let mut s = String::new();
            if let Some(n) = &out.name {
                s.push_str(&format!("network:                {n}\n"));
            }
            s.push_str(&format!("{}\n", out.report));
            match (&out.equilibrium, out.complex_balance_residual) {
                (Some(x), Some(b)) => {
                    s.push_str(&format!("equilibrium:            {}\n", format_state(x)));
                    s.push_str(&format!(
                        "complex balanced:       {} (||B v(x*)|| = {b:e})\n",
                        if b < BALANCE_TOL { "yes" } else { "no" }
                    ));
                }
                _ => s.push_str("equilibrium:            not found\n"),
            }
            s
        }
    };
    emit(c.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ConservedOutput {
    q: usize,
    conserved_matrix: Vec<Vec<f64>>,
    free: Vec<String>,
    non_free: Vec<String>,
    permutation: Vec<usize>,
    residual: f64,
}

fn conserved(c: &Common) -> Result<u8> {
    let doc = load(&c.input)?;
    let net = &doc.network;
    let cs = find_conserved_matrix(net, c.q);
    let names = net.species_names();
    let residual = (0..cs.q)
        .map(|k| conservation_residual(net, &cs.c.column(k)))
        .fold(0.0_f64, f64::max);
    let out = ConservedOutput {
        q: cs.q,
        conserved_matrix: cs.c.to_rows(),
        free: cs.free_species().iter().map(|&i| names[i].clone()).collect(),
        non_free: cs.non_free_species().iter().map(|&i| names[i].clone()).collect(),
        permutation: cs.permutation.clone(),
        residual,
    };
    let text = match c.format.unwrap_or(Format::Text) {
        Format::Json => serde_json::to_string_pretty(&out)?,
        _ => {
            let mut s = format!("conservation laws (q): {}\n", out.q);
            if out.q > 0 {
                s.push_str(&format!("conserved matrix C ({} x {}), rows {}:\n", names.len(), out.q, names.join(", ")));
                s.push_str(&format_matrix(&out.conserved_matrix));
            }
            s.push_str(&format!("free species:          {}\n", out.free.join(", ")));
            s.push_str(&format!("non-free species:      {}\n", out.non_free.join(", ")));
            s.push_str(&format!("||S^T C||:             {:e}\n", out.residual));
            s
        }
    };
    emit(c.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn equilibrium(c: &Common) -> Result<u8> {
    let doc = load(&c.input)?;
    let net = &doc.network;
    let x0 = start_point(c, &doc)?
        .or_else(|| doc.equilibrium.clone())
        .unwrap_or_else(|| vec![1.0; net.num_species()]);
    let x = newton_equilibrium(net, &x0, &NewtonOptions::default()).context("equilibrium")?;
    let residual = equilibrium_residual(net, &x).context("equilibrium")?;
    let text = match c.format.unwrap_or(Format::Text) {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "species": net.species_names(),
            "equilibrium": x,
            "residual": residual,
        }))?,
        _ => format!("equilibrium: {}\nresidual:    {residual:e}\n", format_state(&x)),
    };
    emit(c.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn reconstruct(c: &Common) -> Result<u8> {
    let doc = load(&c.input)?;
    let cert = run_certify(c, &doc)?;
    let json = StabilityCertificate::from_certification(
        &doc.network,
        &cert,
        Some(Settings {
            epsilon: c.epsilon,
            radius: c.radius,
        }),
    );
    let format = c.format.unwrap_or(if c.out.is_some() { Format::Text } else { Format::Json });
    if let Some(p) = &c.out {
        emit(Some(p), &json.to_json())?;
    }
    match format {
        Format::Json if c.out.is_none() => emit(None, &json.to_json())?,
        Format::Json => {}
        _ => emit(None, &certification_text(&doc.network, &cert))?,
    }
    Ok(verdict_code(&cert.verdict))
}

fn certification_text(net: &Network, cert: &Certification) -> String {
    let names = net.species_names();
    let cs = &cert.structure;
    let mut s = format!("verdict:     {}\n", cert.verdict);
    if let Some(n) = &cert.note {
        s.push_str(&format!("note:        {n}\n"));
    }
    s.push_str(&format!("equilibrium: {}\n", format_state(&cert.equilibrium)));
    s.push_str(&format!(
        "free:        {}\nnon-free:    {}\n",
        cs.free_species().iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join(", "),
        cs.non_free_species().iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join(", ")
    ));
    s.push_str(&format!("candidates:  {}\n", cert.candidates.len()));
    if let Some(dm) = &cert.d_matrix {
        s.push_str(&format!("D1 = diag{}\n", format_state(&dm.d)));
        s.push_str("D (original species order):\n");
        s.push_str(&format_matrix(&dm.in_original_order().to_rows()));
    }
    if let Some(r) = &cert.reconstruction {
        s.push_str("complex balanced reconstruction:\n");
        s.push_str(&format_reactions(&r.network));
    }
    if let Some(r) = &cert.reverse {
        s.push_str("reverse reconstruction:\n");
        s.push_str(&format_reactions(r));
    }
    if let Some(rep) = &cert.report {
        s.push_str(&format!("residuals:\n{rep}\n"));
    }
    s
}

fn simulate(a: &SimulateArgs) -> Result<u8> {
    let c = &a.common;
    let doc = load(&c.input)?;
    let net = &doc.network;
    if !(a.t_end > 0.0) {
        bail!("arguments: --t-end must be positive");
    }
    if !a.adaptive && !(a.dt > 0.0) {
        bail!("arguments: --dt must be positive");
    }
    let method = if a.adaptive {
        Method::DormandPrince { rtol: 1e-8, atol: 1e-12 }
    } else {
        Method::Rk4 { h: a.dt }
    };
    let format = c.format.unwrap_or(Format::Csv);
    if format == Format::Text {
        bail!("arguments: simulate writes csv or json");
    }
    if a.system == System::Both && c.out.is_none() {
        bail!("arguments: --system both needs --out");
    }

    let cert = run_certify(c, &doc);
    let cert = match cert {
        Ok(cert) if cert.verdict == Verdict::LocallyAsymptoticallyStable => Some(cert),
        Ok(cert) => {
            eprintln!("note: no certificate ({}); G is left empty", cert.note.unwrap_or_default());
            None
        }
        Err(e) => {
            eprintln!("note: no certificate ({e:#}); G is left empty");
            None
        }
    };
    if a.system != System::Original && cert.is_none() {
        bail!("reconstruction: the reverse reconstruction needs a successful certificate");
    }

    let x_star = match &cert {
        Some(cert) => cert.equilibrium.clone(),
        None => find_equilibrium(c, &doc).unwrap_or_else(|_| vec![1.0; net.num_species()]),
    };
    let structure = cert.as_ref().map(|c| c.structure.clone()).unwrap_or_else(|| find_conserved_matrix(net, c.q));
    let x0 = match &c.x0 {
        Some(s) => parse_vector(s)?,
        None => match &doc.x0 {
            Some(x) => x.clone(),
            None => {
                let shifted: Vec<f64> = structure.free_species().iter().map(|&i| 1.2 * x_star[i]).collect();
                lift(&structure, &x_star, &shifted).context("initial state")?
            }
        },
    };
    if x0.len() != net.num_species() {
        bail!("arguments: start point has {} entries, network has {} species", x0.len(), net.num_species());
    }

    let mut outputs: Vec<(Option<PathBuf>, String)> = Vec::new();
    let mut status_code = EXIT_OK;
    if matches!(a.system, System::Original | System::Both) {
        let conserved = (structure.q > 0).then_some(&structure.c);
        let mut traj = integrate(net, &x0, a.t_end, &method, conserved).context("simulation")?;
        if let Some(cert) = &cert {
            let dm = cert.d_matrix.as_ref().expect("stable certificate has D");
            let spec = LyapunovSpec::new(structure.free_species().to_vec(), dm.d.clone(), x_star.clone())?;
            traj = traj.with_lyapunov(&spec).context("lyapunov")?;
        }
        status_code = status_code.max(report_status(&traj, "original"));
        outputs.push((c.out.clone(), render(&traj, &net.species_names(), format)?));
    }
    if matches!(a.system, System::Reverse | System::Both) {
        let cert = cert.as_ref().expect("checked above");
        let dm = cert.d_matrix.as_ref().expect("stable certificate has D");
        let reverse = cert.reverse.as_ref().expect("stable certificate has a reverse reconstruction");
        let y0 = dm.project(&x0);
        let y_star = dm.project(&x_star);
        let spec = LyapunovSpec::new((0..y0.len()).collect(), dm.d.clone(), y_star)?;
        let traj = integrate(reverse, &y0, a.t_end, &method, None)
            .context("simulation")?
            .with_lyapunov(&spec)
            .context("lyapunov")?;
        status_code = status_code.max(report_status(&traj, "reverse"));
        let path = match (a.system, &c.out) {
            (System::Both, Some(p)) => Some(sibling(p, "_reverse")),
            _ => c.out.clone(),
        };
        outputs.push((path, render(&traj, &reverse.species_names(), format)?));
    }
    for (path, text) in outputs {
        emit(path.as_deref(), &text)?;
    }
    Ok(status_code)
}

fn sibling(p: &Path, suffix: &str) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match p.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    p.with_file_name(name)
}

fn report_status(traj: &Trajectory, label: &str) -> u8 {
    use crn_core::dynamics::TrajectoryStatus::*;
    match &traj.status {
        Complete => EXIT_OK,
        LeftOrthant { time, index, value } => {
            eprintln!("warning: {label} trajectory left the orthant at t = {time} (x[{index}] = {value:e})");
            EXIT_OK
        }
        Failed { time, message } => {
            eprintln!("error: {label} trajectory stopped at t = {time}: {message}");
            EXIT_ERROR
        }
    }
}

fn render(traj: &Trajectory, names: &[String], format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "species": names,
            "times": traj.times,
            "states": traj.states,
            "G": traj.lyapunov,
            "conservation_residual": traj.conservation_residual,
        }))?,
        _ => traj.to_csv(names),
    })
}

fn seed() -> Result<u64> {
    match std::env::var("CRN_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .with_context(|| format!("arguments: CRN_SEED must be an unsigned integer, got `{s}`")),
        Err(_) => Ok(0),
    }
}

fn verify(v: &VerifyArgs) -> Result<u8> {
    let text = fs::read_to_string(&v.certificate)
        .with_context(|| format!("certificate: cannot read {}", v.certificate.display()))?;
    let cert = StabilityCertificate::from_json(&text).context("certificate")?;
    let net = match &v.network {
        Some(p) => load(p)?.network,
        None => cert.parse_network().context("certificate: embedded network")?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed()?);
    let points = match cert.permutation.len().checked_sub(cert.q) {
        Some(free) if free <= cert.equilibrium.len() && cert.permutation.iter().all(|&i| i < cert.equilibrium.len()) => (0..v.samples)
            .map(|_| {
                cert.permutation[..free]
                    .iter()
                    .map(|&i| cert.equilibrium[i] * rng.gen_range(0.5..1.5))
                    .collect()
            })
            .collect(),
        _ => Vec::new(),
    };
    let check = verify_certificate(&cert, &net, &points).context("verification")?;
    let out = match v.format.unwrap_or(Format::Text) {
        Format::Json => serde_json::to_string_pretty(&check)?,
        _ => check_text(&check),
    };
    emit(v.out.as_deref(), &out)?;
    Ok(verdict_code(&check.verdict))
}

fn check_text(check: &CertificateCheck) -> String {
    let mut s = format!("verdict: {}\n", check.verdict);
    if let Some(r) = &check.report {
        s.push_str(&format!("{r}\n"));
    }
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_else(|| "n/a".into());
    s.push_str(&format!("D mismatch:              {}\n", opt(check.d_mismatch)));
    s.push_str(&format!("pointwise field gap:     {}\n", opt(check.pointwise)));
    s.push_str(&format!("reverse mismatch:        {}\n", opt(check.reverse_mismatch)));
    for n in &check.notes {
        s.push_str(&format!("note: {n}\n"));
    }
    s
}
