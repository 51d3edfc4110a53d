mod common;

use common::{data_path, load, random_conservative_network, random_network, rng, sup_gap};
use crn_core::certificate::{verify_certificate, StabilityCertificate};
use crn_core::conservation::{conservation_residual, lift};
use crn_core::dynamics::{
    class_equilibrium, integrate, lyapunov_descent_check, newton_equilibrium, pseudo_helmholtz,
    pseudo_helmholtz_gradient, LyapunovSpec, Method, NewtonOptions,
};
use crn_core::lp::{LinearProgram, LpStatus};
use crn_core::parser::{parse_network, serialize_document};
use crn_core::reconstruct::{certify, CertifyOptions};
use crn_core::{Certification, Matrix, Network, NetworkDocument, Verdict};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn certified(doc: &NetworkDocument) -> Result<Certification, String> {
    let opts = CertifyOptions {
        equilibrium: doc.equilibrium.clone(),
        ..CertifyOptions::default()
    };
    let cert = certify(&doc.network, &opts).map_err(|e| e.to_string())?;
    ensure(
        cert.verdict == Verdict::LocallyAsymptoticallyStable,
        format!("verdict {} ({:?})", cert.verdict, cert.note),
    )?;
    Ok(cert)
}

fn published(name: &str) -> Result<(StabilityCertificate, Network), String> {
    let text = std::fs::read_to_string(data_path(name)).map_err(|e| e.to_string())?;
    let cert = StabilityCertificate::from_json(&text).map_err(|e| e.to_string())?;
    let net = cert.parse_network().map_err(|e| e.to_string())?;
    Ok((cert, net))
}

fn rank(m: &Matrix) -> usize {
    m.rank(1e-9)
}

fn exact_row(file: &str, published_file: &str, newton_start: &[f64]) -> Outcome {
    let doc = load(file);
    let cert = certified(&doc)?;
    let rep = cert.report.as_ref().ok_or("no report")?;
    ensure(rep.dyn_equiv < 1e-9, format!("dynamical equivalence residual {:e}", rep.dyn_equiv))?;
    ensure(rep.complex_balance < 1e-9, format!("complex balance residual {:e}", rep.complex_balance))?;

    let (pcert, pnet) = published(published_file)?;
    let points: Vec<Vec<f64>> = (1..=8).map(|k| vec![0.25 * k as f64]).collect();
    let check = verify_certificate(&pcert, &pnet, &points).map_err(|e| e.to_string())?;
    ensure(
        check.verdict == Verdict::LocallyAsymptoticallyStable && check.max_residual() < 1e-12,
        format!("published triple: residual {:e}", check.max_residual()),
    )?;

    let x = newton_equilibrium(&doc.network, newton_start, &NewtonOptions::default()).map_err(|e| e.to_string())?;
    let expected = doc.equilibrium.as_ref().ok_or("missing @equilibrium")?;
    let gap = sup_gap(&x, expected);
    ensure(gap < 1e-10, format!("Newton equilibrium off by {gap:e}"))?;
    Ok(format!(
        "residuals dyn {:.1e} cb {:.1e}, published {:.1e}, Newton gap {:.1e}",
        rep.dyn_equiv,
        rep.complex_balance,
        check.max_residual(),
        gap
    ))
}

fn criterion_1() -> Outcome {
    exact_row("table1_row2.crn", "table1_row2_published.json", &[1.4, 0.6])
}

fn criterion_2() -> Outcome {
    let summary = exact_row("table1_row4.crn", "table1_row4_published.json", &[0.6, 0.6, 0.4])?;
    let (pcert, pnet) = published("table1_row4_published.json")?;
    let recon = pcert.reconstruction.as_ref().ok_or("no reconstruction")?;
    let field = Network::new(vec!["Xhat1".into()], recon_reactions(recon))
        .map_err(|e| e.to_string())?
        .vector_field()
        .map_err(|e| e.to_string())?;
    let f = field.get(0);
    let ok = (f.coefficient(&[0]) - 0.02).abs() < 1e-15 && (f.coefficient(&[1]) + 0.04).abs() < 1e-15;
    ensure(ok, format!("published reconstruction field is {f}"))?;

    let doc = load("table1_row4.crn");
    let cert = certified(&doc)?;
    let c = &cert.structure.c;
    let span = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 3.0]]);
    let joint = Matrix::from_columns(3, &[c.column(0), c.column(1), span.column(0), span.column(1)]);
    ensure(
        rank(c) == 2 && rank(&span) == 2 && rank(&joint) == 2,
        format!("column spaces differ: ranks {} {} {}", rank(c), rank(&span), rank(&joint)),
    )?;
    ensure(pnet.num_species() == 3, "published network")?;
    Ok(format!("{summary}, Im(C) = span{{(1,1,2),(1,2,3)}}"))
}

fn recon_reactions(r: &crn_core::certificate::ReconstructionRecord) -> Vec<crn_core::model::Reaction<f64>> {
    use crn_core::model::{Complex, Reaction};
    r.reactions
        .iter()
        .map(|x| Reaction::new(Complex::from_dense(&x.reactant), Complex::from_dense(&x.product), x.rate))
        .collect()
}

fn criterion_3() -> Outcome {
    let (cert, net) = published("table1_row1_published.json")?;
    let check = verify_certificate(&cert, &net, &[]).map_err(|e| e.to_string())?;
    let rep = check.report.as_ref().ok_or("no report")?;
    ensure(check.verdict == Verdict::Inconclusive, "rounded data accepted")?;
    ensure(
        (1e-3..=5e-3).contains(&rep.complex_balance),
        format!("complex balance residual {:e}", rep.complex_balance),
    )?;
    ensure(
        (rep.dyn_equiv - 0.002).abs() < 1e-9,
        format!("quadratic mismatch {:e}", rep.dyn_equiv),
    )?;
    Ok(format!(
        "flagged: complex balance {:.3e}, dynamical equivalence {:.3e}",
        rep.complex_balance, rep.dyn_equiv
    ))
}

fn criterion_4() -> Outcome {
    let rows: [(&str, Vec<Vec<f64>>); 6] = [
        ("table1_row1.crn", vec![vec![1.0, 1.0]]),
        ("table1_row2.crn", vec![vec![1.0, 1.0]]),
        ("table1_row3.crn", vec![vec![1.0, 1.0, 1.0]]),
        ("table1_row4.crn", vec![vec![1.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]]),
        ("table1_row5.crn", vec![vec![2.0, 2.0, 1.0, 2.0]]),
        ("table1_row6.crn", vec![vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 2.0, 1.0, 2.0]]),
    ];
    let mut worst: f64 = 0.0;
    for (file, vectors) in rows {
        let net = load(file).network;
        for v in vectors {
            let r = conservation_residual(&net, &v);
            ensure(r < 1e-12, format!("{file}: {v:?} has residual {r:e}"))?;
            worst = worst.max(r);
        }
    }
    Ok(format!("8 vectors, worst residual {worst:e}"))
}

struct Pair {
    original: crn_core::Trajectory,
    reverse: crn_core::Trajectory,
    cert: Certification,
    y0: Vec<f64>,
}

fn trajectories(file: &str) -> Result<Pair, String> {
    let doc = load(file);
    let cert = certified(&doc)?;
    let cs = &cert.structure;
    let dm = cert.d_matrix.as_ref().ok_or("no D")?;
    let y0: Vec<f64> = cs.free_species().iter().map(|&i| 1.2 * cert.equilibrium[i]).collect();
    let x0 = lift(cs, &cert.equilibrium, &y0).map_err(|e| e.to_string())?;
    let method = Method::Rk4 { h: 1e-3 };
    let original = integrate(&doc.network, &x0, 10.0, &method, Some(&cs.c)).map_err(|e| e.to_string())?;
    let reverse = integrate(cert.reverse.as_ref().ok_or("no reverse")?, &dm.project(&x0), 10.0, &method, None)
        .map_err(|e| e.to_string())?;
    ensure(original.is_complete() && reverse.is_complete(), "integration did not complete")?;
    Ok(Pair {
        original,
        reverse,
        cert,
        y0,
    })
}

fn criterion_5() -> Outcome {
    let mut parts = Vec::new();
    for file in ["table1_row2.crn", "table1_row4.crn"] {
        let p = trajectories(file)?;
        let dm = p.cert.d_matrix.as_ref().ok_or("no D")?;
        ensure(p.original.times.len() == p.reverse.times.len(), "grids differ")?;
        let gap = p
            .original
            .states
            .iter()
            .zip(&p.reverse.states)
            .fold(0.0_f64, |m, (x, y)| m.max(sup_gap(&dm.project(x), y)));
        ensure(gap < 1e-6, format!("{file}: gap {gap:e}"))?;
        parts.push(format!("{file} gap {gap:.1e}"));
    }
    Ok(parts.join(", "))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    for file in ["table1_row2.crn", "table1_row4.crn"] {
        let p = trajectories(file)?;
        let dm = p.cert.d_matrix.as_ref().ok_or("no D")?;
        let recon = &p.cert.reconstruction.as_ref().ok_or("no reconstruction")?.network;
        let x_hat = dm.project(&p.cert.equilibrium);
        let target = class_equilibrium(recon, &dm.d, &x_hat, &p.y0).map_err(|e| e.to_string())?;
        let spec = LyapunovSpec::new((0..x_hat.len()).collect(), dm.d.clone(), x_hat).map_err(|e| e.to_string())?;
        let reverse = p.cert.reverse.as_ref().ok_or("no reverse")?;
        let rep = lyapunov_descent_check(reverse, &spec, &p.reverse, Some(&target.x)).map_err(|e| e.to_string())?;
        let dist = rep.terminal_distance.unwrap_or(f64::INFINITY);
        ensure(rep.max_derivative <= 1e-9, format!("{file}: dG/dt reaches {:e}", rep.max_derivative))?;
        ensure(dist < 1e-6, format!("{file}: terminal distance {dist:e}"))?;
        parts.push(format!("{file} max dG/dt {:.1e}, distance {dist:.1e}", rep.max_derivative));
    }
    Ok(parts.join(", "))
}

fn criterion_7() -> Outcome {
    let doc = parse_network::<f64>("@equilibrium = (1, 2)\nX1 <-> X2 ; k = 2, 1\n").map_err(|e| e.to_string())?;
    let opts = CertifyOptions {
        equilibrium: doc.equilibrium.clone(),
        q_target: Some(0),
        ..CertifyOptions::default()
    };
    let cert = certify(&doc.network, &opts).map_err(|e| e.to_string())?;
    ensure(cert.verdict == Verdict::LocallyAsymptoticallyStable, "not certified")?;
    let recon = &cert.reconstruction.as_ref().ok_or("no reconstruction")?.network;
    let d = &cert.d_matrix.as_ref().ok_or("no D")?.d;
    let x_star = cert.equilibrium.clone();
    let s_hat = recon.s().clone();
    ensure(s_hat.transpose().nullspace(1e-9).cols() > 0, "Ker(S_hat^T) is trivial")?;

    let base = [0.9, 2.5];
    let dinv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let mut r = rng(7);
    let mut solutions = Vec::new();
    while solutions.len() < 10 {
        let w: Vec<f64> = (0..s_hat.cols()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let shift = s_hat.mul_vec(&w);
        let x0: Vec<f64> = (0..base.len()).map(|i| base[i] + dinv[i] * shift[i] * 1e-3).collect();
        if x0.iter().any(|v| *v <= 0.0) {
            continue;
        }
        let ce = class_equilibrium(recon, d, &x_star, &x0).map_err(|e| e.to_string())?;
        ensure(ce.residual < 1e-8, format!("class residual {:e}", ce.residual))?;
        solutions.push(ce.x);
    }
    let spread = solutions.iter().fold(0.0_f64, |m, x| m.max(sup_gap(x, &solutions[0])));
    ensure(spread < 1e-7, format!("starts disagree by {spread:e}"))?;
    let logs: Vec<f64> = solutions[0].iter().zip(&x_star).map(|(a, b)| (a / b).ln()).collect();
    let kernel_res = s_hat.transpose().mul_vec(&logs).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    ensure(kernel_res < 1e-8, format!("Ln(x/x*) residual {kernel_res:e}"))?;
    ensure(sup_gap(&solutions[0], &x_star) > 1e-3, "class equilibrium coincides with x*")?;
    Ok(format!("spread {spread:.1e}, S_hat^T Ln residual {kernel_res:.1e}"))
}

fn identity_gaps(net: &Network, x: &[f64]) -> Result<(f64, f64), String> {
    let zb = net.z().matmul(net.b());
    let s_gap = zb.sub(net.s()).max_abs();
    let sv = net.s().mul_vec(&net.mass_action_rates(x).map_err(|e| e.to_string())?);
    let zlpsi = net.z().mul_vec(&net.l().mul_vec(&net.psi(x).map_err(|e| e.to_string())?));
    let scale = sv.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    Ok((s_gap, sup_gap(&sv, &zlpsi) / scale))
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);

    for _ in 0..100 {
        let net = random_network(&mut r);
        let x: Vec<f64> = (0..net.num_species()).map(|_| r.gen_range(0.05..3.0)).collect();
        let (a, b) = identity_gaps(&net, &x)?;
        ensure(a == 0.0 && b < 1e-12, format!("(a) S = ZB gap {a:e}, Sv vs ZL Psi gap {b:e}"))?;
    }

    for _ in 0..50 {
        let n = r.gen_range(1..=4);
        let reference: Vec<f64> = (0..n).map(|_| r.gen_range(0.2..3.0)).collect();
        let weights: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..2.0)).collect();
        let spec = LyapunovSpec::new((0..n).collect(), weights, reference).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.2..3.0)).collect();
        let grad = pseudo_helmholtz_gradient(&spec, &x).map_err(|e| e.to_string())?;
        for i in 0..n {
            let h = 1e-6 * x[i];
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (pseudo_helmholtz(&spec, &up).map_err(|e| e.to_string())?
                - pseudo_helmholtz(&spec, &down).map_err(|e| e.to_string())?)
                / (2.0 * h);
            let rel = (fd - grad[i]).abs() / grad[i].abs().max(1e-3);
            ensure(rel < 1e-5, format!("(b) gradient entry {i}: {} vs {fd}", grad[i]))?;
        }
    }

    for _ in 0..40 {
        let m = r.gen_range(1..=4);
        let k = r.gen_range(m + 1..=m + 4);
        let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..k).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
        let a = Matrix::from_rows(&rows);
        let y_feasible: Vec<f64> = (0..k).map(|_| r.gen_range(0.0..2.0)).collect();
        let b = a.mul_vec(&y_feasible);
        let c: Vec<f64> = (0..k).map(|_| r.gen_range(0.1..3.0)).collect();
        let lp = LinearProgram::new(c).with_equalities(a, b);
        let first = lp.solve().map_err(|e| e.to_string())?;
        let second = lp.solve().map_err(|e| e.to_string())?;
        ensure(first == second, "(c) LP solve is not deterministic")?;
        ensure(first.status == LpStatus::Optimal, format!("(c) status {:?}", first.status))?;
        ensure(lp.residual(&first.y) < 1e-9 && lp.bound_violation(&first.y) < 1e-12, "(c) LP solution infeasible")?;
        for _ in 0..20 {
            let t: f64 = r.gen_range(0.0..1.0);
            let y: Vec<f64> = first.y.iter().zip(&y_feasible).map(|(u, v)| u + t * (v - u)).collect();
            ensure(
                lp.objective_value(&y) >= first.objective - 1e-9,
                "(c) a sampled feasible point beats the optimum",
            )?;
        }
    }

    for _ in 0..100 {
        let net = random_network(&mut r);
        let doc = NetworkDocument::from_network(net.clone());
        let back = parse_network::<f64>(&serialize_document(&doc)).map_err(|e| e.to_string())?;
        ensure(back.network == net, "(d) round trip changed the network")?;
    }

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let net = random_conservative_network(&mut r);
        let n = net.num_species();
        let c = Matrix::from_rows(&vec![vec![1.0]; n]);
        let x0: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..2.0)).collect();
        for method in [Method::Rk4 { h: 1e-2 }, Method::DormandPrince { rtol: 1e-8, atol: 1e-12 }] {
            let tr = integrate(&net, &x0, 5.0, &method, Some(&c)).map_err(|e| e.to_string())?;
            worst = worst.max(tr.max_conservation_residual());
        }
    }
    ensure(worst < 1e-7, format!("(e) conservation drift {worst:e}"))?;

    Ok(format!("(a)-(e) hold; worst conservation drift {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("row 2 exact reconstruction", criterion_1),
        ("row 4 exact reconstruction", criterion_2),
        ("row 1 rounded data flagged", criterion_3),
        ("conserved vectors of all rows", criterion_4),
        ("reverse reconstruction tracks the original", criterion_5),
        ("Lyapunov descent", criterion_6),
        ("uniqueness of the class equilibrium", criterion_7),
        ("property suites", criterion_8),
    ];
    let mut failed = 0;
    for (k, (label, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {} ({label}): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({label}): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
