use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::path::Path;

use acclyap::{
    ark_step, build_certificate, certify_by_search, closed_form_p_bar, continuous_rate,
    convergence_bound_continuous, generalized_system, lyapunov_continuous, nesterov_system,
    obstruction_c, polyak_field, polyak_system, psd_baseline_p, psd_baseline_rate,
    quadratic_sharp_rate, reference_integrate, run, sample_grid, solve_rate, step, trace_baseline,
    trace_curve, verify_certificate, verify_certificate_with_tol, verify_continuous,
    ContinuousCertificate, DiscreteCertificate, Error, Fun1, Objective, PhaseState, Quadratic,
    SymMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{resolve_delta, resolve_moduli, GridSpec};
use crate::error::CliError;
use crate::output::{maybe, num, Table};
use crate::{ObjectiveKind, Opts};

const CURVE_MODULI: (f64, f64) = (1.0, 1e6);
const FIGURE_MODULI: (f64, f64) = (1e-3, 1.0);

fn grid(opts: &Opts, default: &str) -> Result<Vec<f64>, CliError> {
    let spec = match (opts.b_grid, opts.b) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either --b or --b-grid".into())),
        (Some(g), None) => g,
        (None, Some(b)) => GridSpec {
            min: b,
            max: b,
            count: 1,
        },
        (None, None) => default.parse().expect("valid default grid"),
    };
    Ok(spec.points())
}

fn text_out(report: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, report).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

fn oracle(kind: ObjectiveKind, m: f64, l: f64) -> Result<Box<dyn Objective<f64>>, CliError> {
    Ok(match kind {
        ObjectiveKind::Fun1 => Box::new(Fun1::new(m, l)?),
        ObjectiveKind::Quadratic => Box::new(Quadratic::diagonal(&[m, l])?),
    })
}

pub fn rate_curve(opts: &Opts) -> Result<(), CliError> {
    let (m, l) = resolve_moduli(opts.m, opts.l, opts.kappa, CURVE_MODULI)?;
    let delta = resolve_delta(opts.delta, opts.alpha, m, l)?;
    let bs = grid(opts, "0.3:3:100")?;
    let improved = trace_curve(delta, m, l, &bs)?;
    let baseline = trace_baseline(delta, m, l, &bs)?;
    let mut t = Table::new(&[
        "b",
        "r_improved",
        "feasible_improved",
        "r_baseline",
        "feasible_baseline",
    ]);
    for (i, b) in improved.iter().zip(&baseline) {
        t.push(vec![
            num(i.b),
            num(i.r),
            i.feasible.to_string(),
            num(b.r),
            b.feasible.to_string(),
        ]);
    }
    t.write(opts.out.as_deref())
}

pub fn rate_curve_continuous(opts: &Opts) -> Result<(), CliError> {
    let (m, l) = resolve_moduli(opts.m, opts.l, opts.kappa, CURVE_MODULI)?;
    let bs = grid(opts, "0.3:4:100")?;
    let mut t = Table::new(&[
        "b_bar",
        "r_bar",
        "attained",
        "r_baseline_psd",
        "r_quadratic_sharp",
    ]);
    for b in bs {
        let rate = continuous_rate(b)?;
        t.push(vec![
            num(b),
            num(rate.r_bar),
            rate.attained.to_string(),
            num(psd_baseline_rate(b)?),
            num(quadratic_sharp_rate(b, m, l)?),
        ]);
    }
    t.write(opts.out.as_deref())
}

pub fn simulate(opts: &Opts) -> Result<(), CliError> {
    let (m, l) = resolve_moduli(opts.m, opts.l, opts.kappa, FIGURE_MODULI)?;
    let delta = resolve_delta(opts.delta, opts.alpha, m, l)?;
    let b = opts.b.unwrap_or(2.0 / (1.0 + delta));
    let kind = opts.objective.unwrap_or(ObjectiveKind::Fun1);
    let f = oracle(kind, m, l)?;
    let d = f.dim();
    let pt = solve_rate(b, delta, m, l)?;
    if !pt.feasible {
        return Err(CliError::Infeasible(format!(
            "no certified rate at b = {b}, δ = {delta}"
        )));
    }
    let cert = DiscreteCertificate::from_rate(b, pt.r, delta, m, l, d)?;
    let sys = nesterov_system(delta * delta / m, b, m, l, d)?;
    let x0 = vec![opts.x0.unwrap_or(-10.0); d];
    let xi0: Vec<f64> = vec![0.0; d].into_iter().chain(x0).collect();
    let tr = run(
        &sys,
        f.as_ref(),
        &xi0,
        opts.steps.unwrap_or(2000),
        Some(&cert),
    )?;
    let mut t = Table::new(&["k", "f_gap", "dist_sq", "V_k", "bound"]);
    for k in 0..tr.len() {
        t.push(vec![
            k.to_string(),
            num(tr.f_gap[k]),
            num(tr.dist_sq[k]),
            num(tr.lyapunov[k]),
            num(tr.bound[k]),
        ]);
    }
    t.write(opts.out.as_deref())
}

pub fn ode(opts: &Opts) -> Result<(), CliError> {
    let (m, l) = resolve_moduli(opts.m, opts.l, opts.kappa, FIGURE_MODULI)?;
    let b_bar = opts.b.unwrap_or(3.0 * SQRT_2 / 2.0);
    let r_bar = opts.r.unwrap_or(1.2);
    let t_end = opts.t_end.unwrap_or(400.0);
    let h_ref = opts.h_ref.unwrap_or(1e-3);
    let every = opts.every.unwrap_or(0.1);
    if !(every > 0.0 && every.is_finite()) {
        return Err(CliError::Config(format!(
            "--every must be positive, got {every}"
        )));
    }
    let kind = opts.objective.unwrap_or(ObjectiveKind::Fun1);
    let f = oracle(kind, m, l)?;
    let d = f.dim();
    let sys = polyak_system(b_bar, m, l, d)?;
    let (ours, certified) = match build_certificate(b_bar, r_bar, m, l, d) {
        Ok(c) => (c, true),
        Err(Error::CertificateInfeasible { max_eig, .. }) => {
            eprintln!("warning: r̄ = {r_bar} is not certified at b̄ = {b_bar} (max eigenvalue {max_eig:e}); bound column left empty");
            (
                ContinuousCertificate::new(
                    closed_form_p_bar(r_bar, m, d),
                    m.sqrt() * r_bar,
                    0.0,
                    m,
                    l,
                )?,
                false,
            )
        }
        Err(e) => return Err(e.into()),
    };
    let baseline =
        ContinuousCertificate::new(psd_baseline_p(r_bar, m, d), m.sqrt() * r_bar, 0.0, m, l)?;
    let field = polyak_field(f.as_ref(), b_bar)?;
    let z0 = PhaseState::at_rest(vec![opts.x0.unwrap_or(-10.0); d]);
    let traj = reference_integrate(&field, &z0, t_end, h_ref, &sample_grid(t_end, every))?;
    let xs = f
        .minimizer()
        .expect("built-in oracles know their minimizer")
        .to_vec();
    let v0 = lyapunov_continuous(&ours, f.as_ref(), &z0)?;
    let mut t = Table::new(&["t", "V_ours", "V_psd_baseline", "dist_sq", "bound"]);
    for z in &traj.states {
        let dist: f64 = z.x.iter().zip(&xs).map(|(a, b)| (a - b) * (a - b)).sum();
        let bound = if certified {
            Some(convergence_bound_continuous(&ours, &sys, v0, z.t)?)
        } else {
            None
        };
        t.push(vec![
            num(z.t),
            num(lyapunov_continuous(&ours, f.as_ref(), z)?),
            num(lyapunov_continuous(&baseline, f.as_ref(), z)?),
            num(dist),
            maybe(bound),
        ]);
    }
    t.write(opts.out.as_deref())
}

// max |a - b| / max |b|
fn rel_dev(a: &[f64], b: &[f64]) -> f64 {
    let scale = b
        .iter()
        .fold(0.0f64, |s, x| s.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .fold(0.0f64, |s, (x, y)| s.max((x - y).abs()))
        / scale
}

pub fn ark_check(opts: &Opts) -> Result<(), CliError> {
    let seed = opts.seed.unwrap_or(0);
    let samples = opts.samples.unwrap_or(100);
    let perturb = opts.perturb_beta.unwrap_or(0.0);
    let tol = opts.tol.unwrap_or(1e-12);
    if samples == 0 {
        return Err(CliError::Config("--samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let h = rng.gen_range(1e-3..=0.3);
        let b_bar = rng.gen_range(1e-3..=3.0);
        let m = 10f64.powf(rng.gen_range(-3.0..=0.0));
        let l = m * 10f64.powf(rng.gen_range(0.0..=4.0));
        let d = rng.gen_range(1..=3);
        let spec: Vec<f64> = (0..d)
            .map(|i| match i {
                0 => m,
                _ if i + 1 == d => l,
                _ => rng.gen_range(m..=l),
            })
            .collect();
        let x_star: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let q = Quadratic::new(SymMatrix::diag(&spec), x_star)?;
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let z = PhaseState::new(v, x, 0.0)?;
        let field = polyak_field(&q, b_bar)?;
        let ark = ark_step(&z, h, &field)?;
        let beta = 1.0 - b_bar * h * q.m().sqrt() + perturb;
        let sys = generalized_system(h * h, beta, beta, q.m(), q.l(), d)?;
        let nest = step(&sys, &q, &z.stacked())?;
        worst = worst.max(rel_dev(&ark.next.stacked(), &nest));
    }
    let pass = worst <= tol;
    let report = format!(
        "ark-check: {samples} cases, seed {seed}, β perturbation {perturb:e}\nmax relative deviation {worst:e} (tolerance {tol:e})\n{}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    text_out(&report, opts.out.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Infeasible(format!(
            "ARK deviation {worst:e} exceeds {tol:e}"
        )))
    }
}

pub fn certify(opts: &Opts) -> Result<(), CliError> {
    if opts.continuous {
        return certify_continuous(opts);
    }
    let (m, l) = resolve_moduli(opts.m, opts.l, opts.kappa, CURVE_MODULI)?;
    let kappa = l / m;
    let delta = resolve_delta(opts.delta, opts.alpha, m, l)?;
    let b = opts.b.unwrap_or(2.0 / (1.0 + delta));
    let r = match opts.r {
        Some(r) => r,
        None => solve_rate(b, delta, m, l)?.r,
    };
    let beta = 1.0 - b * delta;
    let mut rep = String::new();
    let feasible = match opts.gamma {
        None => {
            let sys = nesterov_system(delta * delta / m, b, m, l, 1)?;
            let cert = DiscreteCertificate::from_rate(b, r, delta, m, l, 1)?;
            let v = match opts.tol {
                Some(tol) => verify_certificate_with_tol(&sys, &cert, tol)?,
                None => verify_certificate(&sys, &cert)?,
            };
            let _ = writeln!(
                rep,
                "system: Nesterov, b = {b}, δ = {delta}, β = {beta}, κ = {kappa}"
            );
            let _ = writeln!(rep, "rate: r = {r}, ρ² = {}", cert.rho2);
            let _ = writeln!(rep, "T max eigenvalue: {:e}", v.t_max_eig);
            let _ = writeln!(rep, "P~ min eigenvalue: {:e}", v.ptilde_min_eig);
            let _ = writeln!(rep, "tolerance: {:e}", v.tol);
            v.feasible
        }
        Some(gamma) => {
            let sys = generalized_system(delta * delta / m, beta, gamma, m, l, 1)?;
            let s = certify_by_search(&sys, r)?;
            let hat = generalized_system(delta * delta, beta, gamma, 1.0, kappa, 1)?;
            let ob = obstruction_c(&hat, &s.phat, r)?;
            let tol = opts.tol.unwrap_or(acclyap::HAT_TOL);
            let expected = delta * (kappa - 1.0) * (beta - gamma) * (beta - gamma) / 2.0;
            let _ = writeln!(
                rep,
                "system: momentum, b = {b}, δ = {delta}, β = {beta}, γ = {gamma}, κ = {kappa}"
            );
            let _ = writeln!(rep, "rate: r = {r}, ρ² = {}", 1.0 - r * delta);
            let _ = writeln!(
                rep,
                "T max eigenvalue (best searched, m = 1): {:e}",
                s.best_max_eig
            );
            let _ = writeln!(rep, "P~ min eigenvalue: {:e}", s.ptilde_min_eig);
            let _ = writeln!(rep, "tolerance: {tol:e}");
            let _ = writeln!(rep, "obstruction c: {}", ob.c);
            let _ = writeln!(
                rep,
                "  kappa term: {} (δ(κ-1)(β-γ)²/2 = {expected})",
                ob.kappa_term
            );
            let _ = writeln!(rep, "  remainder: {}", ob.remainder);
            s.best_max_eig <= tol && s.ptilde_min_eig > tol
        }
    };
    let _ = writeln!(
        rep,
        "verdict: {}",
        if feasible { "FEASIBLE" } else { "INFEASIBLE" }
    );
    text_out(&rep, opts.out.as_deref())?;
    if feasible {
        Ok(())
    } else {
        Err(CliError::Infeasible(format!("no certificate at r = {r}")))
    }
}

fn certify_continuous(opts: &Opts) -> Result<(), CliError> {
    let (m, l) = resolve_moduli(opts.m, opts.l, opts.kappa, CURVE_MODULI)?;
    let b_bar = opts.b.unwrap_or(3.0 * SQRT_2 / 2.0);
    let sup = continuous_rate(b_bar)?;
    let r_bar = opts.r.unwrap_or(sup.r_bar);
    let mut rep = String::new();
    let _ = writeln!(
        rep,
        "system: damped oscillator, b̄ = {b_bar}, m = {m}, L = {l}"
    );
    let _ = writeln!(
        rep,
        "rate: r̄ = {r_bar} (supremum {}, attained {})",
        sup.r_bar, sup.attained
    );
    let feasible = match build_certificate(b_bar, r_bar, m, l, 1) {
        Ok(cert) => {
            let sys = polyak_system(b_bar, m, l, 1)?;
            let v = verify_continuous(&sys, &cert)?;
            let tol = opts.tol.unwrap_or(v.tol);
            let _ = writeln!(rep, "certified at r̄ = {}", cert.r_bar());
            let _ = writeln!(rep, "T max eigenvalue: {:e}", v.t_max_eig);
            let _ = writeln!(rep, "P~ min eigenvalue: {:e}", v.ptilde_min_eig);
            let _ = writeln!(rep, "tolerance: {tol:e}");
            v.t_max_eig <= tol && v.ptilde_min_eig > tol
        }
        Err(Error::CertificateInfeasible {
            max_eig,
            ptilde_min_eig,
        }) => {
            let _ = writeln!(rep, "T max eigenvalue (m = 1): {max_eig:e}");
            let _ = writeln!(rep, "P~ min eigenvalue (m = 1): {ptilde_min_eig:e}");
            false
        }
        Err(e) => return Err(e.into()),
    };
    let _ = writeln!(
        rep,
        "verdict: {}",
        if feasible { "FEASIBLE" } else { "INFEASIBLE" }
    );
    text_out(&rep, opts.out.as_deref())?;
    if feasible {
        Ok(())
    } else {
        Err(CliError::Infeasible(format!(
            "no certificate at r̄ = {r_bar}"
        )))
    }
}
