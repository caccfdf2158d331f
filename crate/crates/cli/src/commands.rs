use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use bht_core::bidisc::{theorem1_i_demo, theorem1_ii_demo, trace_csv, Theorem1IIParams, Theorem1IParams};
use bht_core::embedding::{
    adjoint_a_with_error, duality_probe, embedding_ratio_with, embedding_search, montgomery_ratio, SampledFunction,
};
use bht_core::ergodic::{
    carlson_check, discrepancy_resolution, fatou_orbit_check, integral_mean, pmeans_check, reports_to_csv,
    weyl_discrepancy,
};
use bht_core::norms::{even_index, hinf_norm_estimate, hp_norm_even, hp_norm_flow, hp_norm_mc};
use bht_core::{bohr_lift, DirichletPolynomial, Error, NormEstimate, Result};

use crate::args::{Cli, Command, Method, PolyArgs};

/// A result in both output shapes.
pub struct Output {
    pub json: Value,
    pub csv: String,
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn parse_inline(spec: &str) -> Result<DirichletPolynomial> {
    let mut pairs = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let bad = || Error::Format(format!("expected n:re[:im], got `{item}`"));
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let n: u64 = parts[0].parse().map_err(|_| bad())?;
        let re: f64 = parts[1].parse().map_err(|_| bad())?;
        let im: f64 = match parts.get(2) {
            Some(s) => s.parse().map_err(|_| bad())?,
            None => 0.0,
        };
        pairs.push((n, Complex64::new(re, im)));
    }
    DirichletPolynomial::from_pairs(pairs)
}

fn load_poly(args: &PolyArgs) -> Result<DirichletPolynomial> {
    match (&args.input, &args.poly) {
        (Some(path), None) => DirichletPolynomial::read(path),
        (None, Some(spec)) => parse_inline(spec),
        (Some(_), Some(_)) => Err(Error::Domain("give either --input or --poly, not both".into())),
        (None, None) => Err(Error::Domain("a polynomial is required (--input or --poly)".into())),
    }
}

fn norm_csv(e: &NormEstimate) -> String {
    let opt = |v: Option<String>| v.unwrap_or_default();
    format!(
        "p,method,value,power_mean,error_kind,error_bound,samples,horizon,lower_bound\n{:e},{},{:e},{:e},{},{:e},{},{},{}\n",
        e.p,
        e.method.as_str(),
        e.value,
        e.power_mean,
        e.error_bound.kind(),
        e.error_bound.value(),
        opt(e.samples.map(|s| s.to_string())),
        opt(e.horizon.map(|h| format!("{h:e}"))),
        e.lower_bound
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRecord {
    re: f64,
    im: f64,
}

fn random_g(m: usize, rng: &mut ChaCha8Rng) -> Result<SampledFunction> {
    let c: Vec<Complex64> = (0..4)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SampledFunction::from_fn(m, |t| {
        c.iter()
            .enumerate()
            .map(|(j, &cj)| cj * Complex64::cis(TAU * j as f64 * t))
            .sum()
    })
}

pub fn run(cli: &Cli) -> Result<Output> {
    let seed = cli.seed;
    match &cli.command {
        Command::Lift { poly } => {
            let lifted = bohr_lift(&load_poly(poly)?)?;
            let json: Value = serde_json::from_str(&lifted.to_json())?;
            let mut csv = String::from("beta,re,im,error_bound\n");
            for (beta, c) in lifted.iter() {
                let b: Vec<String> = beta.exponents().iter().map(u32::to_string).collect();
                writeln!(csv, "{},{:e},{:e},0", b.join(";"), c.re, c.im).unwrap();
            }
            Ok(Output { json, csv })
        }
        Command::Norm {
            poly,
            p,
            method,
            t,
            samples,
            grid,
        } => {
            let f = load_poly(poly)?;
            let est = match method {
                Method::Exact => {
                    let k = even_index(*p)
                        .ok_or_else(|| Error::Domain(format!("exact method needs an even integer p (got {p})")))?;
                    hp_norm_even(&f, k)?
                }
                Method::Flow => hp_norm_flow(&f, *p, *t)?,
                Method::Mc => hp_norm_mc(&f, *p, *samples, seed)?,
                Method::Grid => {
                    if p.is_finite() {
                        return Err(Error::Domain("grid method computes p = inf".into()));
                    }
                    hinf_norm_estimate(&f, *grid)?
                }
            };
            Ok(Output {
                json: to_json(&est),
                csv: norm_csv(&est),
            })
        }
        Command::Means { poly, sigma, t, p } => {
            let f = load_poly(poly)?;
            let rows = t
                .iter()
                .map(|&t| integral_mean(&f, *sigma, t, *p))
                .collect::<Result<Vec<_>>>()?;
            Ok(Output {
                json: to_json(&rows),
                csv: reports_to_csv(&rows),
            })
        }
        Command::Carlson { poly, sigma, t } => {
            let rows = carlson_check(&load_poly(poly)?, *sigma, t)?;
            Ok(Output {
                json: to_json(&rows),
                csv: reports_to_csv(&rows),
            })
        }
        Command::Pmeans { poly, t } => {
            let rows = pmeans_check(&load_poly(poly)?, t)?;
            Ok(Output {
                json: to_json(&rows),
                csv: reports_to_csv(&rows),
            })
        }
        Command::Embed {
            poly,
            p,
            search,
            n,
            restarts,
            steps,
            samples,
        } => {
            if *search {
                let r = embedding_search(*p, *n, *restarts, *steps, seed)?;
                Ok(Output {
                    csv: r.trace.to_csv(),
                    json: to_json(&r),
                })
            } else {
                let r = embedding_ratio_with(&load_poly(poly)?, *p, *samples, seed)?;
                let csv = format!(
                    "p,numerator,numerator_error,denominator,denominator_error,ratio,ratio_low,ratio_high,denominator_method\n{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
                    r.p,
                    r.numerator,
                    r.numerator_error,
                    r.denominator,
                    r.denominator_error,
                    r.ratio,
                    r.ratio_low,
                    r.ratio_high,
                    r.denominator_method.as_str()
                );
                Ok(Output { json: to_json(&r), csv })
            }
        }
        Command::Montgomery { poly, p, t, eps } => {
            let r = montgomery_ratio(&load_poly(poly)?, *p, *t, *eps)?;
            let csv = format!(
                "p,T,eps,N,ratio,numerator,numerator_error\n{:e},{:e},{:e},{},{:e},{:e},{:e}\n",
                p, t, eps, r.n, r.ratio, r.numerator, r.numerator_error
            );
            Ok(Output { json: to_json(&r), csv })
        }
        Command::Adjoint { poly, g, samples, n } => {
            let g = match g {
                Some(path) => {
                    let records: Vec<SampleRecord> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                    SampledFunction::new(records.into_iter().map(|r| Complex64::new(r.re, r.im)).collect())?
                }
                None => random_g(*samples, &mut ChaCha8Rng::seed_from_u64(seed))?,
            };
            let (ag, errors) = adjoint_a_with_error(&g, *n)?;
            let duality = match (&poly.input, &poly.poly) {
                (None, None) => None,
                _ => Some(duality_probe(&load_poly(poly)?, &g)?),
            };
            let mut csv = String::from("n,re,im,quadrature_error\n");
            for ((k, c), e) in ag.coefficients().iter().zip(&errors) {
                writeln!(csv, "{k},{:e},{:e},{e:e}", c.re, c.im).unwrap();
            }
            if let Some(d) = &duality {
                writeln!(
                    csv,
                    "# pairing left={:e}{:+e}i right={:e}{:+e}i difference={:e} quadrature_error={:e}",
                    d.left.re, d.left.im, d.right.re, d.right.im, d.difference, d.quadrature_error
                )
                .unwrap();
            }
            Ok(Output {
                json: json!({ "coefficients": ag.to_records(), "quadrature_error": errors, "duality": duality }),
                csv,
            })
        }
        Command::RudinDemo2 {
            eps,
            t_max,
            pieces,
            order,
            degree,
            k_init,
            doublings,
            delta,
            trace_samples,
            grid,
            trace_csv: trace_path,
        } => {
            let params = Theorem1IIParams {
                eps: *eps,
                t_max: *t_max,
                pieces: *pieces,
                order: *order,
                degree: *degree,
                k_init: *k_init,
                max_doublings: *doublings,
                delta: *delta,
                trace_samples: *trace_samples,
                boundary_grid: *grid,
                interior_grid: *grid,
                interior_radii: vec![0.5, 0.9, 0.99, 1.0 - delta],
                ..Default::default()
            };
            let r = theorem1_ii_demo(&params)?;
            let csv = trace_csv(&r.trace);
            if let Some(path) = trace_path {
                std::fs::write(path, &csv)?;
            }
            let s = &r.trace_stats;
            let summary = format!(
                "# converged={} K={:e} h2_norm={:e} h2_taylor={:e} interior_sup={:e} trace_mean={:e} fraction_above_{}={:e}\n",
                r.converged, r.k, r.h2_norm, r.h2_taylor, r.interior_sup, s.mean, s.threshold, s.fraction_above
            );
            Ok(Output {
                json: to_json(&r),
                csv: summary + &csv,
            })
        }
        Command::RudinDemo1 {
            eps,
            stages,
            order,
            pieces,
            k,
            delta,
            t_limit,
            trace_csv: trace_path,
        } => {
            let params = Theorem1IParams {
                eps: *eps,
                stages: *stages,
                order: *order,
                pieces: *pieces,
                k: *k,
                delta: *delta,
                t_limit: *t_limit,
                ..Default::default()
            };
            let r = theorem1_i_demo(&params)?;
            let csv = trace_csv(&r.trace);
            if let Some(path) = trace_path {
                std::fs::write(path, &csv)?;
            }
            let mut summary = String::new();
            for s in &r.stages {
                writeln!(
                    summary,
                    "# stage={} t={:e} mean={:e} area={:e}",
                    s.index, s.t, s.mean, s.area
                )
                .unwrap();
            }
            Ok(Output {
                json: to_json(&r),
                csv: summary + &csv,
            })
        }
        Command::Fatou {
            poly,
            thetas,
            orbits,
            t_samples,
            t_max,
        } => {
            let big_f = bohr_lift(&load_poly(poly)?)?;
            let d = big_f.dimension().max(1);
            let scale: f64 = big_f.iter().map(|(_, c)| c.norm()).sum();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut reports = Vec::with_capacity(*orbits);
            let mut csv = String::from("orbit,t,limit_re,limit_im,deviation,continuity_bound,within\n");
            let mut violations = 0usize;
            for orbit in 0..*orbits {
                let tau: Vec<Complex64> = (0..d).map(|_| Complex64::cis(rng.gen_range(0.0..TAU))).collect();
                let mut ts: Vec<f64> = (0..*t_samples).map(|_| rng.gen_range(0.0..*t_max)).collect();
                ts.sort_by(f64::total_cmp);
                let rep = fatou_orbit_check(&big_f, &tau, thetas, &ts)?;
                for row in &rep.rows {
                    // allowance for rounding in the two evaluations
                    let within = row.deviation <= rep.continuity_bound + 1e-13 * scale.max(1.0);
                    violations += usize::from(!within);
                    writeln!(
                        csv,
                        "{orbit},{:e},{:e},{:e},{:e},{:e},{within}",
                        row.t, row.limit.re, row.limit.im, row.deviation, rep.continuity_bound
                    )
                    .unwrap();
                }
                reports.push(json!({ "orbit": orbit, "tau": tau, "report": rep }));
            }
            Ok(Output {
                json: json!({ "orbits": reports, "violations": violations }),
                csv,
            })
        }
        Command::Weyl { d, t, samples } => {
            let disc = weyl_discrepancy(*d, *t, *samples)?;
            // the grid value is a lower bound; the true value is at most disc + res
            let res = discrepancy_resolution(*d);
            Ok(Output {
                json: json!({
                    "d": d, "T": t, "samples": samples, "discrepancy": disc,
                    "error_kind": "one-sided", "error_bound": res,
                }),
                csv: format!(
                    "d,T,samples,discrepancy,error_kind,error_bound\n{d},{t:e},{samples},{disc:e},one-sided,{res:e}\n"
                ),
            })
        }
    }
}
