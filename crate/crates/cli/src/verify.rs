//! `verify` suites. Each check becomes one output record; the outcome fails
//! if any check fails.

use linecross_core::crossprob::{parse_rat, phi, phi_asymptotic, psi};
use linecross_core::exactcomb::{catalan_m, check_identity_zero, dp_count, first_passage_n, s_convolution_check};
use linecross_core::gfroots::{solve_g, solve_h, solve_phi0, DomainBound};
use linecross_core::{CountKind, RootConfig};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::output::num;
use crate::{Outcome, OutputRecord, Status, Suite};

struct Check {
    suite: &'static str,
    name: String,
    pass: bool,
    detail: Value,
}

fn identities() -> Vec<Check> {
    let mut out = Vec::new();
    for a in ["0", "1", "2", "10", "1/2", "3/2", "7/3", "-5/4"] {
        let alpha = parse_rat(a).expect("literal parses");
        let nonzero: Vec<u64> = (1..=20).filter(|&k| !check_identity_zero(&alpha, k).is_ok_and(|v| v.is_zero())).collect();
        out.push(Check {
            suite: "identities",
            name: format!("alternating_sum_alpha_{a}"),
            pass: nonzero.is_empty(),
            detail: json!({ "k_max": 20, "nonzero_at": nonzero }),
        });
    }
    out
}

fn convolutions() -> Vec<Check> {
    let mut out = Vec::new();
    for p in 1..=5u64 {
        let weak = dp_count(p, 0, 12, CountKind::WeaklyBelow).expect("p >= 1");
        let closed = (0..=12u64).all(|n| weak.entries[n as usize] == catalan_m(p, n));
        out.push(Check {
            suite: "convolutions",
            name: format!("closed_form_p{p}"),
            pass: closed,
            detail: json!({ "n_max": 12 }),
        });
        let strict = dp_count(p, 0, 12, CountKind::StrictlyBelow).expect("p >= 1");
        out.push(Check {
            suite: "convolutions",
            name: format!("first_passage_p{p}"),
            pass: first_passage_n(p, 12) == strict.entries,
            detail: json!({ "n_max": 12 }),
        });
        for d in 1..=3u64 {
            out.push(Check {
                suite: "convolutions",
                name: format!("intercept_convolution_p{p}_d{d}"),
                pass: s_convolution_check(p, d, 10).unwrap_or(false),
                detail: json!({ "n_max": 10 }),
            });
        }
    }
    out
}

fn roots(cfg: &RootConfig<f64>) -> Vec<Check> {
    let mut out = Vec::new();
    for p in 1..=6u64 {
        let x_max = DomainBound::<f64>::new(p).expect("p >= 1").x_max;
        let mut worst_h: f64 = 0.0;
        let mut worst_hg: f64 = 0.0;
        let mut ok = true;
        for i in 0..=20 {
            let x = x_max * i as f64 / 20.0;
            match (solve_g(p, x, cfg), solve_h(p, x, cfg)) {
                (Ok(g), Ok(h)) => {
                    worst_h = worst_h.max((x * h.value.powi(p as i32 + 1) - (h.value - 1.0)).abs());
                    worst_hg = worst_hg.max((h.value * (1.0 - g.value) - 1.0).abs());
                }
                _ => ok = false,
            }
        }
        out.push(Check {
            suite: "roots",
            name: format!("h_equation_p{p}"),
            pass: ok && worst_h <= 1e-11 && worst_hg <= 1e-11,
            detail: json!({ "max_h_residual": num(worst_h), "max_hg_residual": num(worst_hg) }),
        });

        let mut worst_phi: f64 = 0.0;
        let mut worst_psi: f64 = 0.0;
        let mut monotone = true;
        for beta in [0.25, 0.5, 1.0, 2.0, p as f64, p as f64 + 1.5] {
            let (Ok(r0), Ok(psi0)) = (solve_phi0(beta, p, cfg), psi(beta, p, 0, cfg)) else {
                ok = false;
                continue;
            };
            if beta >= p as f64 {
                worst_psi = worst_psi.max((psi0.value - 2.0 / (beta + 1.0)).abs());
            }
            for d in 0..=5u64 {
                if let Ok(v) = phi(beta, p, d, cfg) {
                    worst_phi = worst_phi.max((v.value - r0.value.powi(d as i32 + 1)).abs());
                } else {
                    ok = false;
                }
            }
            if p > 1 {
                let lower = solve_phi0(beta, p - 1, cfg).map_or(f64::NAN, |r| r.value);
                monotone &= r0.value <= lower;
            }
        }
        out.push(Check {
            suite: "roots",
            name: format!("crossing_power_law_p{p}"),
            pass: ok && worst_phi <= 1e-10 && worst_psi <= 1e-10 && monotone,
            detail: json!({ "max_power_law_error": num(worst_phi), "max_psi_error": num(worst_psi), "monotone_in_p": monotone }),
        });
    }
    out
}

fn asymptotics(cfg: &RootConfig<f64>) -> Vec<Check> {
    let mut ratios = Vec::new();
    let mut below = Vec::new();
    for p in 3..=15u64 {
        let (Ok(exact), Ok(approx)) = (phi(1.0, p, 0, cfg), phi_asymptotic(1.0, p)) else {
            below.push(p);
            continue;
        };
        let x1 = 2f64.powi(-(p as i32) - 1);
        ratios.push((exact.value - approx.value).abs() / x1);
        if exact.value < approx.value {
            below.push(p);
        }
    }
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let ratios_json: Vec<Value> = ratios.iter().map(|r| num(*r)).collect();
    vec![
        Check {
            suite: "asymptotics",
            name: "relative_error_decreasing".into(),
            pass: decreasing && ratios.len() == 13,
            detail: json!({ "beta": 1, "p_range": [3, 15], "ratios": ratios_json }),
        },
        Check {
            suite: "asymptotics",
            name: "approximation_is_lower".into(),
            pass: below.is_empty(),
            detail: json!({ "violations": below }),
        },
    ]
}

pub fn cmd_verify(suite: Suite) -> Outcome {
    let cfg = RootConfig::default();
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Identities {
        checks.extend(identities());
    }
    if all || suite == Suite::Convolutions {
        checks.extend(convolutions());
    }
    if all || suite == Suite::Roots {
        checks.extend(roots(&cfg));
    }
    if all || suite == Suite::Asymptotics {
        checks.extend(asymptotics(&cfg));
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("{}/{}", c.suite, c.name)).collect();
    let records = checks
        .into_iter()
        .map(|c| {
            OutputRecord::new(
                "verify",
                json!({ "suite": c.suite, "check": c.name }),
                json!({ "pass": c.pass, "detail": c.detail }),
            )
        })
        .collect();
    let mut out = Outcome::ok(records);
    if !failed.is_empty() {
        out.status = Status::CheckFailed;
        out.notes.push(format!("failed checks: {}", failed.join(", ")));
    }
    out
}
