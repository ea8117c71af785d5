//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 1 7 13`.

use std::f64::consts::PI;
use std::process::ExitCode;
use wickflow::acceptance::{run_criterion, Criterion, CRITERIA, KNOWN_SHORTFALLS};
use wickflow::milt::{bridge_1p1_moment_exact, expected_cross_alpha, gamma_fn, levy_moment_bound};
use wickflow::shifts::circle_intersection_exponential;
use wickflow::skorokhod::hermite;
use wickflow::stats::Workers;

/// Runtime ceilings in seconds.
fn time_limit(id: u32) -> Option<f64> {
    match id {
        1 | 7 => Some(1.0),
        2 => Some(60.0),
        3 => Some(600.0),
        5 => Some(900.0),
        11 => Some(1800.0),
        _ => None,
    }
}

struct Frozen {
    label: &'static str,
    value: f64,
    expected: f64,
    tol: f64,
}

/// Probabilists' Hermite polynomials written out by hand.
fn hermite_by_hand(k: usize, x: f64) -> f64 {
    let coeffs: [&[f64]; 9] = [
        &[1.0],
        &[0.0, 1.0],
        &[-1.0, 0.0, 1.0],
        &[0.0, -3.0, 0.0, 1.0],
        &[3.0, 0.0, -6.0, 0.0, 1.0],
        &[0.0, 15.0, 0.0, -10.0, 0.0, 1.0],
        &[-15.0, 0.0, 45.0, 0.0, -15.0, 0.0, 1.0],
        &[0.0, -105.0, 0.0, 105.0, 0.0, -21.0, 0.0, 1.0],
        &[105.0, 0.0, -420.0, 0.0, 210.0, 0.0, -28.0, 0.0, 1.0],
    ];
    coeffs[k].iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Closed-form constants frozen independently of the library, checked
/// before the Monte Carlo part of each criterion.
fn frozen(id: u32) -> Vec<Frozen> {
    match id {
        1 => {
            let mut worst: f64 = 0.0;
            for k in 0..=8 {
                for x in -3..=3 {
                    let x = f64::from(x);
                    worst = worst.max((hermite(k, x) - hermite_by_hand(k, x)).abs());
                }
            }
            vec![Frozen { label: "hermite table", value: worst, expected: 0.0, tol: 1e-12 }]
        }
        5 | 11 => {
            // sqrt(pi) t^{k/2} k! / (2^k Gamma((k+1)/2)) at t = 1:
            // k = 1 gives sqrt(pi) / (2 Gamma(1)), k = 2 gives 2 sqrt(pi) / (4 Gamma(3/2)) = 1.
            let by_formula = |k: u32| {
                let kf = f64::from(k);
                PI.sqrt() * gamma_fn(kf + 1.0) / (2f64.powi(k as i32) * gamma_fn((kf + 1.0) / 2.0))
            };
            vec![
                Frozen { label: "E alpha formula k=1", value: by_formula(1), expected: 0.886_226_925_452_758, tol: 1e-14 },
                Frozen { label: "E alpha^2 formula k=2", value: by_formula(2), expected: 1.0, tol: 1e-14 },
                Frozen { label: "E alpha library k=1", value: bridge_1p1_moment_exact(1, 1.0).unwrap(), expected: 0.886_226_925_452_758, tol: 1e-14 },
                Frozen { label: "E alpha^2 library k=2", value: bridge_1p1_moment_exact(2, 1.0).unwrap(), expected: 1.0, tol: 1e-14 },
            ]
        }
        6 => vec![
            Frozen { label: "intersection exponential gamma=0.5", value: circle_intersection_exponential(0.5), expected: 1.180_340_599_016_096, tol: 1e-12 },
            Frozen { label: "intersection exponential gamma=0", value: circle_intersection_exponential(0.0), expected: 1.0, tol: 0.0 },
        ],
        8 => vec![Frozen {
            label: "two-state off-diagonal",
            value: (1.0 - (-2.0f64).exp()) / 2.0,
            expected: 0.432_332_358_381_693_6,
            tol: 1e-15,
        }],
        9 => vec![Frozen {
            label: "cross alpha (1, 2)",
            value: expected_cross_alpha(1.0, 2.0).unwrap(),
            expected: 0.220_635_600_152_652,
            tol: 1e-14,
        }],
        10 => vec![Frozen {
            label: "levy bound k=1 r=1",
            value: levy_moment_bound(1, 1.0, 1.0 / (2.0 * PI)).unwrap(),
            expected: 1.176_004_802_928_13,
            tol: 1e-12,
        }],
        _ => Vec::new(),
    }
}

fn report(c: &Criterion, frozen_ok: bool, time_ok: bool) -> bool {
    for line in c.detail_lines() {
        println!("{line}");
    }
    let passed = c.passed() && frozen_ok && time_ok;
    let mut line = c.status_line();
    if !passed {
        line.replace_range(0..4, "FAIL");
    }
    if !time_ok {
        line.push_str("  over time limit");
    }
    if !passed && KNOWN_SHORTFALLS.contains(&c.id) {
        line.push_str("  [known shortfall of the truncated basis, see README]");
    }
    println!("{line}");
    passed
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u32> = CRITERIA
        .iter()
        .map(|(i, _)| *i)
        .filter(|i| selected.is_empty() || selected.contains(i))
        .collect();
    let mut unexpected = Vec::new();
    let mut passed_count = 0;
    for id in &ids {
        let mut frozen_ok = true;
        for f in frozen(*id) {
            let ok = (f.value - f.expected).abs() <= f.tol;
            frozen_ok &= ok;
            println!(
                "    {} oracle {}: {:.15} vs {:.15}",
                if ok { "ok  " } else { "FAIL" },
                f.label,
                f.value,
                f.expected
            );
        }
        let c = match run_criterion(*id, Workers::Auto) {
            Ok(c) => c,
            Err(e) => {
                println!("FAIL {id:>2}  error: {e}");
                unexpected.push(*id);
                continue;
            }
        };
        let time_ok = time_limit(*id).is_none_or(|limit| c.seconds <= limit);
        if report(&c, frozen_ok, time_ok) {
            passed_count += 1;
        } else if !KNOWN_SHORTFALLS.contains(id) {
            unexpected.push(*id);
        }
    }
    println!("acceptance: {passed_count}/{} criteria passed", ids.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
