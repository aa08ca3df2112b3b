//! Acceptance criteria, one line each. Runs without the test harness so the
//! lines are always printed and the timings are not shared with other tests.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use piston_cli::checks::{
    backaction_residuals, bench_params, experiment_coefficients, experiment_transfer, hom_g2,
    order_residuals, response_sample_deviation, scaling_slopes, Agreement, Comparison,
};
use piston_cli::presets::{backaction_phonon_cutoff, BACKACTION_G_XZPF, BACKACTION_N_TH};
use piston_core::analytic::g2_time_average;
use piston_core::{Execution, GasFamily};

struct Outcome {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn criterion<F>(id: u32, title: &'static str, budget_s: u64, f: F) -> Outcome
where
    F: FnOnce() -> anyhow::Result<(bool, String)>,
{
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e:#}")),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    let o = Outcome {
        id,
        title,
        passed: passed && elapsed <= budget,
        detail,
        elapsed,
        budget,
    };
    println!(
        "criterion {:>2} [{}] {}: {} ({:.2?} of {:?})",
        o.id,
        if o.passed { "PASS" } else { "FAIL" },
        o.title,
        o.detail,
        o.elapsed,
        o.budget
    );
    o
}

fn main() {
    let exec = Execution::default();
    let mut outcomes = Vec::new();

    outcomes.push(criterion(1, "eta reproduction", 1, || {
        let (_, eta) = experiment_coefficients();
        let rel = (eta - 1.2e-8).abs() / 1.2e-8;
        Ok((
            rel <= 0.15,
            format!("eta = {eta:.4e} s^-1, {:.1}% from 1.2e-8", 100.0 * rel),
        ))
    }));

    outcomes.push(criterion(2, "400 kHz transfer", 1, || {
        let e = experiment_transfer(6e6, 0.0)?;
        Ok((
            (3e5..=6e5).contains(&e),
            format!("{e:.4e} s^-1 in [3e5, 6e5]"),
        ))
    }));

    outcomes.push(criterion(3, "mu order of magnitude", 1, || {
        let (mu, _) = experiment_coefficients();
        let factor = (mu / 1.3e-18).max(1.3e-18 / mu);
        Ok((
            factor <= 3.0,
            format!("mu = {mu:.4e} s^-1, factor {factor:.3} from 1.3e-18"),
        ))
    }));

    outcomes.push(criterion(4, "time-averaged correlation table", 1, || {
        let table = [
            (GasFamily::Fock(1), [0.5, 0.625, 0.75]),
            (GasFamily::Coherent(1.0), [0.75, 0.875, 1.0]),
            (GasFamily::Thermal(1.0), [1.0, 1.125, 1.25]),
        ];
        let mut worst = 0.0f64;
        for (family, expected) in table {
            for (theta, want) in [0.0, FRAC_PI_4, FRAC_PI_2].into_iter().zip(expected) {
                worst = worst.max((g2_time_average(family, theta)? - want).abs());
            }
        }
        // cos²(π/4) and cos²(π/2) are not exact in binary
        Ok((
            worst <= 1e-15,
            format!("max |error| = {worst:.1e} over 9 entries"),
        ))
    }));

    outcomes.push(criterion(5, "HOM zero", 10, || {
        let g = hom_g2(exec)?;
        Ok((g.abs() <= 1e-9, format!("g_LR(lambda t = pi/2) = {g:.2e}")))
    }));

    let mut trajectories: Vec<(String, Agreement)> = Vec::new();
    let c6 = criterion(6, "oracle-analytic equivalence", 300, || {
        let mut worst = (0.0f64, String::new());
        for family in [GasFamily::Fock(1), GasFamily::Coherent(0.5)] {
            for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
                let mut c = Comparison::new(bench_params(1e-3), family, theta);
                if let GasFamily::Coherent(_) = family {
                    // displacement ~1e-3; 6 vs 12 phonons agree to 1e-15
                    c.phonon_cutoff = Some(6);
                }
                let a = c.run(exec)?;
                let label = format!("{family} theta={theta:.4}");
                if a.worst_relative() >= worst.0 {
                    worst = (a.worst_relative(), label.clone());
                }
                trajectories.push((label, a));
            }
        }
        Ok((
            worst.0 <= 1e-2,
            format!(
                "worst max-normalised error {:.3e} ({}) over 6 trajectories",
                worst.0, worst.1
            ),
        ))
    });
    let c6_elapsed = c6.elapsed;
    outcomes.push(c6);

    outcomes.push(criterion(7, "perturbation-order residual", 300, || {
        let (r1, r2) = order_residuals(0.02, exec)?;
        let ratio = r1 / r2;
        Ok((
            ratio >= 8.0,
            format!("residual {r1:.3e} -> {r2:.3e} when g halves, ratio {ratio:.2}"),
        ))
    }));

    outcomes.push(criterion(8, "scaling laws", 10, || {
        let (s2, s1) = scaling_slopes(exec)?;
        Ok((
            (s2 - 2.0).abs() <= 0.02 && (s1 - 1.0).abs() <= 0.02,
            format!("theta = 0 part slope {s2:.4}, theta = pi/2 slope {s1:.4}"),
        ))
    }));

    outcomes.push(criterion(9, "response oracle", 60, || {
        let (worst, p) = response_sample_deviation(20, 0.0, exec)?;
        Ok((
            worst <= 1e-8,
            format!(
                "max relative deviation {worst:.3e} (at lambda = {:.3}, kappa = {:.3e}, kappa_m = {:.3e})",
                p.lambda, p.kappa, p.kappa_m
            ),
        ))
    }));

    // Reuses the criterion 6 trajectories; its budget is what remains of 6's.
    let remaining = 300u64.saturating_sub(c6_elapsed.as_secs());
    outcomes.push(criterion(10, "symmetry and conservation", remaining.max(1), || {
        anyhow::ensure!(!trajectories.is_empty(), "criterion 6 produced no trajectories");
        let worst = trajectories
            .iter()
            .map(|(l, a)| (a.worst_conservation(), l, a))
            .fold(None, |acc: Option<(f64, &String, &Agreement)>, x| match acc {
                Some(b) if b.0 >= x.0 => Some(b),
                _ => Some(x),
            })
            .expect("non-empty");
        let a = worst.2;
        Ok((
            worst.0 <= 1e-9,
            format!(
                "worst ({}): |<X_M>| {:.1e}, N_total drift {:.1e}, H drift {:.1e} over {} trajectories",
                worst.1,
                a.x_m,
                a.n_total_drift,
                a.energy_drift,
                trajectories.len()
            ),
        ))
    }));

    outcomes.push(criterion(11, "back-action qualitative check", 600, || {
        let r = backaction_residuals(
            BACKACTION_G_XZPF,
            &BACKACTION_N_TH,
            2.0 * PI,
            |n| Some(backaction_phonon_cutoff(n)),
            exec,
        )?;
        let ok = r.windows(2).all(|w| w[1] >= w[0]);
        Ok((
            ok,
            format!(
                "residuals at n_th = 0, 5, 10: {:.3e}, {:.3e}, {:.3e}",
                r[0], r[1], r[2]
            ),
        ))
    }));

    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("{} ({})", o.id, o.title))
        .collect();
    println!(
        "acceptance: {} of {} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
