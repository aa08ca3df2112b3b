//! The `validate` suite and its markdown report.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use piston_core::analytic::plateau_coefficients;
use piston_core::{paper_params, Execution, GasFamily};

use crate::checks::{
    bench_params, experiment_coefficients, experiment_transfer, g2_quadrature_gap, hom_g2,
    kappa_branches, order_residuals, plateau_gap, response_check, scaling_slopes, Check,
    Comparison,
};

pub const ETA_QUOTED: f64 = 1.2e-8;
pub const MU_QUOTED: f64 = 1.3e-18;

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Added to the closed-form `c(t)` before comparison; a test hook.
    pub perturb_c: Option<f64>,
    pub exec: Execution,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn markdown(&self) -> String {
        let mut s = String::from("# Validation report\n\n");
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            s,
            "Overall: **{status}** ({} of {} checks passed)\n",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        );
        s.push_str("| check | achieved | tolerance | status |\n|---|---|---|---|\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} |",
                c.name,
                c.achieved,
                c.tolerance,
                c.status()
            );
        }
        let detailed: Vec<_> = self
            .checks
            .iter()
            .filter(|c| !c.detail.is_empty())
            .collect();
        if !detailed.is_empty() {
            s.push_str("\n## Details\n\n");
            for c in detailed {
                let _ = writeln!(s, "- {}: {}", c.name, c.detail);
            }
        }
        if !self.notes.is_empty() {
            s.push_str("\n## Notes\n\n");
            for n in &self.notes {
                let _ = writeln!(s, "{n}\n");
            }
        }
        s
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("validation_report.md");
        std::fs::write(&path, self.markdown())?;
        Ok(path)
    }
}

fn relative(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn run_validation(opts: &ValidateOptions) -> anyhow::Result<Report> {
    let exec = opts.exec;
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    checks.push(response_check(opts.perturb_c.unwrap_or(0.0), exec)?);

    let (mu, eta) = experiment_coefficients();
    checks.push(Check::new(
        "eta at the experimental parameters",
        format!(
            "{eta:.4e} s^-1 ({:.1}% from 1.2e-8)",
            100.0 * relative(eta, ETA_QUOTED)
        ),
        "within 15%",
        relative(eta, ETA_QUOTED) <= 0.15,
    ));
    let transfer = experiment_transfer(6e6, 0.0)?;
    checks.push(Check::new(
        "long-time transfer, coherent 6e6 photons, theta = 0",
        format!("{transfer:.4e} s^-1"),
        "[3e5, 6e5] s^-1",
        (3e5..=6e5).contains(&transfer),
    ));
    let factor = (mu / MU_QUOTED).max(MU_QUOTED / mu);
    checks.push(Check::new(
        "mu at the experimental parameters",
        format!("{mu:.4e} s^-1 (factor {factor:.2} from 1.3e-18)"),
        "within a factor 3",
        factor <= 3.0,
    ));
    let plateau = plateau_coefficients(&paper_params());
    notes.push(format!(
        "**mu discrepancy.** The quoted closed forms give mu = {mu:.4e} s^-1 and eta = {eta:.4e} s^-1 \
         at the experimental parameters, read as angular frequencies with hbar = 1. \
         The quoted mu = 1.3e-18 differs by a factor {:.3}; eta matches to {:.1}%. \
         Reading any subset of g x_zpf, omega_m, lambda, kappa or the result in Hz instead of \
         rad/s does not reconcile both numbers: the best such choice keeps eta in range but \
         still leaves mu a factor 1.78 away, so the factor is reported rather than fitted away. \
         Separately, the energy envelopes settle to u = {:.4e} and v = {:.4e}: \
         the quoted forms are exactly 4x (mu) and 2x (eta) the plateau of the first-order \
         energy, a normalisation difference in the closed forms themselves. \
         `long_time_transfer` keeps the quoted forms; `plateau_transfer` uses the envelope plateau.",
        mu / MU_QUOTED,
        100.0 * relative(eta, ETA_QUOTED),
        plateau.mu,
        plateau.eta
    ));

    let gap = g2_quadrature_gap()?;
    checks.push(Check::new(
        "<g_LR>_t closed form vs quadrature (9 gas/angle pairs)",
        format!("{gap:.2e}"),
        "<= 1e-12",
        gap <= 1e-12,
    ));
    notes.push(
        "**Correlation form.** The instantaneous correlation is taken as \
         1 + sin^2(lambda t) (gamma - 1 - cos^2 theta) / 2, which vanishes at lambda t = pi/2 for \
         one indistinguishable photon per side and averages to (gamma + 3 - cos^2 theta)/4. \
         The oracle confirms both."
            .to_string(),
    );

    let hom = hom_g2(exec)?;
    checks.push(Check::new(
        "oracle g_LR at lambda t = pi/2, Fock(1) x Fock(1), theta = 0",
        format!("{hom:.2e}"),
        "|g| <= 1e-9",
        hom.abs() <= 1e-9,
    ));

    let mut cases: Vec<Comparison> = [0.0, FRAC_PI_4, FRAC_PI_2]
        .iter()
        .map(|&th| Comparison::new(bench_params(1e-3), GasFamily::Fock(1), th))
        .collect();
    let mut coherent = Comparison::new(bench_params(1e-3), GasFamily::Coherent(0.5), FRAC_PI_4);
    coherent.phonon_cutoff = Some(6);
    cases.push(coherent);
    let mut worst_rel = (0.0f64, String::new());
    let mut worst_cons = (0.0f64, String::new());
    for c in &cases {
        let a = c.run(exec)?;
        let label = format!("{} theta={:.4}", c.family, c.theta);
        if a.worst_relative() >= worst_rel.0 {
            worst_rel = (a.worst_relative(), label.clone());
        }
        if a.worst_conservation() >= worst_cons.0 {
            worst_cons = (a.worst_conservation(), label);
        }
    }
    checks.push(
        Check::new(
            "analytic vs oracle: delta_h_m, g2_lr, dn_xm (g x_zpf = 1e-3 lambda)",
            format!("{:.3e}", worst_rel.0),
            "<= 1e-2 relative",
            worst_rel.0 <= 1e-2,
        )
        .with_detail(format!("worst case {}", worst_rel.1)),
    );
    checks.push(
        Check::new(
            "oracle symmetry and conservation: <X_M>, <N_total>, <H>",
            format!("{:.3e}", worst_cons.0),
            "<= 1e-9",
            worst_cons.0 <= 1e-9,
        )
        .with_detail(format!("worst case {}", worst_cons.1)),
    );

    let (r1, r2) = order_residuals(0.02, exec)?;
    checks.push(Check::new(
        "residual reduction when g is halved (g x_zpf = 0.02 -> 0.01)",
        format!("{:.2}", r1 / r2),
        ">= 8",
        r1 / r2 >= 8.0,
    ));

    let (s2, s1) = scaling_slopes(exec)?;
    checks.push(Check::new(
        "log-log slope of long-time transfer in |alpha|^2 (theta-dependent part at 0; total at pi/2)",
        format!("{s2:.4} / {s1:.4}"),
        "2.00 +/- 0.02 / 1.00 +/- 0.02",
        (s2 - 2.0).abs() <= 0.02 && (s1 - 1.0).abs() <= 0.02,
    ));

    let pg = plateau_gap();
    checks.push(Check::new(
        "late-time envelope average vs plateau coefficients",
        format!("{pg:.2e}"),
        "<= 1e-6",
        pg <= 1e-6,
    ));

    let [(_, mu0, eta0), (k1, mu1, eta1)] = kappa_branches();
    notes.push(format!(
        "**kappa branch.** The quoted forms carry a Kronecker delta in kappa, so they jump \
         between kappa = 0 and any positive kappa. For the bench system (omega_m = 0.3, lambda = 1): \
         kappa = 0 gives mu = {mu0:.6e}, eta = {eta0:.6e}; kappa = {k1:.1e} gives \
         mu = {mu1:.6e}, eta = {eta1:.6e} (ratios {:.4} and {:.4}). \
         The undamped branch is the time average of an envelope that never settles; \
         the damped branch is its constant late-time value.",
        mu0 / mu1,
        eta0 / eta1
    ));

    Ok(Report { checks, notes })
}
