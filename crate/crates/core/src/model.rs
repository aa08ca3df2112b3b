//! Physical parameters, gas specifications and scenarios.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Cavity and membrane constants, ħ = 1.
///
/// Rates are angular frequencies (s⁻¹), `mass` is in kg and `g` is a
/// coupling per unit length. Only the combination `g · x_zpf` and the mass
/// ratio `g²/m = 2 ω_M (g x_zpf)²` enter any observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub g: f64,
    pub omega: f64,
    pub omega_m: f64,
    pub lambda: f64,
    pub mass: f64,
    pub kappa: f64,
    pub kappa_m: f64,
}

impl SystemParams {
    /// Mechanical zero-point uncertainty `1/√(2 m ω_M)`.
    pub fn x_zpf(&self) -> f64 {
        1.0 / (2.0 * self.mass * self.omega_m).sqrt()
    }

    /// Single-photon coupling rate `g · x_zpf`.
    pub fn coupling_zpf(&self) -> f64 {
        self.g * self.x_zpf()
    }

    /// Returns a copy whose `g` gives the requested `g · x_zpf`.
    pub fn with_coupling_zpf(mut self, g_xzpf: f64) -> Self {
        self.g = g_xzpf / self.x_zpf();
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Force-per-mass scale `g/m` of the photon-imbalance drive.
    pub fn g_over_m(&self) -> f64 {
        self.g / self.mass
    }

    /// Invariant violations, empty when the parameter set is usable.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        let named = [
            ("g", self.g),
            ("omega", self.omega),
            ("omega_m", self.omega_m),
            ("lambda", self.lambda),
            ("mass", self.mass),
            ("kappa", self.kappa),
            ("kappa_m", self.kappa_m),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                out.push(format!("system.{name} must be finite (got {v})"));
            }
        }
        for (name, v) in [
            ("omega_m", self.omega_m),
            ("lambda", self.lambda),
            ("mass", self.mass),
        ] {
            if v.is_finite() && v <= 0.0 {
                out.push(format!("system.{name} must be > 0 (got {v})"));
            }
        }
        for (name, v) in [
            ("omega", self.omega),
            ("kappa", self.kappa),
            ("kappa_m", self.kappa_m),
        ] {
            if v.is_finite() && v < 0.0 {
                out.push(format!("system.{name} must be >= 0 (got {v})"));
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(issues))
        }
    }

    /// Both damping rates vanish.
    pub fn is_closed(&self) -> bool {
        self.kappa == 0.0 && self.kappa_m == 0.0
    }
}

/// Experimental parameter set: a 45 ng membrane at ω_M = 350 kHz,
/// cavity at 20 THz, tunnelling at 34 GHz, κ = 85 kHz, κ_M = 1 Hz and
/// g·x_zpf = 3.3 kHz. Every quoted rate is read as an angular frequency.
pub fn paper_params() -> SystemParams {
    SystemParams {
        g: 0.0,
        omega: 20e12,
        omega_m: 350e3,
        lambda: 34e9,
        mass: 45e-12,
        kappa: 85e3,
        kappa_m: 1.0,
    }
    .with_coupling_zpf(3.3e3)
}

/// Photon-number statistics of one gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GasFamily {
    Fock(u32),
    Coherent(f64),
    Thermal(f64),
}

impl GasFamily {
    pub fn mean(&self) -> f64 {
        match *self {
            GasFamily::Fock(n) => n as f64,
            GasFamily::Coherent(m) | GasFamily::Thermal(m) => m,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GasFamily::Fock(_) => "fock",
            GasFamily::Coherent(_) => "coherent",
            GasFamily::Thermal(_) => "thermal",
        }
    }

    /// Same family with a new mean; Fock numbers are rounded.
    pub fn with_mean(&self, mean: f64) -> GasFamily {
        match self {
            GasFamily::Fock(_) => GasFamily::Fock(mean.round().max(0.0) as u32),
            GasFamily::Coherent(_) => GasFamily::Coherent(mean),
            GasFamily::Thermal(_) => GasFamily::Thermal(mean),
        }
    }
}

impl fmt::Display for GasFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GasFamily::Fock(n) => write!(f, "Fock({n})"),
            GasFamily::Coherent(m) => write!(f, "Coherent({m})"),
            GasFamily::Thermal(m) => write!(f, "Thermal({m})"),
        }
    }
}

/// One half-cavity's photon gas: number statistics plus polarisation angle.
///
/// `theta = 0` is vertical polarisation. The left gas is always vertical;
/// distinguishability is carried by the right gas alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSpec {
    pub family: GasFamily,
    pub theta: f64,
}

impl GasSpec {
    pub fn new(family: GasFamily, theta: f64) -> Self {
        GasSpec { family, theta }
    }

    pub fn vertical(family: GasFamily) -> Self {
        GasSpec { family, theta: 0.0 }
    }

    pub fn mean(&self) -> f64 {
        self.family.mean()
    }

    fn issues(&self, side: &str) -> Vec<String> {
        let mut out = Vec::new();
        let m = self.family.mean();
        if !m.is_finite() || m < 0.0 {
            out.push(format!("{side}.mean must be finite and >= 0 (got {m})"));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.theta) {
            out.push(format!(
                "{side}.theta must lie in [0, pi/2] (got {})",
                self.theta
            ));
        }
        out
    }
}

/// Initial thermal state of the membrane. Its mean position and momentum
/// vanish by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MembraneSpec {
    pub n_th: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    /// Number of samples, endpoints included.
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Self {
        TimeGrid {
            t_start,
            t_end,
            n_steps,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.n_steps.max(2);
        let dt = (self.t_end - self.t_start) / (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.t_end
                } else {
                    self.t_start + dt * k as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Analytic,
    Oracle,
    Both,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Oracle => "oracle",
            Engine::Both => "both",
        }
    }

    pub fn uses_oracle(&self) -> bool {
        matches!(self, Engine::Oracle | Engine::Both)
    }

    pub fn uses_analytic(&self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(Engine::Analytic),
            "oracle" => Ok(Engine::Oracle),
            "both" => Ok(Engine::Both),
            other => Err(format!("unknown engine `{other}` (analytic|oracle|both)")),
        }
    }
}

/// Quantities reported along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    /// ⟨H_M(t)⟩ − ⟨H_M(0)⟩.
    DeltaHm,
    /// Two-mode correlation ⟨N_L N_R⟩ / (⟨N_L⟩⟨N_R⟩).
    G2Lr,
    /// Symmetrised ⟨ΔN X_M⟩.
    DnXm,
    Hm,
    NL,
    NR,
    NLNR,
    XM,
    PM,
    NTotal,
    /// Total energy ⟨H⟩.
    Energy,
}

impl Observable {
    pub const ALL: [Observable; 11] = [
        Observable::DeltaHm,
        Observable::G2Lr,
        Observable::DnXm,
        Observable::Hm,
        Observable::NL,
        Observable::NR,
        Observable::NLNR,
        Observable::XM,
        Observable::PM,
        Observable::NTotal,
        Observable::Energy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::DeltaHm => "delta_h_m",
            Observable::G2Lr => "g2_lr",
            Observable::DnXm => "dn_xm",
            Observable::Hm => "h_m",
            Observable::NL => "n_l",
            Observable::NR => "n_r",
            Observable::NLNR => "n_l_n_r",
            Observable::XM => "x_m",
            Observable::PM => "p_m",
            Observable::NTotal => "n_total",
            Observable::Energy => "energy",
        }
    }

    /// Accepts the snake-case column names and the operator spellings
    /// `H_M`, `N_L`, `N_R`, `N_L*N_R`, `dN*X_M`, `X_M`, `P_M`, `N_total`, `H`.
    pub fn from_name(s: &str) -> Option<Observable> {
        let s = s.trim();
        let by_symbol = match s {
            "H_M" => Some(Observable::Hm),
            "N_L" => Some(Observable::NL),
            "N_R" => Some(Observable::NR),
            "N_L*N_R" | "N_L·N_R" => Some(Observable::NLNR),
            "dN*X_M" | "ΔN·X_M" | "ΔN*X_M" => Some(Observable::DnXm),
            "X_M" => Some(Observable::XM),
            "P_M" => Some(Observable::PM),
            "N_total" => Some(Observable::NTotal),
            "H" => Some(Observable::Energy),
            "ΔH_M" | "dH_M" => Some(Observable::DeltaHm),
            _ => None,
        };
        by_symbol.or_else(|| Observable::ALL.iter().copied().find(|o| o.name() == s))
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::from_name(s).ok_or_else(|| Error::UnknownObservable(s.trim().to_string()))
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A complete, serialisable run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub params: SystemParams,
    pub left: GasSpec,
    pub right: GasSpec,
    pub membrane: MembraneSpec,
    pub time_grid: TimeGrid,
    pub engine: Engine,
    pub outputs: Vec<Observable>,
    /// Oracle basis cutoffs; chosen automatically when absent.
    pub photon_cutoff: Option<usize>,
    pub phonon_cutoff: Option<usize>,
}

impl ScenarioConfig {
    /// Identical gases on both sides, the right one rotated by `theta`.
    pub fn symmetric(
        name: &str,
        params: SystemParams,
        family: GasFamily,
        theta: f64,
        time_grid: TimeGrid,
    ) -> Self {
        ScenarioConfig {
            name: name.to_string(),
            params,
            left: GasSpec::vertical(family),
            right: GasSpec::new(family, theta),
            membrane: MembraneSpec::default(),
            time_grid,
            engine: Engine::Analytic,
            outputs: vec![Observable::DeltaHm, Observable::G2Lr, Observable::DnXm],
            photon_cutoff: None,
            phonon_cutoff: None,
        }
    }
}

/// A scenario that passed [`validate`], with its sample times expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedScenario {
    config: ScenarioConfig,
    times: Vec<f64>,
}

impl ValidatedScenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn into_config(self) -> ScenarioConfig {
        self.config
    }
}

/// Checks every scenario invariant and reports all violations at once.
pub fn validate(config: ScenarioConfig) -> Result<ValidatedScenario> {
    let mut issues = config.params.issues();
    issues.extend(config.left.issues("left_gas"));
    issues.extend(config.right.issues("right_gas"));
    if config.left.theta != 0.0 {
        issues.push(format!(
            "left_gas.theta must be 0: the left gas is vertically polarised (got {})",
            config.left.theta
        ));
    }
    if config.left.family != config.right.family {
        issues.push(format!(
            "left and right gases must share the same number distribution ({} vs {})",
            config.left.family, config.right.family
        ));
    }
    let n_th = config.membrane.n_th;
    if !n_th.is_finite() || n_th < 0.0 {
        issues.push(format!(
            "membrane.n_th must be finite and >= 0 (got {n_th})"
        ));
    }
    let grid = config.time_grid;
    if !(grid.t_start.is_finite() && grid.t_start >= 0.0) {
        issues.push(format!("run.t_start must be >= 0 (got {})", grid.t_start));
    }
    if !(grid.t_end.is_finite() && grid.t_end > grid.t_start) {
        issues.push(format!(
            "run.t_end must exceed t_start (got {} <= {})",
            grid.t_end, grid.t_start
        ));
    }
    if grid.n_steps < 2 {
        issues.push(format!("run.n_steps must be >= 2 (got {})", grid.n_steps));
    }
    if config.outputs.is_empty() {
        issues.push("run.outputs must name at least one observable".to_string());
    }
    if config.engine.uses_oracle() && !config.params.is_closed() {
        issues.push("the oracle engine requires kappa = kappa_m = 0".to_string());
    }
    if config.name.trim().is_empty()
        || !config
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
    {
        issues.push(format!(
            "run.name must be a non-empty file stem of [A-Za-z0-9_.-] (got `{}`)",
            config.name
        ));
    }
    if !issues.is_empty() {
        return Err(Error::Invalid(issues));
    }
    let times = grid.times();
    Ok(ValidatedScenario { config, times })
}

/// Observable columns sampled on a shared time axis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<(Observable, Vec<f64>)>,
}

impl TimeSeries {
    pub fn get(&self, obs: Observable) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(o, _)| *o == obs)
            .map(|(_, v)| v.as_slice())
    }
}
