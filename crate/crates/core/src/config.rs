//! Scenario files.
//!
//! UTF-8 text with `[section]` headers (`system`, `left_gas`, `right_gas`,
//! `membrane`, `run`) and `key = value` lines. `#` starts a comment.
//! Unknown sections or keys are errors.
//!
//! ```text
//! [system]
//! g_xzpf = 1e-3      # or g = ..., never both
//! omega = 0
//! omega_m = 0.3
//! lambda = 1
//! mass = 1
//! kappa = 0
//! kappa_m = 0
//!
//! [left_gas]
//! family = fock
//! n = 1
//!
//! [right_gas]
//! family = fock
//! n = 1
//! theta = 0.7853981633974483
//!
//! [membrane]
//! n_th = 0
//!
//! [run]
//! name = hom
//! t_end = 18.85
//! n_steps = 100
//! engine = both
//! outputs = delta_h_m, g2_lr, dn_xm
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    Engine, GasFamily, GasSpec, MembraneSpec, Observable, ScenarioConfig, SystemParams, TimeGrid,
};

const SECTIONS: [&str; 5] = ["system", "left_gas", "right_gas", "membrane", "run"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "system" => &[
            "g", "g_xzpf", "omega", "omega_m", "lambda", "mass", "kappa", "kappa_m",
        ],
        "left_gas" | "right_gas" => &["family", "n", "mean", "theta"],
        "membrane" => &["n_th"],
        "run" => &[
            "name",
            "t_start",
            "t_end",
            "n_steps",
            "engine",
            "outputs",
            "photon_cutoff",
            "phonon_cutoff",
        ],
        _ => &[],
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key)
            .map(|e| {
                e.value.parse::<f64>().map_err(|_| Error::Parse {
                    line: e.line,
                    message: format!("`{key}` expects a number, got `{}`", e.value),
                })
            })
            .transpose()
    }

    fn required_float(&mut self, name: &str, key: &str) -> Result<f64> {
        self.float(key)?.ok_or_else(|| Error::Parse {
            line: self.line,
            message: format!("[{name}] is missing `{key}`"),
        })
    }

    fn integer(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|e| {
                e.value.parse::<usize>().map_err(|_| Error::Parse {
                    line: e.line,
                    message: format!("`{key}` expects a non-negative integer, got `{}`", e.value),
                })
            })
            .transpose()
    }
}

/// Parses scenario text. The result still has to pass [`crate::validate`].
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("malformed section header `{content}`"),
                })?
                .trim()
                .to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            if sections.contains_key(&name) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate section [{name}]"),
                });
            }
            sections.insert(
                name.clone(),
                Section {
                    line,
                    entries: BTreeMap::new(),
                },
            );
            current = Some(name);
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let name = current.as_ref().ok_or_else(|| Error::Parse {
            line,
            message: format!("`{key}` appears before any section header"),
        })?;
        if !allowed_keys(name).contains(&key.as_str()) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}` in [{name}]"),
            });
        }
        let section = sections.get_mut(name).expect("section registered");
        if section.entries.contains_key(&key) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{key}` in [{name}]"),
            });
        }
        section.entries.insert(key, Entry { line, value });
    }

    let mut section = |name: &str| -> Result<Section> {
        sections.remove(name).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing section [{name}]"),
        })
    };

    let mut system = section("system")?;
    let mut left = section("left_gas")?;
    let mut right = section("right_gas")?;
    let mut run = section("run")?;
    let mut membrane = sections.remove("membrane");

    let params = parse_system(&mut system)?;
    let left = parse_gas("left_gas", &mut left)?;
    let right = parse_gas("right_gas", &mut right)?;
    let n_th = match membrane.as_mut() {
        Some(m) => m.float("n_th")?.unwrap_or(0.0),
        None => 0.0,
    };

    let name = run
        .take("name")
        .map(|e| e.value)
        .unwrap_or_else(|| "scenario".to_string());
    let t_start = run.float("t_start")?.unwrap_or(0.0);
    let t_end = run.required_float("run", "t_end")?;
    let n_steps = run.integer("n_steps")?.ok_or_else(|| Error::Parse {
        line: run.line,
        message: "[run] is missing `n_steps`".to_string(),
    })?;
    let engine = match run.take("engine") {
        Some(e) => e.value.parse::<Engine>().map_err(|message| Error::Parse {
            line: e.line,
            message,
        })?,
        None => Engine::Analytic,
    };
    let outputs = match run.take("outputs") {
        Some(e) => e
            .value
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                Observable::from_name(s).ok_or_else(|| Error::Parse {
                    line: e.line,
                    message: format!("unknown observable `{}`", s.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?,
        None => vec![Observable::DeltaHm, Observable::G2Lr, Observable::DnXm],
    };
    let photon_cutoff = run.integer("photon_cutoff")?;
    let phonon_cutoff = run.integer("phonon_cutoff")?;

    Ok(ScenarioConfig {
        name,
        params,
        left,
        right,
        membrane: MembraneSpec { n_th },
        time_grid: TimeGrid::new(t_start, t_end, n_steps),
        engine,
        outputs,
        photon_cutoff,
        phonon_cutoff,
    })
}

fn parse_system(s: &mut Section) -> Result<SystemParams> {
    let omega_m = s.required_float("system", "omega_m")?;
    let lambda = s.required_float("system", "lambda")?;
    let mass = s.required_float("system", "mass")?;
    let omega = s.float("omega")?.unwrap_or(0.0);
    let kappa = s.float("kappa")?.unwrap_or(0.0);
    let kappa_m = s.float("kappa_m")?.unwrap_or(0.0);
    let g = s.float("g")?;
    let g_xzpf = s.float("g_xzpf")?;
    let base = SystemParams {
        g: 0.0,
        omega,
        omega_m,
        lambda,
        mass,
        kappa,
        kappa_m,
    };
    match (g, g_xzpf) {
        (Some(g), None) => Ok(base.with_g(g)),
        (None, Some(gx)) => Ok(base.with_coupling_zpf(gx)),
        (Some(_), Some(_)) => Err(Error::Parse {
            line: s.line,
            message: "[system] sets both `g` and `g_xzpf`".to_string(),
        }),
        (None, None) => Err(Error::Parse {
            line: s.line,
            message: "[system] needs `g` or `g_xzpf`".to_string(),
        }),
    }
}

fn parse_gas(name: &str, s: &mut Section) -> Result<GasSpec> {
    let family = s.take("family").ok_or_else(|| Error::Parse {
        line: s.line,
        message: format!("[{name}] is missing `family`"),
    })?;
    let theta = s.float("theta")?.unwrap_or(0.0);
    let family = match family.value.to_ascii_lowercase().as_str() {
        "fock" => {
            if s.entries.contains_key("mean") {
                return Err(Error::Parse {
                    line: s.line,
                    message: format!("[{name}] fock gases take `n`, not `mean`"),
                });
            }
            let n = s.integer("n")?.ok_or_else(|| Error::Parse {
                line: s.line,
                message: format!("[{name}] fock gas is missing `n`"),
            })?;
            GasFamily::Fock(n as u32)
        }
        kind @ ("coherent" | "thermal") => {
            if s.entries.contains_key("n") {
                return Err(Error::Parse {
                    line: s.line,
                    message: format!("[{name}] {kind} gases take `mean`, not `n`"),
                });
            }
            let mean = s.required_float(name, "mean")?;
            if kind == "coherent" {
                GasFamily::Coherent(mean)
            } else {
                GasFamily::Thermal(mean)
            }
        }
        other => {
            return Err(Error::Parse {
                line: family.line,
                message: format!("unknown gas family `{other}` (fock|coherent|thermal)"),
            })
        }
    };
    Ok(GasSpec { family, theta })
}

/// Renders a scenario in the file format; parsing the output gives back an
/// identical configuration.
pub fn to_config_string(c: &ScenarioConfig) -> String {
    let mut s = String::new();
    let p = &c.params;
    let _ = writeln!(s, "[system]");
    for (k, v) in [
        ("g", p.g),
        ("omega", p.omega),
        ("omega_m", p.omega_m),
        ("lambda", p.lambda),
        ("mass", p.mass),
        ("kappa", p.kappa),
        ("kappa_m", p.kappa_m),
    ] {
        let _ = writeln!(s, "{k} = {v:e}");
    }
    for (name, gas) in [("left_gas", &c.left), ("right_gas", &c.right)] {
        let _ = writeln!(s, "\n[{name}]");
        let _ = writeln!(s, "family = {}", gas.family.kind());
        match gas.family {
            GasFamily::Fock(n) => {
                let _ = writeln!(s, "n = {n}");
            }
            GasFamily::Coherent(m) | GasFamily::Thermal(m) => {
                let _ = writeln!(s, "mean = {m:e}");
            }
        }
        let _ = writeln!(s, "theta = {:e}", gas.theta);
    }
    let _ = writeln!(s, "\n[membrane]\nn_th = {:e}", c.membrane.n_th);
    let _ = writeln!(s, "\n[run]");
    let _ = writeln!(s, "name = {}", c.name);
    let _ = writeln!(s, "t_start = {:e}", c.time_grid.t_start);
    let _ = writeln!(s, "t_end = {:e}", c.time_grid.t_end);
    let _ = writeln!(s, "n_steps = {}", c.time_grid.n_steps);
    let _ = writeln!(s, "engine = {}", c.engine.name());
    let outputs: Vec<&str> = c.outputs.iter().map(|o| o.name()).collect();
    let _ = writeln!(s, "outputs = {}", outputs.join(", "));
    if let Some(n) = c.photon_cutoff {
        let _ = writeln!(s, "photon_cutoff = {n}");
    }
    if let Some(n) = c.phonon_cutoff {
        let _ = writeln!(s, "phonon_cutoff = {n}");
    }
    s
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::paper_params;
    use proptest::prelude::*;

    const SAMPLE: &str = "
[system]
g_xzpf = 1e-3
omega_m = 0.3
lambda = 1
mass = 1

[left_gas]
family = fock
n = 1

[right_gas]
family = fock
n = 1
theta = 0.5   # radians

[run]
name = hom
t_end = 18.85
n_steps = 100
engine = both
outputs = delta_h_m, N_L*N_R
";

    #[test]
    fn parses_sample() {
        let c = parse_config(SAMPLE).unwrap();
        assert_eq!(c.name, "hom");
        assert_eq!(c.engine, Engine::Both);
        assert_eq!(c.right.theta, 0.5);
        assert_eq!(c.left.family, GasFamily::Fock(1));
        assert_eq!(c.outputs, vec![Observable::DeltaHm, Observable::NLNR]);
        assert!((c.params.coupling_zpf() - 1e-3).abs() < 1e-18);
        assert_eq!(c.membrane.n_th, 0.0);
        assert_eq!(c.time_grid.t_start, 0.0);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = SAMPLE.replace("mass = 1", "mass = 1\nmas = 2");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("unknown key `mas`"), "{err}");
    }

    #[test]
    fn unknown_section_is_an_error() {
        let text = format!("{SAMPLE}\n[extra]\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn both_couplings_rejected() {
        let text = SAMPLE.replace("g_xzpf = 1e-3", "g_xzpf = 1e-3\ng = 2");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn bad_number_reports_line() {
        let text = SAMPLE.replace("lambda = 1", "lambda = fast");
        match parse_config(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    fn family() -> impl Strategy<Value = GasFamily> {
        prop_oneof![
            (0u32..50).prop_map(GasFamily::Fock),
            (0.0f64..1e7).prop_map(GasFamily::Coherent),
            (0.0f64..1e3).prop_map(GasFamily::Thermal),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(
            fam in family(),
            theta in 0.0f64..std::f64::consts::FRAC_PI_2,
            g in -1e6f64..1e6,
            kappa in 0.0f64..1e9,
            n_th in 0.0f64..100.0,
            t_end in 1e-9f64..1e3,
            n_steps in 2usize..5000,
            cutoff in proptest::option::of(1usize..40),
            engine in prop_oneof![Just(Engine::Analytic), Just(Engine::Oracle), Just(Engine::Both)],
        ) {
            let c = ScenarioConfig {
                name: "round-trip_1".into(),
                params: paper_params().with_g(g).with_kappa(kappa),
                left: GasSpec::vertical(fam),
                right: GasSpec::new(fam, theta),
                membrane: MembraneSpec { n_th },
                time_grid: TimeGrid::new(0.0, t_end, n_steps),
                engine,
                outputs: vec![Observable::G2Lr, Observable::Energy],
                photon_cutoff: cutoff,
                phonon_cutoff: None,
            };
            let text = to_config_string(&c);
            prop_assert_eq!(parse_config(&text).unwrap(), c);
        }
    }

    trait WithKappa {
        fn with_kappa(self, k: f64) -> Self;
    }

    impl WithKappa for SystemParams {
        fn with_kappa(mut self, k: f64) -> Self {
            self.kappa = k;
            self
        }
    }
}
