use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use piston_core::config::load_config;
use piston_core::oracle::{run_scenario, write_dump, OracleOptions};
use piston_core::{validate, Engine, Execution};

use piston_cli::presets::{preset, PRESETS};
use piston_cli::report::{run_validation, ValidateOptions};
use piston_cli::sweep::{sweep, Axis, Summary, ValueSpec};
use piston_cli::{exit_code, ValidationFailed};

#[derive(Parser)]
#[command(name = "piston", version, about = "Photon-gas piston simulator")]
struct Cli {
    /// Worker threads (default: all logical cores). 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Analytic,
    Oracle,
    Both,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Analytic => Engine::Analytic,
            EngineArg::Oracle => Engine::Oracle,
            EngineArg::Both => Engine::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        config: PathBuf,
        /// Overrides the engine named in the file.
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
        #[arg(long, env = "PISTON_OUT_DIR", default_value = "out")]
        out: PathBuf,
        /// Also write the final oracle state as `<name>.pstn`.
        #[arg(long)]
        dump: bool,
    },
    /// Sweep one parameter and record scalar summaries.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: Axis,
        /// V0:V1:N[:log]
        #[arg(long)]
        values: String,
        /// Comma-separated summary names.
        #[arg(long, value_delimiter = ',')]
        summary: Vec<Summary>,
        #[arg(long, env = "PISTON_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Regenerate a built-in figure.
    Preset {
        #[arg(value_parser = PRESETS)]
        name: String,
        #[arg(long, env = "PISTON_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Run the cross-engine validation suite.
    Validate {
        #[arg(long, env = "PISTON_OUT_DIR", default_value = "out")]
        out: PathBuf,
        /// Offset added to the closed-form c(t) (fault injection).
        #[arg(long, hide = true)]
        inject_c_offset: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn execution(jobs: Option<usize>) -> anyhow::Result<Execution> {
    match jobs {
        Some(0) => anyhow::bail!("--jobs must be at least 1"),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("building the worker pool")?;
            let _ = n;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn report_written(path: &Path) {
    println!("wrote {}", path.display());
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let exec = execution(cli.jobs)?;
    match cli.command {
        Command::Run {
            config,
            engine,
            out,
            dump,
        } => {
            let cfg =
                load_config(&config).with_context(|| format!("reading {}", config.display()))?;
            let engine = engine.map(Engine::from).unwrap_or(cfg.engine);
            let mut cfg = cfg;
            cfg.engine = engine;
            let scenario = validate(cfg)?;
            let result = piston_cli::run::run_scenario_table(&scenario, engine, exec)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            let (csv, svg) = result.write(&out)?;
            report_written(&csv);
            report_written(&svg);
            if dump {
                anyhow::ensure!(engine.uses_oracle(), "--dump needs the oracle engine");
                let mut opts = OracleOptions::for_scenario(&scenario);
                opts.exec = exec;
                opts.keep_final = true;
                let run = run_scenario(&scenario, &opts)?;
                let state = run.final_state.context("oracle returned no final state")?;
                let t = *scenario.times().last().unwrap_or(&0.0);
                let path = out.join(format!("{}.pstn", scenario.config().name));
                let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                write_dump(&mut file, &state, t)?;
                report_written(&path);
            }
        }
        Command::Sweep {
            config,
            axis,
            values,
            summary,
            out,
        } => {
            let cfg =
                load_config(&config).with_context(|| format!("reading {}", config.display()))?;
            let spec: ValueSpec = values.parse().map_err(anyhow::Error::msg)?;
            let result = sweep(&cfg, axis, &spec.values(), &summary, exec)?;
            let table = result.table(&cfg, &values)?;
            std::fs::create_dir_all(&out)?;
            let stem = format!("{}_sweep_{}", cfg.name, axis);
            let csv = out.join(format!("{stem}.csv"));
            table.write(&csv)?;
            let svg = out.join(format!("{stem}.svg"));
            std::fs::write(&svg, result.chart(&stem, spec.log).render())?;
            report_written(&csv);
            report_written(&svg);
            for (label, s) in &result.slopes {
                println!("{label}: {s:.4}");
            }
        }
        Command::Preset { name, out } => {
            let dir = out.join(&name);
            for r in preset(&name, exec)? {
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
                let (csv, svg) = r.write(&dir)?;
                report_written(&csv);
                report_written(&svg);
            }
        }
        Command::Validate {
            out,
            inject_c_offset,
        } => {
            let report = run_validation(&ValidateOptions {
                perturb_c: inject_c_offset,
                exec,
            })?;
            let path = report.write(&out)?;
            for c in &report.checks {
                println!(
                    "[{}] {}: {} ({})",
                    c.status(),
                    c.name,
                    c.achieved,
                    c.tolerance
                );
            }
            report_written(&path);
            if !report.passed() {
                let names = report.failures().iter().map(|c| c.name.clone()).collect();
                return Err(ValidationFailed(names).into());
            }
        }
    }
    Ok(())
}
