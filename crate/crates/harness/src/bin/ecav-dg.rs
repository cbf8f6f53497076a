use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ecav_harness::config::{ExperimentConfig, FormulationId, ViscosityMode};
use ecav_harness::output::write_run;
use ecav_harness::{lemmas, run_experiment, study};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "ecav-dg", version, about = "Entropy-correction artificial viscosity DG experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Overrides {
    #[arg(long)]
    visc: Option<ViscosityMode>,
    #[arg(long)]
    formulation: Option<FormulationId>,
    /// Polynomial degree.
    #[arg(long = "N")]
    degree: Option<usize>,
    /// Elements in x; y follows the preset's aspect ratio.
    #[arg(long = "K")]
    elements: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Periodic box `LO,HI` for problems with a free domain.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    domain: Option<Vec<f64>>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(v) = self.visc {
            cfg.viscosity = v;
            cfg.name = format!("{}-{}", cfg.name, format!("{v:?}").to_lowercase());
        }
        if let Some(f) = self.formulation {
            cfg.formulation = f;
        }
        if let Some(n) = self.degree {
            cfg.degree = n;
        }
        if let Some(k) = self.elements {
            set_elements(cfg, k);
        }
        if let Some(t) = self.t_final {
            cfg.time.t_final = t;
        }
        if let Some(d) = &self.domain {
            let [lo, hi] = d.as_slice() else {
                bail!("--domain takes LO,HI");
            };
            cfg.domain = Some([*lo, *hi]);
        }
        if let Some(s) = self.stride {
            cfg.output.stride = s;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        Ok(())
    }
}

fn set_elements(cfg: &mut ExperimentConfig, k: usize) {
    if cfg.elements.len() == 2 {
        let ky = (k * cfg.elements[1]).div_ceil(cfg.elements[0]).max(2);
        cfg.elements = vec![k, ky];
    } else {
        cfg.elements = vec![k];
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML configuration and write its CSV artifacts.
    Run {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// h-refinement table of L² errors and observed orders.
    Converge {
        config: String,
        #[arg(long = "degrees", value_delimiter = ',', required = true)]
        degrees: Vec<usize>,
        #[arg(long = "Ks", value_delimiter = ',', required = true)]
        ks: Vec<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run two configurations on the same problem and align their time series.
    Compare {
        a: String,
        b: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Viscosity mode for the second run when both names are the same preset.
        #[arg(long)]
        visc_b: Option<ViscosityMode>,
    },
    /// Randomised checks of the dissipation identity, gradient control and projection ratios.
    CheckLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// List the shipped presets.
    Presets,
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ECAVDG_THREADS") {
        let n: usize = v.parse().with_context(|| format!("ECAVDG_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn load(name: &str, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::resolve(name)?;
    overrides.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let run = run_experiment(&cfg)?;
            let dir = write_run(&run, None)?;
            let rec = &run.record;
            println!(
                "{}: {} accepted / {} rejected steps, max eps {:.3e}, max dS/dt {:.3e}, {:.1} s",
                cfg.name,
                rec.log.accepted,
                rec.log.rejected,
                rec.max_epsilon(),
                rec.max_entropy_rate(),
                rec.wall_seconds
            );
            if let Some(e) = run.final_error() {
                println!("{:?} L2 error at t = {}: {e:.4e}", cfg.error_norm(), run.t_final);
            }
            println!("wrote {}", dir.display());
            let ecav = matches!(cfg.viscosity, ViscosityMode::EcavLdg | ViscosityMode::EcavBr1);
            if ecav && cfg.flux != ecav_harness::config::FluxId::LaxFriedrichs && rec.max_entropy_rate() > 1e-10 {
                bail!("entropy rate {:.3e} exceeds 1e-10", rec.max_entropy_rate());
            }
        }
        Command::Converge { config, degrees, ks, overrides } => {
            let cfg = load(&config, &overrides)?;
            let table = study::convergence_study(&cfg, &degrees, &ks)?;
            let path = cfg.output.dir.join("convergence.csv");
            std::fs::create_dir_all(&cfg.output.dir)?;
            study::write_convergence(&path, &table)?;
            for row in &table {
                let order = row.order.map(|o| format!("{o:.4}")).unwrap_or_else(|| "---".into());
                println!("N={} K={:>4}  {:.4e}  {order}", row.degree, row.elements, row.error);
            }
            println!("wrote {}", path.display());
        }
        Command::Compare { a, b, overrides, visc_b } => {
            let ca = load(&a, &overrides)?;
            let mut cb = load(&b, &overrides)?;
            if let Some(v) = visc_b {
                cb.viscosity = v;
                cb.name = format!("{}-{}", cb.name, format!("{v:?}").to_lowercase());
            }
            let cmp = study::compare_runs(&ca, &cb)?;
            let dir = ca.output.dir.join(format!("compare-{}-{}", ca.name, cb.name));
            study::write_comparison(&dir, &cmp)?;
            println!("{}", cmp.summary_line());
            println!("wrote {}", dir.display());
        }
        Command::CheckLemmas { seed, samples } => {
            let report = lemmas::check_all(seed, samples);
            for line in &report.lines {
                println!("{line}");
            }
            if !report.passed() {
                bail!("lemma checks failed");
            }
        }
        Command::Presets => {
            for name in ecav_harness::config::preset_names() {
                println!("{name}");
            }
        }
    }
    Ok(())
}
