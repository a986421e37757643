use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irs_mec::harness::{
    check_scenario, realize_trial, run_experiment, run_solver, write_channel_dump, write_csv, ExperimentSpec,
};
use irs_mec::oracle::{MAX_GROUPING_BEAMS, MAX_GROUPING_DEVICES, MAX_GROUPING_ELEMENTS, MAX_SUBSET_DEVICES};
use irs_mec::{grouping_oracle, solve_finite_q, solve_infinite_q, subset_oracle};
use serde_json::json;

#[derive(Parser)]
#[command(name = "irsmec", version, about = "Computation-rate allocation for IRS-assisted edge computing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one channel realization and print the allocation as JSON.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Trial index (selects the generator stream).
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Also write the realized channels as a CSV fixture.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run the experiment file's Monte Carlo sweep and write the summary CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Compare the solvers with the exhaustive references on one realization.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Run the invariant checks on one realization of the scenario.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the experiment file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the experiment file's trial count.
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentSpec, String> {
        let text = fs::read_to_string(&self.spec).map_err(|e| format!("{}: {e}", self.spec.display()))?;
        let mut spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", self.spec.display()))?;
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(trials) = self.trials {
            spec.trials = trials;
        }
        spec.validate().map_err(|e| format!("{}: {e}", self.spec.display()))?;
        Ok(spec)
    }

    fn emit(&self, bytes: &[u8]) -> Result<(), String> {
        match &self.out {
            Some(path) => fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
            None => std::io::stdout().write_all(bytes).map_err(|e| e.to_string()),
        }
    }
}

fn pretty(value: &serde_json::Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    text.into_bytes()
}

fn solve(common: &Common, trial: usize, dump: Option<&Path>) -> Result<bool, String> {
    let spec = common.load()?;
    let scenario = spec.scenario.resolve().map_err(|e| e.to_string())?;
    let draw = realize_trial(&scenario, spec.seed, trial).map_err(|e| e.to_string())?;
    let solver = spec.solver_list()[0];
    let solution = run_solver(solver, &scenario, &draw, spec.phase_levels).map_err(|e| e.to_string())?;
    if let Some(path) = dump {
        let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_channel_dump(&[(trial, draw.channels.clone())], file).map_err(|e| e.to_string())?;
    }
    common.emit(&pretty(&json!({
        "solver": solver.name(),
        "seed": spec.seed,
        "trial": trial,
        "sum_rate_bits": solution.sum_rate_bits,
        "offloaders": solution.offloaders(),
        "solution": solution,
    })))?;
    Ok(true)
}

fn sweep(common: &Common) -> Result<bool, String> {
    let spec = common.load()?;
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| e.to_string())?;
    common.emit(&buf)?;
    Ok(true)
}

fn oracle(common: &Common, trial: usize) -> Result<bool, String> {
    let spec = common.load()?;
    let s = spec.scenario.resolve().map_err(|e| e.to_string())?;
    let d = realize_trial(&s, spec.seed, trial).map_err(|e| e.to_string())?;
    let (devs, ch, p) = (&d.devices, &d.channels, &s.params);
    let inf = solve_infinite_q(devs, ch, p).map_err(|e| e.to_string())?.sum_rate_bits;
    let fin = solve_finite_q(devs, ch, p).map_err(|e| e.to_string())?.sum_rate_bits;

    let mut report = json!({ "infinite_q_bits": inf, "finite_q_bits": fin });
    if devs.len() > MAX_SUBSET_DEVICES {
        return Err(format!("subset reference needs at most {MAX_SUBSET_DEVICES} devices, scenario has {}", devs.len()));
    }
    let subset = subset_oracle(devs, ch, p).map_err(|e| e.to_string())?;
    report["oracle_subset_bits"] = json!(subset.best_rate_bits);
    report["infinite_q_gap"] = json!(1.0 - inf / subset.best_rate_bits);
    report["subsets_enumerated"] = json!(subset.enumerated_count);
    if devs.len() <= MAX_GROUPING_DEVICES && p.q_budget <= MAX_GROUPING_BEAMS && p.n_elements <= MAX_GROUPING_ELEMENTS {
        let grouping = grouping_oracle(devs, ch, p, spec.phase_levels).map_err(|e| e.to_string())?;
        report["oracle_grouping_bits"] = json!(grouping.best_rate_bits);
        report["finite_q_gap"] = json!(1.0 - fin / grouping.best_rate_bits);
        report["groupings_enumerated"] = json!(grouping.enumerated_count);
    } else {
        report["oracle_grouping_bits"] = serde_json::Value::Null;
    }
    common.emit(&pretty(&report))?;
    Ok(true)
}

fn validate(common: &Common, trial: usize) -> Result<bool, String> {
    let spec = common.load()?;
    let s = spec.scenario.resolve().map_err(|e| e.to_string())?;
    let checks = check_scenario(&s, spec.seed, trial).map_err(|e| e.to_string())?;
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    common.emit(text.as_bytes())?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        eprintln!("irsmec: validation failed: {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { common, trial, dump } => solve(common, *trial, dump.as_deref()),
        Command::Sweep { common } => sweep(common),
        Command::Oracle { common, trial } => oracle(common, *trial),
        Command::Validate { common, trial } => validate(common, *trial),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("irsmec: error: {msg}");
            ExitCode::from(2)
        }
    }
}
