use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use plateau_core::circuit::{DepthRule, Entanglement};
use plateau_core::estimator::{ObservableRule, StateRule};
use plateau_core::pauli::Pauli;
use plateau_core::qgan::{OutputActivation, WeightLaw};

#[derive(Debug, Parser)]
#[command(name = "plateau", version, about = "Barren-plateau diagnostics at Clifford points")]
pub struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "PLATEAU_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Write a builder circuit in the circuit file format.
    Build(BuildArgs),
    /// List the class assumptions a circuit violates.
    Validate(ValidateArgs),
    /// Per-term variance and light-cone bounds for one circuit.
    Analyze(AnalyzeArgs),
    /// Aggregate variance and bounds over a list of qubit counts.
    Sweep(SweepArgs),
    /// Dense-simulation moments under continuous uniform angles.
    Oracle(OracleArgs),
    /// Discriminator observables of a quantum GAN.
    #[command(subcommand)]
    Qgan(QganCommand),
    /// Check the caption claims of the assumption counterexamples.
    Counterexamples(CounterexampleArgs),
    /// Re-run the configuration embedded in an output file.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "qgan", content = "args", rename_all = "kebab-case")]
pub enum QganCommand {
    /// Monte Carlo check of the 1-local weight bound for one network.
    Bound(QganBoundArgs),
    /// Weight-bound check over a grid of networks.
    Grid(QganGridArgs),
    /// Variance contribution of each locality group of one discriminator.
    Profile(QganProfileArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Efficientsu2,
    Cartan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Minmax,
    Wasserstein,
}

impl From<OutputKind> for OutputActivation {
    fn from(k: OutputKind) -> Self {
        match k {
            OutputKind::Minmax => OutputActivation::MinMax,
            OutputKind::Wasserstein => OutputActivation::Wasserstein,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Gaussian,
    Uniform,
}

impl From<LawKind> for WeightLaw {
    fn from(k: LawKind) -> Self {
        match k {
            LawKind::Gaussian => WeightLaw::Gaussian,
            LawKind::Uniform => WeightLaw::Uniform,
        }
    }
}

/// Circuit given either as a file or through builder flags.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CircuitSource {
    /// Circuit JSON file.
    #[arg(long, conflicts_with_all = ["ansatz", "n"])]
    pub circuit: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub ansatz: Option<AnsatzKind>,
    /// Qubit count for the builder.
    #[arg(long, requires = "ansatz")]
    pub n: Option<usize>,
    #[command(flatten)]
    pub shape: AnsatzShape,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AnsatzShape {
    /// Entangling blocks: an integer, `log` or `half`.
    #[arg(long, default_value = "1", value_parser = parse_depth)]
    pub depth: DepthRule,
    /// Rotation axes of the two layers per block, e.g. `YZ`.
    #[arg(long, default_value = "YZ", value_parser = parse_axes)]
    pub axes: (Pauli, Pauli),
    #[arg(long, default_value = "pairwise", value_parser = parse_entanglement)]
    pub entanglement: Entanglement,
}

/// Observable given either as a file or as a named family.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ObservableSource {
    /// Observable file, one `<coeff> <label>` per line.
    #[arg(long = "obs", conflicts_with = "obs_rule")]
    pub obs: Option<PathBuf>,
    /// `local-z:K`, `global-x`, `global-z` or `mixed:LOCAL,GLOBAL`.
    #[arg(long, value_parser = parse_observable_rule)]
    pub obs_rule: Option<ObservableRule>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    /// Proceed even if the circuit violates the class assumptions.
    #[arg(long)]
    pub allow_invalid_class: bool,
    /// Average the two leading layers in closed form.
    #[arg(long)]
    pub integrate_initial_layers: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub ansatz: AnsatzKind,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub shape: AnsatzShape,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    pub circuit: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub circuit: CircuitSource,
    #[command(flatten)]
    pub observable: ObservableSource,
    /// `zero`, `plus`, `maximally-mixed`, `random-pure:SEED` or `random-mixed:SEED`.
    #[arg(long, default_value = "zero", value_parser = parse_state)]
    pub state: StateRule,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = AnsatzKind::Efficientsu2)]
    pub ansatz: AnsatzKind,
    #[command(flatten)]
    pub shape: AnsatzShape,
    #[arg(long, value_parser = parse_observable_rule)]
    pub obs_rule: ObservableRule,
    #[arg(long, default_value = "zero", value_parser = parse_state)]
    pub state: StateRule,
    /// Comma-separated qubit counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    /// Also estimate the variance of the derivative along this parameter.
    #[arg(long)]
    pub grad_param: Option<usize>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[command(flatten)]
    pub circuit: CircuitSource,
    #[command(flatten)]
    pub observable: ObservableSource,
    #[arg(long, default_value = "zero", value_parser = parse_state)]
    pub state: StateRule,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Angles are drawn from `[-aπ, aπ]`.
    #[arg(long, default_value_t = 1.0)]
    pub range_scale: f64,
    /// Also estimate every gradient component's variance.
    #[arg(long)]
    pub gradients: bool,
    /// Largest qubit count simulated densely.
    #[arg(long, default_value_t = 12)]
    pub max_qubits: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct NetworkArgs {
    #[arg(long)]
    pub n: usize,
    /// Hidden layers.
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    /// Leaky-ReLU slope.
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = OutputKind::Minmax)]
    pub output_activation: OutputKind,
    #[arg(long, value_enum, default_value_t = LawKind::Gaussian)]
    pub weight_law: LawKind,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct QganBoundArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Qubit carrying the 1-local `Z`.
    #[arg(long, default_value_t = 0)]
    pub qubit: usize,
    #[arg(long, default_value_t = 10_000)]
    pub draws: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct QganGridArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub max_layers: usize,
    #[arg(long, value_delimiter = ',', default_value = "8,64")]
    pub widths: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,1.0")]
    pub gammas: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "minmax,wasserstein")]
    pub outputs: Vec<OutputKind>,
    #[arg(long, default_value_t = 10_000)]
    pub draws: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct QganProfileArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Seed of the discriminator initialization.
    #[arg(long, default_value_t = 0)]
    pub init_seed: u64,
    /// Generator circuit file.
    #[arg(long, conflicts_with = "ansatz")]
    pub circuit: Option<PathBuf>,
    /// Generator builder; uses the network's qubit count.
    #[arg(long, value_enum)]
    pub ansatz: Option<AnsatzKind>,
    #[command(flatten)]
    pub shape: AnsatzShape,
    #[arg(long, default_value = "zero", value_parser = parse_state)]
    pub state: StateRule,
    /// Term weights to report, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub groups: Vec<usize>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CounterexampleArgs {
    /// Random angle vectors for the identically-zero claims.
    #[arg(long, default_value_t = 100)]
    pub points: u64,
    /// Continuous samples for the moment claims.
    #[arg(long, default_value_t = 1_000_000)]
    pub moment_samples: u64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// CSV or JSON file written by this tool.
    pub file: PathBuf,
    /// Where to write the reproduced output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_depth(s: &str) -> Result<DepthRule, String> {
    s.parse().map_err(|e: plateau_core::Error| e.to_string())
}

fn parse_entanglement(s: &str) -> Result<Entanglement, String> {
    s.parse().map_err(|e: plateau_core::Error| e.to_string())
}

fn parse_axes(s: &str) -> Result<(Pauli, Pauli), String> {
    let axes: Vec<Pauli> = s
        .chars()
        .map(|c| Pauli::from_char(c.to_ascii_uppercase()).filter(|p| *p != Pauli::I))
        .collect::<Option<_>>()
        .ok_or_else(|| format!("bad axes `{s}`"))?;
    match axes[..] {
        [a, b] if a != b => Ok((a, b)),
        _ => Err(format!("expected two distinct axes such as `YZ`, got `{s}`")),
    }
}

fn parse_observable_rule(s: &str) -> Result<ObservableRule, String> {
    let (name, arg) = s.split_once(':').unwrap_or((s, ""));
    let bad = || format!("bad observable rule `{s}`");
    match name {
        "local-z" => Ok(ObservableRule::LocalZ {
            k: arg.parse().map_err(|_| bad())?,
        }),
        "global-x" if arg.is_empty() => Ok(ObservableRule::GlobalX),
        "global-z" if arg.is_empty() => Ok(ObservableRule::GlobalZ),
        "mixed" => {
            let (l, g) = arg.split_once(',').ok_or_else(bad)?;
            Ok(ObservableRule::Mixed {
                local: l.trim().parse().map_err(|_| bad())?,
                global: g.trim().parse().map_err(|_| bad())?,
            })
        }
        _ => Err(bad()),
    }
}

fn parse_state(s: &str) -> Result<StateRule, String> {
    let (name, arg) = s.split_once(':').unwrap_or((s, ""));
    let seed = || arg.parse::<u64>().map_err(|_| format!("bad state seed in `{s}`"));
    match name {
        "zero" => Ok(StateRule::Zero),
        "plus" => Ok(StateRule::Plus),
        "maximally-mixed" => Ok(StateRule::MaximallyMixed),
        "random-pure" => Ok(StateRule::RandomPure { seed: seed()? }),
        "random-mixed" => Ok(StateRule::RandomMixed { seed: seed()? }),
        _ => Err(format!("unknown state `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn rule_parsers() {
        assert_eq!(parse_observable_rule("local-z:2"), Ok(ObservableRule::LocalZ { k: 2 }));
        assert_eq!(
            parse_observable_rule("mixed:1,0.5"),
            Ok(ObservableRule::Mixed { local: 1.0, global: 0.5 })
        );
        assert!(parse_observable_rule("global-x:3").is_err());
        assert_eq!(parse_state("random-pure:7"), Ok(StateRule::RandomPure { seed: 7 }));
        assert!(parse_state("random-pure").is_err());
        assert_eq!(parse_axes("yz"), Ok((Pauli::Y, Pauli::Z)));
        assert!(parse_axes("YY").is_err());
        assert!(parse_axes("YI").is_err());
    }
}
