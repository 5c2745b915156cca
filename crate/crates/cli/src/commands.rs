use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use plateau_core::circuit::{AnsatzConfig, ParameterizedCircuit};
use plateau_core::estimator::{
    estimate_observable, sweep_qubits, write_bound_csv, write_sweep_csv, SampleSpec, SweepConfig,
};
use plateau_core::fixtures::{run_counterexamples, CounterexampleOptions, FixtureCheck};
use plateau_core::oracle::{moment_suite, MomentOptions, OracleConfig};
use plateau_core::pauli::{Observable, Pauli, PauliString};
use plateau_core::qgan::{
    init_discriminator, locality_profile, verify_weight_bound, weight_bound_grid,
    write_weight_csv, DiscriminatorSpec, WeightGrid,
};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::output::{emit, read_config, render, Meta};

impl Command {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Build(_) | Command::Validate(_) | Command::Replay(_) => None,
            Command::Analyze(a) => Some(a.sampling.seed),
            Command::Sweep(a) => Some(a.sampling.seed),
            Command::Oracle(a) => Some(a.seed),
            Command::Qgan(QganCommand::Bound(a)) => Some(a.seed),
            Command::Qgan(QganCommand::Grid(a)) => Some(a.seed),
            Command::Qgan(QganCommand::Profile(a)) => Some(a.sampling.seed),
            Command::Counterexamples(a) => Some(a.seed),
        }
    }

    fn set_out(&mut self, out: Option<PathBuf>) {
        match self {
            Command::Build(a) => a.out = out,
            Command::Oracle(a) => a.out = out,
            Command::Analyze(a) => a.output.out = out,
            Command::Sweep(a) => a.output.out = out,
            Command::Qgan(QganCommand::Bound(a)) => a.output.out = out,
            Command::Qgan(QganCommand::Grid(a)) => a.output.out = out,
            Command::Qgan(QganCommand::Profile(a)) => a.output.out = out,
            Command::Counterexamples(a) => a.output.out = out,
            Command::Validate(_) | Command::Replay(_) => {}
        }
    }
}

pub fn run(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Build(a) => build(a),
        Command::Validate(a) => validate(a),
        Command::Analyze(a) => analyze(cmd, a),
        Command::Sweep(a) => sweep(cmd, a),
        Command::Oracle(a) => oracle(cmd, a),
        Command::Qgan(QganCommand::Bound(a)) => qgan_bound(cmd, a),
        Command::Qgan(QganCommand::Grid(a)) => qgan_grid(cmd, a),
        Command::Qgan(QganCommand::Profile(a)) => qgan_profile(cmd, a),
        Command::Counterexamples(a) => counterexamples(cmd, a),
        Command::Replay(a) => replay(a),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::file(path, e))
}

fn ansatz_config(kind: AnsatzKind, shape: &AnsatzShape) -> AnsatzConfig {
    match kind {
        AnsatzKind::Efficientsu2 => AnsatzConfig::EfficientSu2 {
            depth: shape.depth,
            axes: shape.axes,
            entanglement: shape.entanglement,
        },
        AnsatzKind::Cartan => AnsatzConfig::Cartan { depth: shape.depth },
    }
}

fn load_circuit(
    file: Option<&Path>,
    ansatz: Option<AnsatzKind>,
    n: Option<usize>,
    shape: &AnsatzShape,
) -> CliResult<ParameterizedCircuit> {
    match (file, ansatz) {
        (Some(path), None) => {
            ParameterizedCircuit::from_json(&read(path)?).map_err(|e| CliError::file(path, e))
        }
        (None, Some(kind)) => {
            let n = n.ok_or_else(|| CliError::Input("--ansatz needs --n".into()))?;
            Ok(ansatz_config(kind, shape).build(n)?)
        }
        (Some(_), Some(_)) => Err(CliError::Input(
            "give either a circuit file or builder flags, not both".into(),
        )),
        (None, None) => Err(CliError::Input(
            "a circuit is required: --circuit FILE or --ansatz KIND --n N".into(),
        )),
    }
}

fn load_observable(src: &ObservableSource, n: usize) -> CliResult<Observable> {
    let h = match (&src.obs, &src.obs_rule) {
        (Some(path), None) => Observable::from_text(&read(path)?).map_err(|e| CliError::file(path, e))?,
        (None, Some(rule)) => rule.build(n)?,
        (Some(_), Some(_)) => {
            return Err(CliError::Input(
                "give either --obs or --obs-rule, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Input(
                "an observable is required: --obs FILE or --obs-rule RULE".into(),
            ))
        }
    };
    if h.n() != n {
        return Err(CliError::Input(format!(
            "observable acts on {} qubits but the circuit has {n}",
            h.n()
        )));
    }
    Ok(h)
}

fn check_class(c: &ParameterizedCircuit, allow: bool) -> CliResult<()> {
    let report = c.validate();
    if report.is_valid() {
        return Ok(());
    }
    if allow {
        eprintln!("warning: circuit is outside the supported class:\n{report}");
        Ok(())
    } else {
        Err(CliError::InvalidClass(report))
    }
}

fn sample_spec(s: &SamplingArgs) -> SampleSpec {
    SampleSpec {
        confidence_level: s.confidence,
        allow_invalid_class: s.allow_invalid_class,
        integrate_initial_layers: s.integrate_initial_layers,
        ..SampleSpec::new(s.samples, s.seed)
    }
}

fn network_spec(a: &NetworkArgs) -> DiscriminatorSpec {
    let mut spec = DiscriminatorSpec::scaled(a.n, a.layers, a.width, a.gamma, a.output_activation.into());
    spec.weight_law = a.weight_law.into();
    spec
}

fn build(a: &BuildArgs) -> CliResult<()> {
    let c = ansatz_config(a.ansatz, &a.shape).build(a.n)?;
    let mut text = c.to_json();
    text.push('\n');
    emit(a.out.as_deref(), text.as_bytes())
}

fn validate(a: &ValidateArgs) -> CliResult<()> {
    let c = ParameterizedCircuit::from_json(&read(&a.circuit)?).map_err(|e| CliError::file(&a.circuit, e))?;
    let report = c.validate();
    if report.is_valid() {
        println!("valid: n = {}, m = {}", c.n(), c.m());
        Ok(())
    } else {
        Err(CliError::InvalidClass(report))
    }
}

fn analyze(cmd: &Command, a: &AnalyzeArgs) -> CliResult<()> {
    let src = &a.circuit;
    let c = load_circuit(src.circuit.as_deref(), src.ansatz, src.n, &src.shape)?;
    let h = load_observable(&a.observable, c.n())?;
    check_class(&c, a.sampling.allow_invalid_class)?;
    let rho = a.state.build(c.n());
    let report = estimate_observable(&c, &h, &rho, &sample_spec(&a.sampling))?;
    let rows = report.rows();
    let bytes = render(&Meta::new(cmd), a.output.format, &report, |w| write_bound_csv(w, &rows))?;
    emit(a.output.out.as_deref(), &bytes)?;
    if a.output.out.is_some() {
        println!("{:<24} {:>10} {:>12} {:>12} {:>12}", "term", "coeff", "lower", "variance", "upper");
        for r in &rows {
            let coeff = r.coeff.map_or(String::new(), |c| format!("{c:.4}"));
            println!(
                "{:<24} {:>10} {:>12.4e} {:>12.4e} {:>12.4e}",
                r.alpha_label, coeff, r.lower, r.variance, r.upper
            );
        }
    }
    Ok(())
}

fn sweep(cmd: &Command, a: &SweepArgs) -> CliResult<()> {
    let ansatz = ansatz_config(a.ansatz, &a.shape);
    if !a.sampling.allow_invalid_class {
        for &n in &a.n_list {
            check_class(&ansatz.build(n)?, false)?;
        }
    }
    let mut rows = Vec::with_capacity(a.n_list.len());
    for (i, &n) in a.n_list.iter().enumerate() {
        let cfg = SweepConfig {
            ansatz: ansatz.clone(),
            observable: a.obs_rule.clone(),
            state: a.state,
            n_list: vec![n],
            spec: sample_spec(&a.sampling),
            gradient_param: a.grad_param,
        };
        rows.extend(sweep_qubits(&cfg)?);
        eprintln!("[{}/{}] n = {n} done", i + 1, a.n_list.len());
    }
    let bytes = render(&Meta::new(cmd), a.output.format, &rows, |w| write_sweep_csv(w, &rows))?;
    emit(a.output.out.as_deref(), &bytes)
}

fn oracle(cmd: &Command, a: &OracleArgs) -> CliResult<()> {
    let src = &a.circuit;
    let c = load_circuit(src.circuit.as_deref(), src.ansatz, src.n, &src.shape)?;
    let h = load_observable(&a.observable, c.n())?;
    let rho = a.state.build(c.n());
    let opts = MomentOptions {
        n_samples: a.samples,
        range_scale: a.range_scale,
        seed: a.seed,
        with_gradients: a.gradients,
        oracle: OracleConfig {
            max_qubits: a.max_qubits,
        },
    };
    let report = moment_suite(&c, &h, &rho, &opts)?;
    let bytes = render(&Meta::new(cmd), Format::Json, &report, |_| Ok(()))?;
    emit(a.out.as_deref(), &bytes)
}

fn qgan_bound(cmd: &Command, a: &QganBoundArgs) -> CliResult<()> {
    let spec = network_spec(&a.network);
    let alpha = PauliString::single(spec.n, a.qubit, Pauli::Z)?;
    let r = verify_weight_bound(&spec, a.draws, &alpha, a.seed)?;
    let rows = [r];
    let bytes = render(&Meta::new(cmd), a.output.format, &rows[0], |w| write_weight_csv(w, &rows))?;
    emit(a.output.out.as_deref(), &bytes)?;
    let r = &rows[0];
    let line = format!(
        "E[c²] = {:.6} ± {:.6}, bound {:.6}, reduced bound {:.6}",
        r.empirical, r.stderr, r.bound, r.reduced_bound
    );
    if r.pass {
        eprintln!("PASS {line}");
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("FAIL {line}")))
    }
}

fn qgan_grid(cmd: &Command, a: &QganGridArgs) -> CliResult<()> {
    let rows = weight_bound_grid(&WeightGrid {
        n_list: a.n_list.clone(),
        max_layers: a.max_layers,
        widths: a.widths.clone(),
        gammas: a.gammas.clone(),
        outputs: a.outputs.iter().map(|&o| o.into()).collect(),
        draws: a.draws,
        seed: a.seed,
    })?;
    let bytes = render(&Meta::new(cmd), a.output.format, &rows, |w| write_weight_csv(w, &rows))?;
    emit(a.output.out.as_deref(), &bytes)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{}/{} cells pass", rows.len() - failed, rows.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("{failed} cells below the bound")))
    }
}

#[derive(Serialize)]
struct ProfileRow {
    k: usize,
    n_terms: usize,
    coeff_sq_sum: f64,
    contribution: f64,
    ci_lo: f64,
    ci_hi: f64,
    stderr: f64,
}

fn qgan_profile(cmd: &Command, a: &QganProfileArgs) -> CliResult<()> {
    let spec = network_spec(&a.network);
    let params = init_discriminator(&spec, a.init_seed)?;
    let generator = load_circuit(a.circuit.as_deref(), a.ansatz, Some(spec.n), &a.shape)?;
    check_class(&generator, a.sampling.allow_invalid_class)?;
    let rho = a.state.build(generator.n());
    let groups = locality_profile(&params, &spec, &generator, &rho, &a.groups, &sample_spec(&a.sampling))?;
    let rows: Vec<ProfileRow> = groups
        .iter()
        .map(|g| ProfileRow {
            k: g.k,
            n_terms: g.n_terms,
            coeff_sq_sum: g.coeff_sq_sum,
            contribution: g.contribution.value,
            ci_lo: g.contribution.ci_lo,
            ci_hi: g.contribution.ci_hi,
            stderr: g.contribution.stderr,
        })
        .collect();
    let bytes = render(&Meta::new(cmd), a.output.format, &groups, |w| write_csv(w, &rows))?;
    emit(a.output.out.as_deref(), &bytes)
}

fn write_csv<T: Serialize>(w: &mut Vec<u8>, rows: &[T]) -> plateau_core::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)
            .map_err(|e| plateau_core::Error::InvalidArgument(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

fn counterexamples(cmd: &Command, a: &CounterexampleArgs) -> CliResult<()> {
    let checks: Vec<FixtureCheck> = run_counterexamples(&CounterexampleOptions {
        random_points: a.points,
        moment_samples: a.moment_samples,
        seed: a.seed,
    })?;
    let bytes = render(&Meta::new(cmd), a.output.format, &checks, |w| write_csv(w, &checks))?;
    emit(a.output.out.as_deref(), &bytes)?;
    if a.output.out.is_some() {
        for c in &checks {
            println!(
                "{} {:<24} {:<40} value {:.4e} target {:.4e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.fixture,
                c.claim,
                c.value,
                c.target
            );
        }
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    eprintln!("{}/{} claims confirmed", checks.len() - failed, checks.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("{failed} claims not confirmed")))
    }
}

fn replay(a: &ReplayArgs) -> CliResult<()> {
    let mut cmd = read_config(&read(&a.file)?).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", a.file.display())),
        other => other,
    })?;
    if matches!(cmd, Command::Replay(_)) {
        return Err(CliError::Input("nested replay configuration".into()));
    }
    cmd.set_out(a.out.clone());
    run(&cmd)
}
