//! Diagonal observables induced by a leaky-ReLU discriminator on bitstrings,
//! and the lower bound on their 1-local coefficients at initialization.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::circuit::{ParameterizedCircuit, ProductState};
use crate::error::{Error, Result};
use crate::estimator::{estimate_observable, SampleSpec};
use crate::pauli::{walsh::walsh_coefficients, Observable, Pauli, PauliString};
use crate::stats::{reduce_chunks, sample_rng, Estimate, Moments};

/// Default cap on `n` for exhaustive evaluation over all `2^n` inputs.
pub const DEFAULT_QGAN_CAP: usize = 20;

// Inputs evaluated per matrix product.
const BATCH: usize = 4096;

/// Output nonlinearity `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    /// `log σ(x)`.
    MinMax,
    /// Identity.
    Wasserstein,
}

impl OutputActivation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            // log σ(x) = −softplus(−x), computed without overflow.
            OutputActivation::MinMax => -((-x).max(0.0) + (-x.abs()).exp().ln_1p()),
            OutputActivation::Wasserstein => x,
        }
    }

    /// `F'(0)`.
    pub fn slope_at_zero(self) -> f64 {
        match self {
            OutputActivation::MinMax => 0.5,
            OutputActivation::Wasserstein => 1.0,
        }
    }
}

/// Symmetric law for the weights, parameterized by its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightLaw {
    #[default]
    Gaussian,
    /// Uniform on `[−√3 σ, √3 σ]`.
    Uniform,
}

/// Bias initialization.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum BiasInit {
    #[default]
    Zero,
    Uniform { half_width: f64 },
    Gaussian { std: f64 },
}

/// Architecture and initialization of a discriminator with `L` hidden
/// layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorSpec {
    /// Input bits.
    pub n: usize,
    /// Hidden widths `m_1..m_L`.
    pub widths: Vec<usize>,
    /// Leaky-ReLU slopes `γ_1..γ_L`.
    pub slopes: Vec<f64>,
    /// Weight standard deviations `σ_1..σ_{L+1}`.
    pub init_stds: Vec<f64>,
    #[serde(default)]
    pub weight_law: WeightLaw,
    #[serde(default)]
    pub bias_init: BiasInit,
    pub output: OutputActivation,
}

impl DiscriminatorSpec {
    /// Uniform width and slope with `σ_l² = 4/m_l` on every layer, so the
    /// output layer has `σ² = 4`.
    pub fn scaled(
        n: usize,
        layers: usize,
        width: usize,
        gamma: f64,
        output: OutputActivation,
    ) -> Self {
        let mut init_stds = vec![(4.0 / width as f64).sqrt(); layers];
        init_stds.push(2.0);
        DiscriminatorSpec {
            n,
            widths: vec![width; layers],
            slopes: vec![gamma; layers],
            init_stds,
            weight_law: WeightLaw::Gaussian,
            bias_init: BiasInit::Zero,
            output,
        }
    }

    pub fn layers(&self) -> usize {
        self.widths.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.widths.len();
        if self.n == 0 || self.n > 64 {
            return Err(Error::invalid("input width must be in 1..=64"));
        }
        if self.slopes.len() != l || self.init_stds.len() != l + 1 {
            return Err(Error::invalid(format!(
                "{l} hidden layers need {l} slopes and {} weight scales",
                l + 1
            )));
        }
        if self.widths.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        if self.slopes.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
            return Err(Error::invalid("leaky slopes must lie in (0, 1]"));
        }
        if self.init_stds.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("weight scales must be positive"));
        }
        match self.bias_init {
            BiasInit::Uniform { half_width: v } | BiasInit::Gaussian { std: v } if v.is_nan() || v < 0.0 => {
                Err(Error::invalid("bias scale must be non-negative"))
            }
            _ => Ok(()),
        }
    }

    pub fn sigma_out_sq(&self) -> f64 {
        self.init_stds.last().map_or(0.0, |s| s * s)
    }

    /// `(σ²_{L+1}/16) ∏_l m_l σ_l² (1 + γ_l)² / 4`.
    pub fn weight_bound(&self) -> f64 {
        self.widths
            .iter()
            .zip(&self.slopes)
            .zip(&self.init_stds)
            .fold(self.sigma_out_sq() / 16.0, |acc, ((&m, &g), &s)| {
                acc * m as f64 * s * s * (1.0 + g).powi(2) / 4.0
            })
    }

    /// `σ²_{L+1}/16`, valid whenever every `m_l σ_l² ≥ 4`.
    pub fn reduced_bound(&self) -> f64 {
        self.sigma_out_sq() / 16.0
    }

    fn fan(&self) -> Vec<(usize, usize)> {
        let mut dims = vec![self.n];
        dims.extend(&self.widths);
        dims.push(1);
        dims.windows(2).map(|w| (w[1], w[0])).collect()
    }
}

/// Weights `A^l` (`m_l × m_{l−1}`) and biases `B^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorParams {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl DiscriminatorParams {
    /// `(A, B) → (−A, −B)`.
    pub fn negated(&self) -> Self {
        DiscriminatorParams {
            weights: self.weights.iter().map(|a| -a).collect(),
            biases: self.biases.iter().map(|b| -b).collect(),
        }
    }

    fn check(&self, spec: &DiscriminatorSpec) -> Result<()> {
        let fan = spec.fan();
        let ok = self.weights.len() == fan.len()
            && self.biases.len() == fan.len()
            && self
                .weights
                .iter()
                .zip(&self.biases)
                .zip(&fan)
                .all(|((a, b), &(r, c))| a.dim() == (r, c) && b.len() == r);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("parameter shapes do not match the architecture"))
        }
    }
}

fn draw_weight<R: Rng + ?Sized>(law: WeightLaw, std: f64, rng: &mut R) -> f64 {
    match law {
        WeightLaw::Gaussian => Normal::new(0.0, std).expect("positive std").sample(rng),
        WeightLaw::Uniform => {
            let h = 3f64.sqrt() * std;
            rng.gen_range(-h..=h)
        }
    }
}

fn draw_params<R: Rng + ?Sized>(spec: &DiscriminatorSpec, rng: &mut R) -> DiscriminatorParams {
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for (&(r, c), &std) in spec.fan().iter().zip(&spec.init_stds) {
        weights.push(Array2::from_shape_simple_fn((r, c), || {
            draw_weight(spec.weight_law, std, rng)
        }));
        biases.push(Array1::from_shape_simple_fn(r, || match spec.bias_init {
            BiasInit::Zero => 0.0,
            BiasInit::Uniform { half_width } => {
                if half_width == 0.0 {
                    0.0
                } else {
                    rng.gen_range(-half_width..=half_width)
                }
            }
            BiasInit::Gaussian { std } => std * rng.sample::<f64, _>(rand_distr::StandardNormal),
        }));
    }
    DiscriminatorParams { weights, biases }
}

/// Draws all parameters from the architecture's laws, deterministically in `seed`.
pub fn init_discriminator(spec: &DiscriminatorSpec, seed: u64) -> Result<DiscriminatorParams> {
    spec.validate()?;
    Ok(draw_params(spec, &mut sample_rng(seed, 0)))
}

/// Output-layer pre-activation and `F` of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardOutput {
    pub pre_activation: f64,
    pub value: f64,
}

fn leaky(x: f64, gamma: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        gamma * x
    }
}

/// Evaluates the network on one input; bit `q` of `x` is input `q`.
pub fn forward(
    params: &DiscriminatorParams,
    spec: &DiscriminatorSpec,
    x: u64,
) -> Result<ForwardOutput> {
    spec.validate()?;
    params.check(spec)?;
    if spec.n < 64 && x >> spec.n != 0 {
        return Err(Error::invalid(format!("input {x:#b} has more than {} bits", spec.n)));
    }
    let mut h = Array1::from_shape_fn(spec.n, |q| ((x >> q) & 1) as f64);
    let last = params.weights.len() - 1;
    for (l, (a, b)) in params.weights.iter().zip(&params.biases).enumerate() {
        h = a.dot(&h) + b;
        if l < last {
            let g = spec.slopes[l];
            h.mapv_inplace(|v| leaky(v, g));
        }
    }
    let pre = h[0];
    Ok(ForwardOutput {
        pre_activation: pre,
        value: spec.output.apply(pre),
    })
}

fn input_block(n: usize, start: usize, len: usize) -> Array2<f64> {
    Array2::from_shape_fn((len, n), |(i, q)| (((start + i) >> q) & 1) as f64)
}

fn hidden(x: Array2<f64>, a: &Array2<f64>, b: &Array1<f64>, gamma: f64) -> Array2<f64> {
    let mut h = x.dot(&a.t()) + b;
    h.mapv_inplace(|v| leaky(v, gamma));
    h
}

/// Output-layer pre-activations for all `2^n` inputs, in input order.
fn pre_activation_table(params: &DiscriminatorParams, spec: &DiscriminatorSpec) -> Vec<f64> {
    let total = 1usize << spec.n;
    let last = params.weights.len() - 1;
    let mut out = Vec::with_capacity(total);
    for start in (0..total).step_by(BATCH) {
        let len = BATCH.min(total - start);
        let mut h = input_block(spec.n, start, len);
        for l in 0..last {
            h = hidden(h, &params.weights[l], &params.biases[l], spec.slopes[l]);
        }
        let head = h.dot(&params.weights[last].row(0)) + params.biases[last][0];
        out.extend(head.iter());
    }
    out
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::CapExceeded {
            what: "exhaustive discriminator evaluation (use estimate_blackbox_coefficients)",
            n,
            cap,
        })
    } else {
        Ok(())
    }
}

/// `D(x)` for every input `x`.
pub fn output_table(
    params: &DiscriminatorParams,
    spec: &DiscriminatorSpec,
    cap: usize,
) -> Result<Vec<f64>> {
    spec.validate()?;
    params.check(spec)?;
    check_cap(spec.n, cap)?;
    let mut t = pre_activation_table(params, spec);
    t.iter_mut().for_each(|v| *v = spec.output.apply(*v));
    Ok(t)
}

/// Which Z-strings to extract.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientTargets {
    Strings(Vec<PauliString>),
    /// Every Z-string of weight at most `w`, identity included.
    UpToWeight(usize),
}

/// `c_α = 2^{−n} Σ_x (−1)^{α·x} D(x)` from one transform of the output table.
pub fn extract_coefficients(
    params: &DiscriminatorParams,
    spec: &DiscriminatorSpec,
    targets: &CoefficientTargets,
    cap: usize,
) -> Result<Observable> {
    let table = output_table(params, spec, cap)?;
    let coeffs = walsh_coefficients(&table)?;
    let n = spec.n;
    let z = |mask: u64| PauliString::z_string(n, mask);
    let terms: Vec<(f64, PauliString)> = match targets {
        CoefficientTargets::Strings(list) => list
            .iter()
            .map(|p| {
                if p.n() != n {
                    return Err(Error::DimensionMismatch { left: n, right: p.n() });
                }
                if !p.is_diagonal() {
                    return Err(Error::domain(format!("{} is not a Z-string", p.label())));
                }
                Ok((coeffs[p.z_mask() as usize], p.without_phase()))
            })
            .collect::<Result<_>>()?,
        CoefficientTargets::UpToWeight(w) => (0..coeffs.len() as u64)
            .filter(|a| a.count_ones() as usize <= *w)
            .map(|a| Ok((coeffs[a as usize], z(a))))
            .collect::<Result<_>>()?,
    };
    Observable::from_terms(n, terms)
}

// c_α for α = Z on `qubit`, from a table of D values.
fn one_local_coefficient(table: &[f64], qubit: usize) -> f64 {
    let s: f64 = table
        .iter()
        .enumerate()
        .map(|(x, v)| if (x >> qubit) & 1 == 1 { -v } else { *v })
        .sum();
    s / table.len() as f64
}

/// Monte Carlo check of the 1-local weight bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBoundReport {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    /// Hidden widths joined by `;`.
    pub widths: String,
    /// Leaky slopes joined by `;`.
    pub gamma: String,
    pub output: OutputActivation,
    pub sigma_out_sq: f64,
    pub bound: f64,
    pub reduced_bound: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub draws: u64,
    pub pass: bool,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn weight_report(spec: &DiscriminatorSpec, m: &Moments) -> WeightBoundReport {
    let bound = spec.weight_bound();
    WeightBoundReport {
        n: spec.n,
        layers: spec.layers(),
        widths: join(&spec.widths),
        gamma: join(&spec.slopes),
        output: spec.output,
        sigma_out_sq: spec.sigma_out_sq(),
        bound,
        reduced_bound: spec.reduced_bound(),
        empirical: m.mean(),
        stderr: m.stderr(),
        draws: m.count(),
        pass: m.mean() >= bound - 4.0 * m.stderr(),
    }
}

fn one_local_qubit(alpha: &PauliString) -> Result<usize> {
    match alpha.support().as_slice() {
        [q] if alpha.get(*q) == Pauli::Z => Ok(*q),
        _ => Err(Error::domain(format!(
            "{} is not a single-qubit Z string",
            alpha.label()
        ))),
    }
}

/// Averages `c_α²` over `n_draws` independent initializations.
pub fn verify_weight_bound(
    spec: &DiscriminatorSpec,
    n_draws: u64,
    alpha: &PauliString,
    seed: u64,
) -> Result<WeightBoundReport> {
    spec.validate()?;
    check_cap(spec.n, DEFAULT_QGAN_CAP)?;
    if alpha.n() != spec.n {
        return Err(Error::DimensionMismatch {
            left: spec.n,
            right: alpha.n(),
        });
    }
    let k = one_local_qubit(alpha)?;
    if n_draws < 2 {
        return Err(Error::invalid("need at least 2 draws"));
    }
    let m = reduce_chunks(
        n_draws,
        |range| {
            let mut m = Moments::default();
            for i in range {
                let p = draw_params(spec, &mut sample_rng(seed, i));
                let mut t = pre_activation_table(&p, spec);
                t.iter_mut().for_each(|v| *v = spec.output.apply(*v));
                m.push(one_local_coefficient(&t, k).powi(2));
            }
            m
        },
        |mut a, b| {
            a.merge(&b);
            a
        },
    )
    .expect("at least one draw");
    Ok(weight_report(spec, &m))
}

/// Grid of [`DiscriminatorSpec::scaled`] networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightGrid {
    pub n_list: Vec<usize>,
    pub max_layers: usize,
    pub widths: Vec<usize>,
    pub gammas: Vec<f64>,
    pub outputs: Vec<OutputActivation>,
    pub draws: u64,
    pub seed: u64,
}

/// Runs [`verify_weight_bound`] over a grid with `α = Z_1`.
///
/// For fixed `(n, width, γ)` every draw builds one stack of `max_layers`
/// hidden layers plus an independent output head per depth; the depth-`L`
/// network is the first `L` layers and head `L`. Each cell is therefore an
/// exact sample of its own initialization law, while cells sharing the
/// stack are correlated.
pub fn weight_bound_grid(grid: &WeightGrid) -> Result<Vec<WeightBoundReport>> {
    let mut rows = Vec::new();
    if grid.draws < 2 {
        return Err(Error::invalid("need at least 2 draws"));
    }
    let mut group = 0u64;
    for &n in &grid.n_list {
        check_cap(n, DEFAULT_QGAN_CAP)?;
        for &width in &grid.widths {
            for &gamma in &grid.gammas {
                let deepest =
                    DiscriminatorSpec::scaled(n, grid.max_layers, width, gamma, OutputActivation::Wasserstein);
                deepest.validate()?;
                group += 1;
                let seed = grid.seed.wrapping_add(group.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let cells = (grid.max_layers + 1) * grid.outputs.len();
                let acc = reduce_chunks(
                    grid.draws,
                    |range| {
                        let mut acc = vec![Moments::default(); cells];
                        for i in range {
                            let mut rng = sample_rng(seed, i);
                            let stack = draw_params(&deepest, &mut rng);
                            let total = 1usize << n;
                            let heads: Vec<Array1<f64>> = (0..=grid.max_layers)
                                .map(|l| {
                                    let fan = if l == 0 { n } else { width };
                                    Array1::from_shape_simple_fn(fan, || {
                                        draw_weight(WeightLaw::Gaussian, 2.0, &mut rng)
                                    })
                                })
                                .collect();
                            let mut pre = vec![Vec::with_capacity(total); grid.max_layers + 1];
                            for start in (0..total).step_by(BATCH) {
                                let len = BATCH.min(total - start);
                                let mut h = input_block(n, start, len);
                                for (l, head) in heads.iter().enumerate() {
                                    if l > 0 {
                                        h = hidden(h, &stack.weights[l - 1], &stack.biases[l - 1], gamma);
                                    }
                                    pre[l].extend(h.dot(head).iter());
                                }
                            }
                            for (l, table) in pre.iter().enumerate() {
                                for (o, &out) in grid.outputs.iter().enumerate() {
                                    let t: Vec<f64> = table.iter().map(|&v| out.apply(v)).collect();
                                    acc[l * grid.outputs.len() + o]
                                        .push(one_local_coefficient(&t, 0).powi(2));
                                }
                            }
                        }
                        acc
                    },
                    |mut a, b| {
                        a.iter_mut().zip(&b).for_each(|(x, y)| x.merge(y));
                        a
                    },
                )
                .expect("at least one draw");
                for l in 0..=grid.max_layers {
                    for (o, &out) in grid.outputs.iter().enumerate() {
                        let spec = DiscriminatorSpec::scaled(n, l, width, gamma, out);
                        rows.push(weight_report(&spec, &acc[l * grid.outputs.len() + o]));
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Contribution of the weight-`k` terms of `H_φ` to the loss variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityGroup {
    pub k: usize,
    pub n_terms: usize,
    /// `Σ_{|α|=k} c_α²`.
    pub coeff_sq_sum: f64,
    /// `Σ_{|α|=k} c_α² Var[L_α]`.
    pub contribution: Estimate,
}

/// Extracts every coefficient of `H_φ`, groups them by weight and estimates
/// each group's variance contribution for `generator`.
pub fn locality_profile(
    params: &DiscriminatorParams,
    spec: &DiscriminatorSpec,
    generator: &ParameterizedCircuit,
    rho: &ProductState,
    groups: &[usize],
    sample: &SampleSpec,
) -> Result<Vec<LocalityGroup>> {
    if generator.n() != spec.n {
        return Err(Error::DimensionMismatch {
            left: spec.n,
            right: generator.n(),
        });
    }
    let h = extract_coefficients(params, spec, &CoefficientTargets::UpToWeight(spec.n), DEFAULT_QGAN_CAP)?;
    let mut by_weight: BTreeMap<usize, Vec<(f64, PauliString)>> = BTreeMap::new();
    for (c, p) in h.non_identity_terms() {
        by_weight.entry(p.weight()).or_default().push((*c, p.clone()));
    }
    let mut out = Vec::with_capacity(groups.len());
    for &k in groups {
        if k == 0 || k > spec.n {
            return Err(Error::invalid(format!("group weight {k} out of range")));
        }
        let terms = by_weight.remove(&k).unwrap_or_default();
        let coeff_sq_sum = terms.iter().map(|(c, _)| c * c).sum();
        let n_terms = terms.len();
        let contribution = if terms.is_empty() {
            Estimate::exact(0.0)
        } else {
            let obs = Observable::from_terms(spec.n, terms)?;
            estimate_observable(generator, &obs, rho, sample)?.aggregate.variance
        };
        out.push(LocalityGroup {
            k,
            n_terms,
            coeff_sq_sum,
            contribution,
        });
    }
    Ok(out)
}

/// Writes weight-bound rows as CSV with a header line.
pub fn write_weight_csv<W: std::io::Write>(out: W, rows: &[WeightBoundReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "L", "widths", "gamma", "sigma_out_sq", "bound", "empirical", "stderr", "pass"])
        .map_err(crate::estimator::csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.layers.to_string(),
            r.widths.clone(),
            r.gamma.clone(),
            r.sigma_out_sq.to_string(),
            r.bound.to_string(),
            r.empirical.to_string(),
            r.stderr.to_string(),
            r.pass.to_string(),
        ])
        .map_err(crate::estimator::csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean squared weight per layer.
pub fn empirical_weight_variance(params: &DiscriminatorParams) -> Vec<f64> {
    params
        .weights
        .iter()
        .map(|a| a.mapv(|v| v * v).mean().unwrap_or(0.0))
        .collect()
}
