use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Gate, ParameterizedCircuit};
use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// CNOT pattern of one entangling unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    /// `(0,1), (2,3), …` then `(1,2), (3,4), …`.
    Pairwise,
    /// `(0,1), (1,2), …, (n-2,n-1)`.
    Linear,
    /// `(n-1,0)` followed by the linear chain.
    Circular,
}

impl FromStr for Entanglement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pairwise" => Ok(Entanglement::Pairwise),
            "linear" => Ok(Entanglement::Linear),
            "circular" => Ok(Entanglement::Circular),
            _ => Err(Error::invalid(format!("unknown entanglement `{s}`"))),
        }
    }
}

impl Entanglement {
    fn pairs(self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Pairwise => (0..n.saturating_sub(1))
                .step_by(2)
                .chain((1..n.saturating_sub(1)).step_by(2))
                .map(|i| (i, i + 1))
                .collect(),
            Entanglement::Linear => (0..n - 1).map(|i| (i, i + 1)).collect(),
            Entanglement::Circular => {
                let mut v = if n > 2 { vec![(n - 1, 0)] } else { vec![] };
                v.extend((0..n - 1).map(|i| (i, i + 1)));
                v
            }
        }
    }
}

struct Builder {
    n: usize,
    gates: Vec<Gate>,
    next_param: usize,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            n,
            gates: Vec::new(),
            next_param: 0,
        }
    }

    fn rotation(&mut self, sites: &[(usize, Pauli)]) -> Result<()> {
        let g = Gate::rotation(self.n, sites, self.next_param)?;
        self.next_param += 1;
        self.gates.push(g);
        Ok(())
    }

    fn layer(&mut self, axis: Pauli) -> Result<()> {
        for q in 0..self.n {
            self.rotation(&[(q, axis)])?;
        }
        Ok(())
    }

    fn finish(self) -> Result<ParameterizedCircuit> {
        ParameterizedCircuit::new(self.n, self.next_param, self.gates)
    }
}

fn check_axes(axes: (Pauli, Pauli)) -> Result<()> {
    if axes.0 == Pauli::I || axes.1 == Pauli::I {
        return Err(Error::invalid("rotation axes must be X, Y or Z"));
    }
    if axes.0 == axes.1 {
        return Err(Error::invalid(format!(
            "rotation axes must differ, got {:?} twice",
            axes.0
        )));
    }
    Ok(())
}

/// Hardware-efficient ansatz: layers `axes.0`, `axes.1`, then `depth`
/// repetitions of (CNOT unit, layer `axes.0`, layer `axes.1`).
/// Parameter count is `2n(depth + 1)`.
pub fn build_efficient_su2(
    n: usize,
    depth: usize,
    axes: (Pauli, Pauli),
    entanglement: Entanglement,
) -> Result<ParameterizedCircuit> {
    if n < 2 {
        return Err(Error::invalid(format!("EfficientSU2 needs n >= 2, got {n}")));
    }
    check_axes(axes)?;
    let mut b = Builder::new(n);
    b.layer(axes.0)?;
    b.layer(axes.1)?;
    for _ in 0..depth {
        for (control, target) in entanglement.pairs(n) {
            b.gates.push(Gate::Cnot { control, target });
        }
        b.layer(axes.0)?;
        b.layer(axes.1)?;
    }
    b.finish()
}

/// Two leading layers (Y then Z) followed by `depth` layers of two-qubit
/// blocks on even pairs, then odd pairs. A block on `(a, b)` is
/// `R_XX, R_YY, R_ZZ`, then `R_Y` on both qubits, then `R_Z` on both.
pub fn build_cartan(n: usize, depth: usize) -> Result<ParameterizedCircuit> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::invalid(format!(
            "Cartan ansatz needs an even n >= 2, got {n}"
        )));
    }
    let mut b = Builder::new(n);
    b.layer(Pauli::Y)?;
    b.layer(Pauli::Z)?;
    for _ in 0..depth {
        for (a, c) in Entanglement::Pairwise.pairs(n) {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                b.rotation(&[(a, p), (c, p)])?;
            }
            for p in [Pauli::Y, Pauli::Z] {
                b.rotation(&[(a, p)])?;
                b.rotation(&[(c, p)])?;
            }
        }
    }
    b.finish()
}

/// Depth as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthRule {
    Fixed(usize),
    /// `⌈log₂ n⌉`.
    Log2Ceil,
    /// `n / 2`.
    HalfN,
}

impl DepthRule {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            DepthRule::Fixed(d) => d,
            DepthRule::Log2Ceil => n.next_power_of_two().trailing_zeros() as usize,
            DepthRule::HalfN => n / 2,
        }
    }
}

impl FromStr for DepthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" | "log2" => Ok(DepthRule::Log2Ceil),
            "half" | "n/2" => Ok(DepthRule::HalfN),
            _ => s
                .parse()
                .map(DepthRule::Fixed)
                .map_err(|_| Error::invalid(format!("bad depth `{s}`"))),
        }
    }
}

/// Builder recipe resolved per qubit count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ansatz", rename_all = "lowercase")]
pub enum AnsatzConfig {
    EfficientSu2 {
        depth: DepthRule,
        axes: (Pauli, Pauli),
        entanglement: Entanglement,
    },
    Cartan {
        depth: DepthRule,
    },
}

impl AnsatzConfig {
    pub fn build(&self, n: usize) -> Result<ParameterizedCircuit> {
        match self {
            AnsatzConfig::EfficientSu2 {
                depth,
                axes,
                entanglement,
            } => build_efficient_su2(n, depth.resolve(n), *axes, *entanglement),
            AnsatzConfig::Cartan { depth } => build_cartan(n, depth.resolve(n)),
        }
    }

    pub fn depth(&self, n: usize) -> usize {
        match self {
            AnsatzConfig::EfficientSu2 { depth, .. } | AnsatzConfig::Cartan { depth } => {
                depth.resolve(n)
            }
        }
    }
}

/// Shape of [`random_class_circuit`] output.
#[derive(Debug, Clone, Copy)]
pub struct RandomCircuitOptions {
    pub tail_rotations: usize,
    pub cliffords: usize,
    pub max_generator_weight: usize,
}

impl Default for RandomCircuitOptions {
    fn default() -> Self {
        RandomCircuitOptions {
            tail_rotations: 4,
            cliffords: 4,
            max_generator_weight: 2,
        }
    }
}

fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> Pauli {
    Pauli::NON_IDENTITY[rng.gen_range(0..3)]
}

/// Random member of the circuit class: random orthogonal leading layers,
/// then rotations and Clifford gates in random order.
pub fn random_class_circuit<R: Rng + ?Sized>(
    n: usize,
    opts: RandomCircuitOptions,
    rng: &mut R,
) -> Result<ParameterizedCircuit> {
    if n == 0 {
        return Err(Error::invalid("need at least one qubit"));
    }
    let mut b = Builder::new(n);
    let nu: Vec<Pauli> = (0..n).map(|_| random_axis(rng)).collect();
    for (q, &a) in nu.iter().enumerate() {
        b.rotation(&[(q, a)])?;
    }
    for (q, &a) in nu.iter().enumerate() {
        let others: Vec<Pauli> = Pauli::NON_IDENTITY.into_iter().filter(|&p| p != a).collect();
        b.rotation(&[(q, *others.choose(rng).expect("two axes"))])?;
    }
    let mut items: Vec<bool> = std::iter::repeat_n(true, opts.tail_rotations)
        .chain(std::iter::repeat_n(false, opts.cliffords))
        .collect();
    items.shuffle(rng);
    let qubits: Vec<usize> = (0..n).collect();
    for is_rotation in items {
        if is_rotation {
            let w = rng.gen_range(1..=opts.max_generator_weight.clamp(1, n));
            let sites: Vec<(usize, Pauli)> = qubits
                .choose_multiple(rng, w)
                .map(|&q| (q, random_axis(rng)))
                .collect();
            b.rotation(&sites)?;
        } else {
            let kinds = if n >= 2 { 5 } else { 2 };
            let q = rng.gen_range(0..n);
            let other = if n >= 2 {
                (q + rng.gen_range(1..n)) % n
            } else {
                q
            };
            b.gates.push(match rng.gen_range(0..kinds) {
                0 => Gate::H(q),
                1 => Gate::S(q),
                2 => Gate::Cnot {
                    control: q,
                    target: other,
                },
                3 => Gate::Cz(q, other),
                _ => Gate::Swap(q, other),
            });
        }
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn efficient_su2_parameter_counts() {
        let c = build_efficient_su2(4, 1, (Pauli::Y, Pauli::Z), Entanglement::Pairwise).unwrap();
        assert_eq!(c.m(), 16);
        assert!(c.validate().is_valid());
        let c = build_efficient_su2(2, 0, (Pauli::Y, Pauli::Z), Entanglement::Pairwise).unwrap();
        assert_eq!(c.m(), 4);
        assert_eq!(c.gates().len(), 4);
    }

    #[test]
    fn efficient_su2_n8_d3_couples_neighbours_only() {
        let c = build_efficient_su2(8, 3, (Pauli::Y, Pauli::Z), Entanglement::Pairwise).unwrap();
        assert_eq!(c.m(), 64);
        let cnots: Vec<(usize, usize)> = c
            .gates()
            .iter()
            .filter_map(|g| match g {
                Gate::Cnot { control, target } => Some((*control, *target)),
                _ => None,
            })
            .collect();
        assert_eq!(cnots.len(), 3 * 7);
        assert!(cnots.iter().all(|(a, b)| b - a == 1));
        // One unit: even pairs first, then odd pairs.
        assert_eq!(
            &cnots[..7],
            &[(0, 1), (2, 3), (4, 5), (6, 7), (1, 2), (3, 4), (5, 6)]
        );
        assert!(c.validate().is_valid());
    }

    #[test]
    fn rejects_equal_axes_and_small_n() {
        assert!(build_efficient_su2(4, 1, (Pauli::Z, Pauli::Z), Entanglement::Linear).is_err());
        assert!(build_efficient_su2(4, 1, (Pauli::I, Pauli::Z), Entanglement::Linear).is_err());
        assert!(build_efficient_su2(1, 1, (Pauli::Y, Pauli::Z), Entanglement::Linear).is_err());
    }

    #[test]
    fn cartan_shapes() {
        assert!(build_cartan(3, 1).is_err());
        let c = build_cartan(4, 1).unwrap();
        assert!(c.validate().is_valid());
        assert_eq!(c.m(), 8 + 3 * 7);
        let c = build_cartan(2, 1).unwrap();
        assert_eq!(c.m(), 4 + 7);
        assert!(c.tail_gates().iter().all(|g| g.qubits().iter().all(|&q| q < 2)));
    }

    #[test]
    fn entanglement_variants() {
        assert_eq!(Entanglement::Linear.pairs(4), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(
            Entanglement::Circular.pairs(3),
            vec![(2, 0), (0, 1), (1, 2)]
        );
        for e in [Entanglement::Linear, Entanglement::Circular] {
            assert!(build_efficient_su2(5, 2, (Pauli::X, Pauli::Y), e)
                .unwrap()
                .validate()
                .is_valid());
        }
    }

    #[test]
    fn depth_rules() {
        assert_eq!(DepthRule::Log2Ceil.resolve(4), 2);
        assert_eq!(DepthRule::Log2Ceil.resolve(6), 3);
        assert_eq!(DepthRule::Log2Ceil.resolve(12), 4);
        assert_eq!(DepthRule::HalfN.resolve(7), 3);
        assert_eq!("log".parse::<DepthRule>().unwrap(), DepthRule::Log2Ceil);
        assert_eq!("3".parse::<DepthRule>().unwrap(), DepthRule::Fixed(3));
    }

    #[test]
    fn random_circuits_are_in_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            for _ in 0..20 {
                let c = random_class_circuit(n, RandomCircuitOptions::default(), &mut rng).unwrap();
                assert!(c.validate().is_valid(), "{:?}", c.validate());
                let mut params: Vec<usize> = c.gates().iter().filter_map(Gate::param).collect();
                params.sort_unstable();
                assert_eq!(params, (0..c.m()).collect::<Vec<_>>());
            }
        }
    }
}
