//! JSON circuit files: `{"n", "m", "gates": [{"kind", "qubits", "generator"?, "param_index"?}]}`.
//!
//! A rotation's `generator` is a label over its `qubits` (in listed order),
//! e.g. `{"kind": "rotation", "qubits": [0, 2], "generator": "XZ", "param_index": 3}`.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{Gate, ParameterizedCircuit};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRecord {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param_index: Option<usize>,
}

#[derive(Serialize)]
struct CircuitOut {
    n: usize,
    m: usize,
    gates: Vec<GateRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitIn<'a> {
    n: usize,
    m: usize,
    #[serde(borrow)]
    gates: Vec<&'a RawValue>,
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        let (generator, param_index) = match g {
            Gate::Rotation { generator, param } => (
                Some(generator.sites().map(|(_, p)| p.as_char()).collect()),
                Some(*param),
            ),
            _ => (None, None),
        };
        GateRecord {
            kind: g.kind_name().into(),
            qubits: g.qubits(),
            generator,
            param_index,
        }
    }
}

fn gate_from_record(r: GateRecord, n: usize) -> std::result::Result<Gate, String> {
    let arity = |k: usize| {
        if r.qubits.len() == k {
            Ok(())
        } else {
            Err(format!("`{}` takes {k} qubit(s), got {}", r.kind, r.qubits.len()))
        }
    };
    let fixed = |r: &GateRecord| {
        if r.generator.is_some() || r.param_index.is_some() {
            Err(format!("fixed gate `{}` cannot carry a generator or parameter", r.kind))
        } else {
            Ok(())
        }
    };
    let q = &r.qubits;
    let gate = match r.kind.to_ascii_lowercase().as_str() {
        "h" => arity(1).and(fixed(&r)).map(|_| Gate::H(q[0]))?,
        "s" => arity(1).and(fixed(&r)).map(|_| Gate::S(q[0]))?,
        "t" => arity(1).and(fixed(&r)).map(|_| Gate::T(q[0]))?,
        "cnot" | "cx" => arity(2).and(fixed(&r)).map(|_| Gate::Cnot {
            control: q[0],
            target: q[1],
        })?,
        "cz" => arity(2).and(fixed(&r)).map(|_| Gate::Cz(q[0], q[1]))?,
        "swap" => arity(2).and(fixed(&r)).map(|_| Gate::Swap(q[0], q[1]))?,
        "rotation" => {
            let label = r.generator.as_deref().ok_or("rotation needs `generator`")?;
            let param = r.param_index.ok_or("rotation needs `param_index`")?;
            let axes: Vec<Pauli> = label
                .chars()
                .map(|c| {
                    Pauli::from_char(c)
                        .filter(|p| *p != Pauli::I && c.is_ascii_uppercase())
                        .ok_or_else(|| format!("bad generator character `{c}`"))
                })
                .collect::<std::result::Result<_, _>>()?;
            if axes.len() != q.len() {
                return Err(format!(
                    "generator `{label}` has {} sites but {} qubits are listed",
                    axes.len(),
                    q.len()
                ));
            }
            let mut sorted = q.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != q.len() {
                return Err("rotation lists a qubit twice".into());
            }
            let sites: Vec<(usize, Pauli)> = q.iter().copied().zip(axes).collect();
            let generator =
                PauliString::from_sparse(n, &sites).map_err(|e| e.to_string())?;
            Gate::Rotation { generator, param }
        }
        other => return Err(format!("unknown gate kind `{other}`")),
    };
    Ok(gate)
}

fn line_of(text: &str, fragment: &str) -> usize {
    let offset = fragment.as_ptr() as usize - text.as_ptr() as usize;
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ParameterizedCircuit {
    /// Pretty JSON in the circuit file format.
    pub fn to_json(&self) -> String {
        let out = CircuitOut {
            n: self.n,
            m: self.m,
            gates: self.gates.iter().map(GateRecord::from).collect(),
        };
        serde_json::to_string_pretty(&out).expect("circuit serialization cannot fail")
    }

    /// Parses the circuit file format. Errors carry the line of the offending
    /// gate.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: CircuitIn = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let mut gates = Vec::with_capacity(parsed.gates.len());
        for (i, raw) in parsed.gates.iter().enumerate() {
            let line = line_of(text, raw.get());
            let err = |message: String| Error::Parse {
                line,
                message: format!("gate {i}: {message}"),
            };
            let rec: GateRecord =
                serde_json::from_str(raw.get()).map_err(|e| err(e.to_string()))?;
            let gate = gate_from_record(rec, parsed.n).map_err(err)?;
            if parsed.n > 0 {
                gate.check(parsed.n, parsed.m, i)
                    .map_err(|e| Error::Parse {
                        line,
                        message: e.to_string(),
                    })?;
            }
            gates.push(gate);
        }
        ParameterizedCircuit::new(parsed.n, parsed.m, gates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_cartan, random_class_circuit, RandomCircuitOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_builders_and_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut circuits = vec![build_cartan(4, 2).unwrap()];
        for n in 1..5 {
            circuits.push(random_class_circuit(n, RandomCircuitOptions::default(), &mut rng).unwrap());
        }
        let mut with_t = circuits[1].gates().to_vec();
        with_t.push(Gate::T(0));
        circuits.push(ParameterizedCircuit::new(circuits[1].n(), circuits[1].m(), with_t).unwrap());
        for c in circuits {
            let back = ParameterizedCircuit::from_json(&c.to_json()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn generator_is_local_to_listed_qubits() {
        let text = r#"{"n": 3, "m": 1, "gates": [
            {"kind": "rotation", "qubits": [2, 0], "generator": "XZ", "param_index": 0}
        ]}"#;
        let c = ParameterizedCircuit::from_json(text).unwrap();
        match &c.gates()[0] {
            Gate::Rotation { generator, .. } => assert_eq!(generator.label(), "ZIX"),
            g => panic!("unexpected {g:?}"),
        }
    }

    #[test]
    fn errors_report_the_gate_line() {
        let text = "{\"n\": 2, \"m\": 1, \"gates\": [\n  {\"kind\": \"h\", \"qubits\": [0]},\n  {\"kind\": \"cnot\", \"qubits\": [0, 5]}\n]}";
        match ParameterizedCircuit::from_json(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "{\"n\": 2, \"m\": 1, \"gates\": [\n\n  {\"kind\": \"foo\", \"qubits\": [0]}\n]}";
        assert!(matches!(
            ParameterizedCircuit::from_json(text),
            Err(Error::Parse { line: 3, .. })
        ));
        let text = "{\"n\": 2,\n \"m\": }";
        assert!(matches!(
            ParameterizedCircuit::from_json(text),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = "{\"n\": 1, \"m\": 1, \"gates\": [\n{\"kind\": \"rotation\", \"qubits\": [0], \"generator\": \"X\", \"param_index\": 4}]}";
        assert!(matches!(
            ParameterizedCircuit::from_json(text),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
