use crate::error::{Error, Result};
use crate::linalg::{apply_local, CMatrix};

use super::gate::Gate;

/// One layer of gates acting on disjoint qubits.
#[derive(Clone, Debug, Default)]
pub struct Moment {
    gates: Vec<Gate>,
}

impl Moment {
    pub fn new(gates: Vec<Gate>) -> Result<Self> {
        let mut seen: Vec<usize> = Vec::new();
        for g in &gates {
            for &q in g.targets() {
                if seen.contains(&q) {
                    return Err(Error::Targets(format!(
                        "qubit {q} used twice in one moment"
                    )));
                }
                seen.push(q);
            }
        }
        Ok(Self { gates })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.gates.iter().flat_map(|g| g.targets().iter().copied())
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Circuit {
    num_qubits: usize,
    moments: Vec<Moment>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            moments: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn moments(&self) -> &[Moment] {
        &self.moments
    }

    pub fn depth(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn gate_count(&self) -> usize {
        self.moments.iter().map(|m| m.gates.len()).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.moments.iter().flat_map(|m| m.gates.iter())
    }

    fn check_targets(&self, gates: &[Gate]) -> Result<()> {
        for g in gates {
            if let Some(&q) = g.targets().iter().find(|&&q| q >= self.num_qubits) {
                return Err(Error::Targets(format!(
                    "qubit {q} out of range for {}-qubit circuit",
                    self.num_qubits
                )));
            }
        }
        Ok(())
    }

    /// Appends a moment made of `gates`.
    pub fn push_moment(&mut self, gates: Vec<Gate>) -> Result<()> {
        self.check_targets(&gates)?;
        if gates.is_empty() {
            return Ok(());
        }
        self.moments.push(Moment::new(gates)?);
        Ok(())
    }

    /// Appends `gate` in a moment of its own.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.push_moment(vec![gate])
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::Dimension(format!(
                "cannot append {}-qubit circuit to {}-qubit circuit",
                other.num_qubits, self.num_qubits
            )));
        }
        self.moments.extend(other.moments.iter().cloned());
        Ok(())
    }

    pub fn then(mut self, other: &Circuit) -> Result<Circuit> {
        self.append(other)?;
        Ok(self)
    }

    /// Inverse circuit: moments reversed, every gate inverted.
    pub fn inverse(&self) -> Circuit {
        let moments = self
            .moments
            .iter()
            .rev()
            .map(|m| Moment {
                gates: m.gates.iter().map(Gate::inverse).collect(),
            })
            .collect();
        Circuit {
            num_qubits: self.num_qubits,
            moments,
        }
    }

    /// Relabels qubit `q` as `map[q]` in a register of `num_qubits`.
    pub fn remapped(&self, num_qubits: usize, map: &[usize]) -> Result<Circuit> {
        if map.len() < self.num_qubits {
            return Err(Error::Targets(
                "qubit map shorter than circuit register".into(),
            ));
        }
        let mut out = Circuit::new(num_qubits);
        for m in &self.moments {
            out.push_moment(m.gates.iter().map(|g| g.remapped(map)).collect())?;
        }
        Ok(out)
    }

    /// Embeds this circuit into a larger register, shifting qubit indices by `offset`.
    pub fn shifted(&self, num_qubits: usize, offset: usize) -> Result<Circuit> {
        let map: Vec<usize> = (0..self.num_qubits).map(|q| q + offset).collect();
        self.remapped(num_qubits, &map)
    }

    /// Re-layers the gates so that each one sits in the earliest moment after
    /// every earlier gate sharing a qubit with it. Gate order per qubit is kept.
    pub fn packed(&self) -> Circuit {
        let mut layers: Vec<Vec<Gate>> = Vec::new();
        let mut next_free = vec![0usize; self.num_qubits];
        for g in self.gates() {
            let layer = g.targets().iter().map(|&q| next_free[q]).max().unwrap_or(0);
            if layer == layers.len() {
                layers.push(Vec::new());
            }
            layers[layer].push(g.clone());
            for &q in g.targets() {
                next_free[q] = layer + 1;
            }
        }
        Circuit {
            num_qubits: self.num_qubits,
            moments: layers.into_iter().map(|gates| Moment { gates }).collect(),
        }
    }

    /// Dense unitary of the whole circuit.
    pub fn unitary(&self) -> CMatrix {
        let n = self.num_qubits;
        let dim = 1usize << n;
        let mut u = CMatrix::identity(dim, dim);
        for g in self.gates() {
            for col in 0..dim {
                apply_local(u.as_mut_slice(), col * dim, 1, n, g.targets(), g.matrix());
            }
        }
        u
    }
}
