use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMatrix, ZERO};

/// Completely positive trace-preserving map in Kraus form, acting on `k` qubits.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    num_qubits: usize,
    operators: Vec<CMatrix>,
    /// Row-major superoperator on vectorized `2^k x 2^k` blocks.
    superop: CMatrix,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::Parameter("channel needs at least one Kraus operator".into()))?;
        let dim = first.nrows();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "Kraus dimension {dim} is not a power of two"
            )));
        }
        if operators
            .iter()
            .any(|k| k.nrows() != dim || k.ncols() != dim)
        {
            return Err(Error::Dimension("Kraus operators differ in shape".into()));
        }
        let mut completeness = CMatrix::zeros(dim, dim);
        for k in &operators {
            completeness += k.adjoint() * k;
        }
        let err = max_abs_diff(&completeness, &CMatrix::identity(dim, dim));
        if err > 1e-10 {
            return Err(Error::NotTracePreserving(err));
        }
        let sq = dim * dim;
        let mut superop = CMatrix::from_element(sq, sq, ZERO);
        for k in &operators {
            for a2 in 0..dim {
                for b2 in 0..dim {
                    for a in 0..dim {
                        for b in 0..dim {
                            superop[(a2 * dim + b2, a * dim + b)] += k[(a2, a)] * k[(b2, b)].conj();
                        }
                    }
                }
            }
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            operators,
            superop,
        })
    }

    pub fn identity(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        Self::new(vec![CMatrix::identity(dim, dim)]).expect("identity is a valid channel")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub(crate) fn superop(&self) -> &CMatrix {
        &self.superop
    }

    /// Channel applying `self` and then `other` (same arity).
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Dimension(
                "composing channels of different arity".into(),
            ));
        }
        let mut ops = Vec::with_capacity(self.operators.len() * other.operators.len());
        for b in &other.operators {
            for a in &self.operators {
                ops.push(b * a);
            }
        }
        KrausChannel::new(ops)
    }

    /// True when the channel is the identity map.
    pub fn is_identity(&self) -> bool {
        let sq = self.superop.nrows();
        max_abs_diff(&self.superop, &CMatrix::identity(sq, sq)) < 1e-14
    }
}
