use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::linalg::{
    c, cis, diag, expm_i_hermitian, from_rows, unitarity_error, CMatrix, I, ONE, ZERO,
};

/// Extra structure carried by a gate so that noise models can find and
/// perturb specific gate families after compilation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    Generic,
    /// `ISWAP^e`; control-error models shift the exponent away from zero.
    IswapPower(f64),
}

#[derive(Clone, Debug)]
pub struct Gate {
    targets: Vec<usize>,
    matrix: CMatrix,
    kind: GateKind,
}

impl Gate {
    pub fn new(targets: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let k = targets.len();
        if k == 0 {
            return Err(Error::Targets("gate acts on no qubits".into()));
        }
        let dim = 1usize << k;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "{k}-qubit gate needs a {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (i, q) in targets.iter().enumerate() {
            if targets[..i].contains(q) {
                return Err(Error::Targets(format!(
                    "qubit {q} repeated in gate targets"
                )));
            }
        }
        let err = unitarity_error(&matrix);
        if err > 1e-10 {
            return Err(Error::Parameter(format!(
                "gate matrix is not unitary (error {err:.3e})"
            )));
        }
        Ok(Self {
            targets,
            matrix,
            kind: GateKind::Generic,
        })
    }

    /// Builds a gate from a matrix known to be unitary and well sized.
    pub(crate) fn raw(targets: Vec<usize>, matrix: CMatrix) -> Self {
        debug_assert!(unitarity_error(&matrix) < 1e-10);
        debug_assert_eq!(matrix.nrows(), 1 << targets.len());
        Self {
            targets,
            matrix,
            kind: GateKind::Generic,
        }
    }

    pub fn with_kind(mut self, kind: GateKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn inverse(&self) -> Gate {
        let kind = match self.kind {
            GateKind::IswapPower(e) => GateKind::IswapPower(-e),
            k => k,
        };
        Gate {
            targets: self.targets.clone(),
            matrix: self.matrix.adjoint(),
            kind,
        }
    }

    /// Same gate acting on relabeled qubits.
    pub fn remapped(&self, map: &[usize]) -> Gate {
        Gate {
            targets: self.targets.iter().map(|&q| map[q]).collect(),
            matrix: self.matrix.clone(),
            kind: self.kind,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        let m = &self.matrix;
        (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() < 1e-14))
    }
}

pub fn hadamard_matrix() -> CMatrix {
    let h = c(FRAC_1_SQRT_2, 0.0);
    from_rows(&[&[h, h], &[h, -h]])
}

pub fn pauli_x_matrix() -> CMatrix {
    from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn pauli_y_matrix() -> CMatrix {
    from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn pauli_z_matrix() -> CMatrix {
    diag(&[ONE, -ONE])
}

pub fn h(q: usize) -> Gate {
    Gate::raw(vec![q], hadamard_matrix())
}

pub fn x(q: usize) -> Gate {
    Gate::raw(vec![q], pauli_x_matrix())
}

pub fn y(q: usize) -> Gate {
    Gate::raw(vec![q], pauli_y_matrix())
}

pub fn z(q: usize) -> Gate {
    Gate::raw(vec![q], pauli_z_matrix())
}

pub fn s(q: usize) -> Gate {
    Gate::raw(vec![q], diag(&[ONE, I]))
}

pub fn sdg(q: usize) -> Gate {
    Gate::raw(vec![q], diag(&[ONE, -I]))
}

/// `diag(1, e^{i phi})`
pub fn phase(q: usize, phi: f64) -> Gate {
    Gate::raw(vec![q], diag(&[ONE, cis(phi)]))
}

/// `exp(i a Z)`, i.e. `diag(e^{ia}, e^{-ia})`.
pub fn z_rotation(q: usize, a: f64) -> Gate {
    Gate::raw(vec![q], diag(&[cis(a), cis(-a)]))
}

pub fn cnot(control: usize, target: usize) -> Gate {
    Gate::raw(
        vec![control, target],
        from_rows(&[
            &[ONE, ZERO, ZERO, ZERO],
            &[ZERO, ONE, ZERO, ZERO],
            &[ZERO, ZERO, ZERO, ONE],
            &[ZERO, ZERO, ONE, ZERO],
        ]),
    )
}

pub fn cz(a: usize, b: usize) -> Gate {
    Gate::raw(vec![a, b], diag(&[ONE, ONE, ONE, -ONE]))
}

/// `diag(1, 1, 1, e^{i phi})`
pub fn cphase(a: usize, b: usize, phi: f64) -> Gate {
    Gate::raw(vec![a, b], diag(&[ONE, ONE, ONE, cis(phi)]))
}

/// `exp(i a Z_a Z_b)`
pub fn zz_rotation(qa: usize, qb: usize, a: f64) -> Gate {
    Gate::raw(vec![qa, qb], diag(&[cis(a), cis(-a), cis(-a), cis(a)]))
}

/// `exp(i a X_a X_b)`
pub fn xx_rotation(qa: usize, qb: usize, a: f64) -> Gate {
    let (co, si) = (c(a.cos(), 0.0), c(0.0, a.sin()));
    Gate::raw(
        vec![qa, qb],
        from_rows(&[
            &[co, ZERO, ZERO, si],
            &[ZERO, co, si, ZERO],
            &[ZERO, si, co, ZERO],
            &[si, ZERO, ZERO, co],
        ]),
    )
}

/// Diagonal gate on `targets` with the given phases on the computational basis.
pub fn diagonal(targets: Vec<usize>, phases: &[f64]) -> Gate {
    let entries: Vec<_> = phases.iter().map(|&p| cis(p)).collect();
    Gate::raw(targets, diag(&entries))
}

/// `ISWAP^e = exp(i e (pi/4) (XX + YY))`, computed from the Hermitian generator.
pub fn iswap_power_matrix(e: f64) -> CMatrix {
    let two = c(2.0, 0.0);
    let gen = from_rows(&[
        &[ZERO, ZERO, ZERO, ZERO],
        &[ZERO, ZERO, two, ZERO],
        &[ZERO, two, ZERO, ZERO],
        &[ZERO, ZERO, ZERO, ZERO],
    ]);
    expm_i_hermitian(&gen, e * FRAC_PI_4)
}

pub fn iswap_power(a: usize, b: usize, e: f64) -> Gate {
    Gate::raw(vec![a, b], iswap_power_matrix(e)).with_kind(GateKind::IswapPower(e))
}

/// Gate with a single-qubit matrix equal to the product of the given gates
/// (applied left to right).
pub fn fuse_single(q: usize, gates: &[&CMatrix]) -> Gate {
    let mut m = CMatrix::identity(2, 2);
    for g in gates {
        m = *g * m;
    }
    Gate::raw(vec![q], m)
}
