//! Single-particle basis changes compiled into nearest-neighbour matchgates.
//!
//! A single-particle unitary `V` acts on the Fock space as the Gaussian
//! unitary `U(V)` with `U c^dag_p U^dag = sum_q V_qp c^dag_q`; the map is a
//! homomorphism, so networks compose by multiplying their `V`s.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cis, eigh, hermiticity_error, unitarity_error, CMatrix, ONE, ZERO};
use crate::sim::{gate, Circuit, Gate};

/// A 2x2 unitary on the adjacent modes `(mode, mode + 1)`.
#[derive(Clone, Copy, Debug)]
pub struct GivensBlock {
    pub mode: usize,
    pub block: [[Complex64; 2]; 2],
}

impl GivensBlock {
    /// Real rotation `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(mode: usize, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let (s, c) = (Complex64::new(s, 0.0), Complex64::new(c, 0.0));
        Self {
            mode,
            block: [[c, -s], [s, c]],
        }
    }

    pub fn adjoint(&self) -> Self {
        let b = self.block;
        Self {
            mode: self.mode,
            block: [
                [b[0][0].conj(), b[1][0].conj()],
                [b[0][1].conj(), b[1][1].conj()],
            ],
        }
    }

    fn embedded(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::identity(n, n);
        for a in 0..2 {
            for b in 0..2 {
                m[(self.mode + a, self.mode + b)] = self.block[a][b];
            }
        }
        m
    }

    /// Many-body two-qubit gate on qubits `(mode, mode + 1)`.
    pub fn gate(&self) -> Gate {
        let u = self.block;
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        // Basis |00>, |01>, |10>, |11>: |10> holds the particle in `mode`.
        let m = crate::linalg::from_rows(&[
            &[ONE, ZERO, ZERO, ZERO],
            &[ZERO, u[1][1], u[1][0], ZERO],
            &[ZERO, u[0][1], u[0][0], ZERO],
            &[ZERO, ZERO, ZERO, det],
        ]);
        Gate::raw(vec![self.mode, self.mode + 1], m)
    }

    /// Same operation in single-qubit phases and two `ISWAP^{+-1/2}` gates.
    pub fn native_gates(&self) -> Vec<Vec<Gate>> {
        let (j, k) = (self.mode, self.mode + 1);
        let u = self.block;
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        let delta = det.arg() / 2.0;
        let v = [
            [u[0][0] * cis(-delta), u[0][1] * cis(-delta)],
            [u[1][0] * cis(-delta), u[1][1] * cis(-delta)],
        ];
        let theta = v[1][0].norm().atan2(v[0][0].norm());
        let sum = if v[0][0].norm() > 1e-14 {
            v[0][0].arg()
        } else {
            0.0
        };
        let diff = if v[1][0].norm() > 1e-14 {
            -v[1][0].arg()
        } else {
            0.0
        };
        let (alpha, beta) = ((sum + diff) / 2.0, (sum - diff) / 2.0);
        // u = e^{i delta} diag(e^{i alpha}, e^{-i alpha}) R(theta) diag(e^{i beta}, e^{-i beta})
        vec![
            vec![gate::phase(j, beta), gate::phase(k, -beta)],
            vec![gate::iswap_power(j, k, -0.5)],
            vec![
                gate::z_rotation(j, theta / 2.0),
                gate::z_rotation(k, -theta / 2.0),
            ],
            vec![gate::iswap_power(j, k, 0.5)],
            vec![gate::phase(j, delta + alpha), gate::phase(k, delta - alpha)],
        ]
    }
}

/// Sequence of Givens blocks followed by a layer of single-mode phases.
#[derive(Clone, Debug)]
pub struct GivensNetwork {
    num_modes: usize,
    blocks: Vec<GivensBlock>,
    phases: Vec<f64>,
}

impl GivensNetwork {
    pub fn new(num_modes: usize, blocks: Vec<GivensBlock>, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != num_modes {
            return Err(Error::Dimension(format!(
                "{} phases for {num_modes} modes",
                phases.len()
            )));
        }
        if let Some(b) = blocks.iter().find(|b| b.mode + 1 >= num_modes) {
            return Err(Error::Targets(format!(
                "block on modes ({}, {}) out of range",
                b.mode,
                b.mode + 1
            )));
        }
        Ok(Self {
            num_modes,
            blocks,
            phases,
        })
    }

    pub fn identity(num_modes: usize) -> Self {
        Self {
            num_modes,
            blocks: Vec::new(),
            phases: vec![0.0; num_modes],
        }
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn blocks(&self) -> &[GivensBlock] {
        &self.blocks
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Single-particle matrix `V` of the whole network.
    pub fn single_particle_matrix(&self) -> CMatrix {
        let n = self.num_modes;
        let mut v = CMatrix::identity(n, n);
        for b in &self.blocks {
            v = b.embedded(n) * v;
        }
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            self.phases.iter().map(|&p| cis(p)),
        ));
        d * v
    }

    /// Decomposes a unitary `V` by column eliminations `V R_1 ... R_m = D`,
    /// giving the network `R_1^dag, ..., R_m^dag` followed by the phases of `D`.
    pub fn from_unitary(v: &CMatrix) -> Result<Self> {
        let n = v.nrows();
        if v.ncols() != n {
            return Err(Error::Dimension("basis change must be square".into()));
        }
        let err = unitarity_error(v);
        if err > 1e-8 {
            return Err(Error::Parameter(format!(
                "basis change is not unitary (error {err:.3e})"
            )));
        }
        let mut w = v.clone();
        let mut blocks = Vec::new();
        for row in (1..n).rev() {
            for col in 0..row {
                let (a, b) = (w[(row, col)], w[(row, col + 1)]);
                if a.norm() < 1e-15 {
                    continue;
                }
                let theta = a.norm().atan2(b.norm());
                // e^{-i phi} sin(theta) b = -cos(theta) a
                let rel = if b.norm() < 1e-300 {
                    ONE
                } else {
                    -(a / b) / (a / b).norm()
                };
                let (s, c) = theta.sin_cos();
                let r = [
                    [Complex64::new(c, 0.0), -rel.conj() * s],
                    [rel * s, Complex64::new(c, 0.0)],
                ];
                let g = GivensBlock {
                    mode: col,
                    block: r,
                };
                w = &w * g.embedded(n);
                w[(row, col)] = ZERO;
                blocks.push(g.adjoint());
            }
        }
        let phases = (0..n).map(|i| w[(i, i)].arg()).collect();
        Ok(Self {
            num_modes: n,
            blocks,
            phases,
        })
    }

    /// Network implementing `self` followed by `next`.
    pub fn then(&self, next: &GivensNetwork) -> Result<Self> {
        if self.num_modes != next.num_modes {
            return Err(Error::Dimension(
                "networks act on different mode counts".into(),
            ));
        }
        Self::from_unitary(&(next.single_particle_matrix() * self.single_particle_matrix()))
    }

    fn phase_layer(&self) -> Vec<Gate> {
        (0..self.num_modes)
            .filter(|&q| self.phases[q].abs() > 1e-15)
            .map(|q| gate::phase(q, self.phases[q]))
            .collect()
    }

    /// Matchgate circuit on `num_modes` qubits, packed into parallel layers.
    pub fn circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.num_modes);
        for b in &self.blocks {
            c.push(b.gate()).expect("block within register");
        }
        c.push_moment(self.phase_layer())
            .expect("phases within register");
        c.packed()
    }

    /// Circuit in single-qubit phases and `ISWAP^{+-1/2}` gates.
    pub fn native_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.num_modes);
        for b in &self.blocks {
            for layer in b.native_gates() {
                c.push_moment(layer).expect("block within register");
            }
        }
        c.push_moment(self.phase_layer())
            .expect("phases within register");
        c.packed()
    }
}

/// Eigenmodes of a quadratic Hamiltonian `sum_pq h_pq c^dag_p c_q`.
#[derive(Clone, Debug)]
pub struct QuadraticDiagonalization {
    /// Single-particle energies, ascending.
    pub energies: Vec<f64>,
    /// Columns are the eigenmodes: `h = W diag(energies) W^dag`.
    pub modes: CMatrix,
    /// Network for `V = W^dag`, mapping eigenmode `a` onto mode `a`.
    pub basis_change: GivensNetwork,
}

pub fn diagonalize_quadratic(h: &CMatrix) -> Result<QuadraticDiagonalization> {
    let err = hermiticity_error(h);
    if err > 1e-10 {
        return Err(Error::NotHermitian(err));
    }
    let (energies, modes) = eigh(h);
    let basis_change = GivensNetwork::from_unitary(&modes.adjoint())?;
    Ok(QuadraticDiagonalization {
        energies,
        modes,
        basis_change,
    })
}
