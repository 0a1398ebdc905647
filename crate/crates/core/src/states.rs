//! Quantum states: validated density matrices, pure states, Bloch angles,
//! the two-qubit state families, the incompatibility operator and the
//! overlap information of random pure states.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::grid::BlochGrid;
use crate::linalg::{self, eig_hermitian, tensor, ComplexMatrix, C64, ONE, ZERO};
use crate::quadrature::integrate_piecewise;

/// Tolerance used when validating density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Tolerance on the norm of a pure state.
pub const PURE_NORM_TOL: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity(format!(
                "{}x{} is not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace {:.12} + {:.3e}i is not 1",
                trace.re, trace.im
            )));
        }
        let matrix = matrix.hermitian_part();
        let min_eig = eig_hermitian(&matrix)?.eigenvalues[0];
        if min_eig < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// `I/d`
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diag(probs))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Reduced state on the listed subsystems.
    pub fn reduce(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Self::new(linalg::partial_trace(&self.matrix, dims, keep)?)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: tensor(&self.matrix, &other.matrix),
        }
    }

    pub fn entropy(&self) -> f64 {
        linalg::von_neumann_entropy(self)
    }

    /// `Tr(O ρ)`
    pub fn expectation(&self, observable: &ComplexMatrix) -> Result<C64> {
        Ok(observable.try_mul(&self.matrix)?.trace())
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty("state vector"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        let n = linalg::norm(&amplitudes);
        if (n - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("norm {n} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = linalg::norm(&amplitudes);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self {
            amplitudes: linalg::basis_vector(dim, index),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::projector(&self.amplitudes),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            amplitudes: linalg::tensor_vec(&self.amplitudes, &other.amplitudes),
        }
    }
}

/// Point on the Bloch sphere, `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                range: "[0, π]",
            });
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                range: "[0, 2π)",
            });
        }
        Ok(Self { theta, phi })
    }

    pub(crate) fn ket(&self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [C64::new(c, 0.0), C64::from_polar(s, self.phi)]
    }

    pub(crate) fn ket_perp(&self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [C64::from_polar(-s, -self.phi), C64::new(c, 0.0)]
    }

    /// Unitary taking `|α⟩` to `|1⟩` and `|α⊥⟩` to `|2⟩`.
    pub fn to_measurement_basis(&self) -> ComplexMatrix {
        let (a, b) = (self.ket(), self.ket_perp());
        // rows are ⟨α| and ⟨α⊥|
        ComplexMatrix::new(2, 2, vec![a[0].conj(), a[1].conj(), b[0].conj(), b[1].conj()]).expect("finite angles")
    }
}

/// `(cos θ/2, e^{iφ} sin θ/2)`
pub fn bloch_state(angles: BlochAngles) -> PureState {
    PureState {
        amplitudes: angles.ket().to_vec(),
    }
}

fn check_unit_interval(name: &'static str, q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: q,
            range: "[0, 1]",
        })
    }
}

/// `√(1 - q²/2)|1⟩|1⟩ + (q/√2)|2⟩|2⟩`
pub fn pure_family_state(q: f64) -> Result<PureState> {
    check_unit_interval("q", q)?;
    let a = (1.0 - q * q / 2.0).sqrt();
    let b = q * FRAC_1_SQRT_2;
    Ok(PureState {
        amplitudes: vec![C64::new(a, 0.0), ZERO, ZERO, C64::new(b, 0.0)],
    })
}

/// Projector onto [`pure_family_state`]; product state at `q = 0`,
/// maximally entangled at `q = 1`.
pub fn pure_family(q: f64) -> Result<DensityMatrix> {
    Ok(pure_family_state(q)?.density())
}

/// `(1-q)(|11⟩⟨11| + |22⟩⟨22|)/2 + q |ψ(1)⟩⟨ψ(1)|`
///
/// Both one-qubit marginals are `I/2` for every `q`.
pub fn mixed_family(q: f64) -> Result<DensityMatrix> {
    check_unit_interval("q", q)?;
    let classical = ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5]);
    let bell = pure_family(1.0)?.into_matrix();
    DensityMatrix::new(&classical.scale_real(1.0 - q) + &bell.scale_real(q))
}

/// Two-qubit Bell basis: singlet first, then the three triplet states.
pub fn bell_basis() -> [Vec<C64>; 4] {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    [
        vec![ZERO, s, -s, ZERO],
        vec![s, ZERO, ZERO, s],
        vec![s, ZERO, ZERO, -s],
        vec![ZERO, s, s, ZERO],
    ]
}

/// Mean-square discrepancy operator between the projector ensembles of two
/// qubits: `|B₀⟩⟨B₀| + ⅓ Σ_k |B_k⟩⟨B_k|`, singlet `B₀`, triplets `B_k`.
pub fn epsilon_operator() -> ComplexMatrix {
    let basis = bell_basis();
    let mut eps = ComplexMatrix::projector(&basis[0]);
    for b in &basis[1..] {
        eps = &eps + &ComplexMatrix::projector(b).scale_real(1.0 / 3.0);
    }
    eps
}

/// The same operator obtained by integrating `(P_α ⊗ I − I ⊗ P_α)² dV/2`
/// over the Bloch grid.
pub fn epsilon_by_quadrature(grid: &BlochGrid) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let mut acc = ComplexMatrix::zeros(4, 4);
    for node in grid.nodes() {
        let p = ComplexMatrix::projector(&node.ket);
        let diff = &tensor(&p, &id) - &tensor(&id, &p);
        acc = &acc + &(&diff * &diff).scale_real(node.weight / 2.0);
    }
    acc
}

/// Absolute accuracy of [`overlap_information`].
pub const OVERLAP_TOL: f64 = 1e-9;

/// Shannon information between two independent uniformly random pure states
/// of a `D`-dimensional space, coupled by the coincidence probability
/// `|⟨α|β⟩|²`.
///
/// With `x = |⟨α|β⟩|²` distributed as Beta(1, D−1), the information is
/// `∫₀¹ D(D−1) x (1−x)^{D−2} log₂(Dx) dx`.
pub fn overlap_information(dim: u64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::OutOfRange {
            name: "D",
            value: dim as f64,
            range: ">= 2",
        });
    }
    let d = dim as f64;
    let integrand = move |x: f64| {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let tail = if dim == 2 {
            1.0
        } else {
            ((d - 2.0) * (-x).ln_1p()).exp()
        };
        d * (d - 1.0) * x * tail * (d * x).log2()
    };
    // The weight is concentrated within a few multiples of 1/D; breakpoints on
    // a geometric ladder from 1/D keep the adaptive rule from missing the peak.
    let mut breaks = vec![0.0];
    let mut b = 1.0 / d;
    while b < 1.0 {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(1.0);
    Ok(integrate_piecewise(integrand, &breaks, OVERLAP_TOL))
}

/// Effective number of distinguishable states `2^{I(D)}`.
pub fn distinguishable_states(dim: u64) -> Result<f64> {
    Ok(overlap_information(dim)?.exp2())
}

/// `Σ √p_k |v_k⟩_A |v_k⟩_R` over the eigenpairs of `rho`, reference as the
/// fast index. Both one-party marginals equal `rho`.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let eig = eig_hermitian(rho.matrix()).expect("density matrices are Hermitian");
    let n = rho.dim();
    let mut amps = vec![ZERO; n * n];
    for (k, &p) in eig.eigenvalues.iter().enumerate() {
        let sp = p.max(0.0).sqrt();
        if sp == 0.0 {
            continue;
        }
        let v = eig.eigenvector(k);
        for a in 0..n {
            for r in 0..n {
                amps[a * n + r] += v[a] * v[r] * sp;
            }
        }
    }
    PureState::normalized(amps).expect("a density matrix has nonzero spectrum")
}
