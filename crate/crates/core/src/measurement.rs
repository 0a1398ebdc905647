//! Generalized measurements on pairs of compatible systems and the Shannon
//! information carried by their joint outcome statistics.
//!
//! Continuous POVMs over all pure qubit states are discretized on a
//! [`BlochGrid`]; each grid cell is one outcome with its quadrature weight
//! folded into the effect. Mutual information computed from cell masses is
//! the quadrature of the continuum integral: the cell weights enter the
//! joint and marginal densities in equal measure and cancel in the
//! log-ratio, so `I = Σ m_ab log₂(m_ab / m_a m_b)` holds for discrete,
//! continuous and mixed spectra alike.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
pub use crate::grid::{BlochGrid, BlochNode};
use crate::linalg::{eig_hermitian, qubit_rotation, shannon_bits, ComplexMatrix, C64, ZERO};
use crate::states::{BlochAngles, DensityMatrix};

/// Completeness tolerance for POVMs.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Masses above this (but below zero) are treated as round-off and clamped.
pub const MASS_CLAMP: f64 = -1e-12;
/// Masses below this are a positivity failure.
pub const MASS_ERROR: f64 = -1e-8;
/// Allowed deviation of the total mass from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Positive operator-valued measure.
#[derive(Clone, Debug)]
pub enum Povm {
    /// Finite list of positive effects summing to the identity.
    Discrete { effects: Vec<ComplexMatrix> },
    /// `|α⟩⟨α| dV_α` over all pure qubit states.
    Continuous { grid: BlochGrid },
    /// `(1−χ)|α⟩⟨α| dV_α` together with `χ U⁻¹|l⟩⟨l|U`, `U = exp(iσ_y ϑ/2)`.
    Mixed { chi: f64, grid: BlochGrid, rotation: f64 },
}

/// Outcome label of a (possibly mixed) spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Discrete result, e.g. an orthoprojective index `k`.
    Discrete(usize),
    /// Continuous result, as a Bloch-grid cell index.
    Cell(usize),
}

/// One effect, either weighted rank one or a general matrix.
#[derive(Clone, Debug)]
enum Effect {
    Rank1 { weight: f64, ket: Vec<C64> },
    General(ComplexMatrix),
}

impl Effect {
    fn matrix(&self) -> ComplexMatrix {
        match self {
            Effect::Rank1 { weight, ket } => ComplexMatrix::projector(ket).scale_real(*weight),
            Effect::General(m) => m.clone(),
        }
    }

    /// `Tr(E M)` for a Hermitian `M`.
    fn trace_with(&self, m: &ComplexMatrix) -> f64 {
        match self {
            Effect::Rank1 { weight, ket } => weight * m.expectation(ket).re,
            Effect::General(e) => e.try_mul(m).expect("dimensions checked").trace().re,
        }
    }
}

impl Povm {
    pub fn discrete(effects: Vec<ComplexMatrix>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::Empty("effect list"));
        }
        let n = effects[0].rows();
        for e in &effects {
            if !e.is_square() || e.rows() != n {
                return Err(Error::DimensionMismatch("effects must share one square shape".into()));
            }
            let min = eig_hermitian(e)?.eigenvalues[0];
            if min < -COMPLETENESS_TOL {
                return Err(Error::InvalidDensity(format!(
                    "effect has negative eigenvalue {min:.3e}"
                )));
            }
        }
        let povm = Povm::Discrete { effects };
        povm.check_completeness()?;
        Ok(povm)
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|k| {
                let mut e = ComplexMatrix::zeros(dim, dim);
                e[(k, k)] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        Povm::Discrete { effects }
    }

    /// Qubit projective measurement `U⁻¹|l⟩⟨l|U`, `U = exp(iσ_y ϑ/2)`.
    pub fn rotated_basis(vartheta: f64) -> Self {
        let effects = rotated_kets(vartheta)
            .iter()
            .map(|k| ComplexMatrix::projector(k))
            .collect();
        Povm::Discrete { effects }
    }

    pub fn continuous(grid: BlochGrid) -> Self {
        Povm::Continuous { grid }
    }

    pub fn mixed(chi: f64, grid: BlochGrid, rotation: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&chi) {
            return Err(Error::OutOfRange {
                name: "chi",
                value: chi,
                range: "[0, 1]",
            });
        }
        let povm = Povm::Mixed { chi, grid, rotation };
        povm.check_completeness()?;
        Ok(povm)
    }

    pub fn dim(&self) -> usize {
        match self {
            Povm::Discrete { effects } => effects[0].rows(),
            Povm::Continuous { .. } | Povm::Mixed { .. } => 2,
        }
    }

    fn effects(&self) -> Vec<(Outcome, f64, Effect)> {
        let cells = |grid: &BlochGrid, scale: f64| {
            grid.nodes()
                .iter()
                .enumerate()
                .map(move |(j, n)| {
                    (
                        Outcome::Cell(j),
                        n.weight,
                        Effect::Rank1 {
                            weight: scale * n.weight,
                            ket: n.ket.to_vec(),
                        },
                    )
                })
                .collect::<Vec<_>>()
        };
        match self {
            Povm::Discrete { effects } => effects
                .iter()
                .enumerate()
                .map(|(k, e)| (Outcome::Discrete(k), 1.0, Effect::General(e.clone())))
                .collect(),
            Povm::Continuous { grid } => cells(grid, 1.0),
            Povm::Mixed { chi, grid, rotation } => {
                let mut out = cells(grid, 1.0 - chi);
                for (l, ket) in rotated_kets(*rotation).into_iter().enumerate() {
                    out.push((Outcome::Discrete(l), 1.0, Effect::Rank1 { weight: *chi, ket }));
                }
                out
            }
        }
    }

    /// `max |Σ E − I|`
    pub fn completeness_deviation(&self) -> f64 {
        let n = self.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (_, _, e) in self.effects() {
            acc = &acc + &e.matrix();
        }
        acc.max_abs_diff(&ComplexMatrix::identity(n))
    }

    pub fn check_completeness(&self) -> Result<()> {
        let deviation = self.completeness_deviation();
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Incomplete { deviation });
        }
        Ok(())
    }
}

/// `U⁻¹|l⟩` for `l = 1, 2`.
fn rotated_kets(vartheta: f64) -> [Vec<C64>; 2] {
    let u_inv = qubit_rotation(vartheta).adjoint();
    [u_inv.column(0), u_inv.column(1)]
}

/// Joint outcome table with per-outcome quadrature weights.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    labels_a: Vec<Outcome>,
    labels_b: Vec<Outcome>,
    cell_weights_a: Vec<f64>,
    cell_weights_b: Vec<f64>,
    /// Row-major, `labels_a.len() × labels_b.len()`.
    mass: Vec<f64>,
}

impl JointDistribution {
    /// Validates masses: values down to [`MASS_ERROR`] are clamped to zero,
    /// anything lower is an error, and the total must be one.
    pub fn new(
        labels_a: Vec<Outcome>,
        labels_b: Vec<Outcome>,
        cell_weights_a: Vec<f64>,
        cell_weights_b: Vec<f64>,
        mut mass: Vec<f64>,
    ) -> Result<Self> {
        let (na, nb) = (labels_a.len(), labels_b.len());
        if mass.len() != na * nb || cell_weights_a.len() != na || cell_weights_b.len() != nb {
            return Err(Error::DimensionMismatch("joint table shape".into()));
        }
        for (i, m) in mass.iter_mut().enumerate() {
            if !m.is_finite() {
                return Err(Error::NonFinite("joint distribution"));
            }
            if *m < MASS_ERROR {
                return Err(Error::NegativeMass {
                    mass: *m,
                    row: i / nb,
                    col: i % nb,
                });
            }
            if *m < 0.0 {
                *m = 0.0;
            }
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { total });
        }
        Ok(Self {
            labels_a,
            labels_b,
            cell_weights_a,
            cell_weights_b,
            mass,
        })
    }

    /// Plain discrete table (unit cell weights).
    pub fn from_table(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        Self::new(
            (0..rows).map(Outcome::Discrete).collect(),
            (0..cols).map(Outcome::Discrete).collect(),
            vec![1.0; rows],
            vec![1.0; cols],
            mass,
        )
    }

    pub fn rows(&self) -> usize {
        self.labels_a.len()
    }

    pub fn cols(&self) -> usize {
        self.labels_b.len()
    }

    pub fn labels_a(&self) -> &[Outcome] {
        &self.labels_a
    }

    pub fn labels_b(&self) -> &[Outcome] {
        &self.labels_b
    }

    pub fn cell_weights_a(&self) -> &[f64] {
        &self.cell_weights_a
    }

    pub fn cell_weights_b(&self) -> &[f64] {
        &self.cell_weights_b
    }

    pub fn mass(&self, a: usize, b: usize) -> f64 {
        self.mass[a * self.cols() + b]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        self.mass.chunks(self.cols()).map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        for row in self.mass.chunks(self.cols()) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += m;
            }
        }
        out
    }

    /// Total mass of the block whose row labels satisfy `row` and column
    /// labels satisfy `col`.
    pub fn block_mass(&self, row: impl Fn(Outcome) -> bool, col: impl Fn(Outcome) -> bool) -> f64 {
        let mut total = 0.0;
        for (a, &la) in self.labels_a.iter().enumerate() {
            if !row(la) {
                continue;
            }
            for (b, &lb) in self.labels_b.iter().enumerate() {
                if col(lb) {
                    total += self.mass(a, b);
                }
            }
        }
        total
    }
}

/// `Tr_A[(E ⊗ I) ρ]` for an effect on the first qubit-or-qudit factor.
fn contract_first(e: &Effect, rho: &ComplexMatrix, da: usize, db: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(db, db);
    match e {
        Effect::Rank1 { weight, ket } => {
            // ⟨a| ρ |a⟩ on the first factor
            for i in 0..db {
                for j in 0..db {
                    let mut acc = ZERO;
                    for x in 0..da {
                        let cx = ket[x].conj();
                        if cx == ZERO {
                            continue;
                        }
                        for y in 0..da {
                            acc += cx * rho[(x * db + i, y * db + j)] * ket[y];
                        }
                    }
                    out[(i, j)] = acc * *weight;
                }
            }
        }
        Effect::General(m) => {
            for i in 0..db {
                for j in 0..db {
                    let mut acc = ZERO;
                    for x in 0..da {
                        for y in 0..da {
                            acc += m[(y, x)] * rho[(x * db + i, y * db + j)];
                        }
                    }
                    out[(i, j)] = acc;
                }
            }
        }
    }
    out
}

/// `P(a, b) = Tr[(E_A(a) ⊗ E_B(b)) ρ_AB]` over every pair of outcomes.
pub fn joint_distribution(rho_ab: &DensityMatrix, povm_a: &Povm, povm_b: &Povm) -> Result<JointDistribution> {
    let (da, db) = (povm_a.dim(), povm_b.dim());
    if da * db != rho_ab.dim() {
        return Err(Error::DimensionMismatch(format!(
            "POVMs on {da} and {db} dimensions cannot measure a {}-dimensional state",
            rho_ab.dim()
        )));
    }
    povm_a.check_completeness()?;
    povm_b.check_completeness()?;
    let effects_a = povm_a.effects();
    let effects_b = povm_b.effects();
    let rho = rho_ab.matrix();

    let row = |(_, _, ea): &(Outcome, f64, Effect)| -> Vec<f64> {
        let reduced = contract_first(ea, rho, da, db);
        effects_b.iter().map(|(_, _, eb)| eb.trace_with(&reduced)).collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = effects_a.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = effects_a.iter().map(row).collect();

    JointDistribution::new(
        effects_a.iter().map(|(l, _, _)| *l).collect(),
        effects_b.iter().map(|(l, _, _)| *l).collect(),
        effects_a.iter().map(|(_, w, _)| *w).collect(),
        effects_b.iter().map(|(_, w, _)| *w).collect(),
        rows.concat(),
    )
}

/// Shannon mutual information of a joint distribution, in bits.
pub fn shannon_mutual(d: &JointDistribution) -> f64 {
    let pa = d.marginal_a();
    let pb = d.marginal_b();
    let nb = d.cols();
    let row_term = |(a, row): (usize, &[f64])| -> f64 {
        let ma = pa[a];
        row.iter()
            .zip(&pb)
            .filter(|(&m, _)| m > 0.0)
            .map(|(&m, &mb)| m * (m / (ma * mb)).log2())
            .sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    let terms: Vec<f64> = d.mass.par_chunks(nb).enumerate().map(row_term).collect();
    #[cfg(not(feature = "parallel"))]
    let terms: Vec<f64> = d.mass.chunks(nb).enumerate().map(row_term).collect();
    // nonnegative up to round-off; report independent variables as exactly 0
    terms.iter().sum::<f64>().max(0.0)
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// Compatible information of two measurements over all pure states.
pub fn nonselected_information(rho_ab: &DensityMatrix, grid: &BlochGrid) -> Result<f64> {
    require_two_qubits(rho_ab)?;
    let povm = Povm::continuous(grid.clone());
    Ok(shannon_mutual(&joint_distribution(rho_ab, &povm, &povm)?))
}

/// Compatible information of the mixed measurements with selectivity `chi`
/// and relative basis orientation `vartheta` of the second qubit.
pub fn selected_information(rho_ab: &DensityMatrix, chi: f64, vartheta: f64, grid: &BlochGrid) -> Result<f64> {
    require_two_qubits(rho_ab)?;
    Ok(shannon_mutual(&selected_distribution(rho_ab, chi, vartheta, grid)?))
}

/// Joint distribution behind [`selected_information`], with blocks
/// `(α,β)`, `(α,l)`, `(k,β)`, `(k,l)`.
pub fn selected_distribution(
    rho_ab: &DensityMatrix,
    chi: f64,
    vartheta: f64,
    grid: &BlochGrid,
) -> Result<JointDistribution> {
    if !vartheta.is_finite() {
        return Err(Error::NonFinite("vartheta"));
    }
    let povm_a = Povm::mixed(chi, grid.clone(), 0.0)?;
    let povm_b = Povm::mixed(chi, grid.clone(), vartheta)?;
    joint_distribution(rho_ab, &povm_a, &povm_b)
}

/// Information of the direct measurement in basis `|k⟩` on the first qubit
/// and the rotated basis on the second.
pub fn orthoprojective_information(rho_ab: &DensityMatrix, vartheta: f64) -> Result<f64> {
    require_two_qubits(rho_ab)?;
    let d = joint_distribution(rho_ab, &Povm::computational(2), &Povm::rotated_basis(vartheta))?;
    Ok(shannon_mutual(&d))
}

/// `⟨α|⟨β| ρ |β⟩|α⟩`, the continuous joint density per `dV_α dV_β`.
pub fn continuous_density(rho_ab: &DensityMatrix, alpha: BlochAngles, beta: BlochAngles) -> f64 {
    let v = crate::linalg::tensor_vec(&alpha.ket(), &beta.ket());
    rho_ab.matrix().expectation(&v).re
}

/// `P_kl(α, β) = ⟨k|⟨l| U_A U_B ρ U_B⁻¹ U_A⁻¹ |l⟩|k⟩`, where `U(α)` takes
/// `|α⟩` to `|1⟩`.
pub fn orientation_kernel(rho_ab: &DensityMatrix, alpha: BlochAngles, beta: BlochAngles) -> Result<[[f64; 2]; 2]> {
    require_two_qubits(rho_ab)?;
    let u = crate::linalg::tensor(&alpha.to_measurement_basis(), &beta.to_measurement_basis());
    let rotated = u.sandwich(rho_ab.matrix());
    let mut table = [[0.0; 2]; 2];
    for (k, row) in table.iter_mut().enumerate() {
        for (l, cell) in row.iter_mut().enumerate() {
            *cell = rotated[(2 * k + l, 2 * k + l)].re.max(0.0);
        }
    }
    Ok(table)
}

fn table_information(t: &[[f64; 2]; 2]) -> f64 {
    let pa = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
    let pb = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
    shannon_bits(pa) + shannon_bits(pb) - shannon_bits(t.iter().flatten().copied())
}

/// Orientation-averaged selected information next to the nonselected one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientationReport {
    /// Mean over `(α, β)` of the four-outcome information of the kernel.
    pub orientation_average: f64,
    pub nonselected: f64,
}

/// Averages the completely selective information over all measurement-basis
/// orientations (measure `dV_α dV_β / 4`) and reports it together with the
/// nonselected information. No relation between the two is assumed.
pub fn orientation_average_experiment(rho_ab: &DensityMatrix, grid: &BlochGrid) -> Result<OrientationReport> {
    require_two_qubits(rho_ab)?;
    let nodes = grid.nodes();
    let row = |na: &BlochNode| -> Result<f64> {
        let mut acc = 0.0;
        for nb in nodes {
            let t = orientation_kernel(rho_ab, na.angles, nb.angles)?;
            acc += nb.weight * table_information(&t);
        }
        Ok(na.weight * acc)
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<f64>> = nodes.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<f64>> = nodes.iter().map(row).collect();
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok(OrientationReport {
        orientation_average: total / 4.0,
        nonselected: nonselected_information(rho_ab, grid)?,
    })
}
