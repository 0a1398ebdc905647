//! Quantum channels in Kraus form and the information they carry.
//!
//! Joint output/reference states are laid out with the channel output as the
//! slow index and the reference as the fast one (`B ⊗ R`). Joint states built
//! from a channel acting on half of a purification are laid out `A ⊗ B` with
//! the untouched reference `A` first.

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, ZERO};
use crate::states::{purify, DensityMatrix, PureState};

/// Completeness tolerance for Kraus operators.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;

/// Completely positive trace-preserving map `ρ ↦ Σ K ρ K†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Empty("Kraus operator list"));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {i} is {}x{}, expected {dim_out}x{dim_in}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let channel = Self { dim_in, dim_out, kraus };
        let deviation = channel.completeness_deviation();
        if deviation > TRACE_PRESERVATION_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(channel)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `max |Σ K†K − I|`
    pub fn completeness_deviation(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc = &acc + &(&k.adjoint() * k);
        }
        acc.max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch("unitary must be square".into()));
        }
        let n = u.rows();
        Self::new(n, n, vec![u])
    }

    /// Qubit depolarizing channel `ρ ↦ (1−p)ρ + p I/2`, Kraus form over the
    /// Pauli matrices. `p = 1` is the fully depolarizing channel.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                range: "[0, 1]",
            });
        }
        let a = (1.0 - 3.0 * p / 4.0).sqrt();
        let b = (p / 4.0).sqrt();
        Self::new(
            2,
            2,
            vec![
                ComplexMatrix::identity(2).scale_real(a),
                linalg::pauli_x().scale_real(b),
                linalg::pauli_y().scale_real(b),
                linalg::pauli_z().scale_real(b),
            ],
        )
    }

    pub fn fully_depolarizing() -> Self {
        Self::depolarizing(1.0).expect("p = 1 is valid")
    }

    /// Qubit amplitude damping with decay probability `gamma` (`|2⟩ → |1⟩`).
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: gamma,
                range: "[0, 1]",
            });
        }
        let k0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()])?;
        let k1 = ComplexMatrix::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0])?;
        Self::new(2, 2, vec![k0, k1])
    }

    /// Measure in the computational basis and relabel at random:
    /// `K_{ji} = √T[i][j] |j⟩⟨i|` where row `i` of `transition` is the
    /// output distribution for input `i`.
    pub fn classical(transition: &[Vec<f64>]) -> Result<Self> {
        let dim_in = transition.len();
        if dim_in == 0 {
            return Err(Error::Empty("transition matrix"));
        }
        let dim_out = transition[0].len();
        let mut kraus = Vec::new();
        for (i, row) in transition.iter().enumerate() {
            if row.len() != dim_out {
                return Err(Error::DimensionMismatch("ragged transition matrix".into()));
            }
            for (j, &t) in row.iter().enumerate() {
                if t < 0.0 {
                    return Err(Error::OutOfRange {
                        name: "transition probability",
                        value: t,
                        range: "[0, 1]",
                    });
                }
                if t > 0.0 {
                    let mut k = ComplexMatrix::zeros(dim_out, dim_in);
                    k[(j, i)] = C64::new(t.sqrt(), 0.0);
                    kraus.push(k);
                }
            }
        }
        Self::new(dim_in, dim_out, kraus)
    }

    fn check_input(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel expects a {}-dimensional input, got {}",
                self.dim_in,
                rho.dim()
            )));
        }
        Ok(())
    }

    /// `Σ K ρ K†`
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho)?;
        DensityMatrix::new(self.apply_matrix(rho.matrix()))
    }

    /// `Σ K m K†` without validating `m` as a state.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &k.sandwich(m);
        }
        out
    }

    /// Adjoint map `X ↦ Σ K† X K`.
    pub fn apply_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out = &out + &(&(&k.adjoint() * x) * k);
        }
        out
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if self.dim_out != next.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed a {}-dimensional output into a {}-dimensional input",
                self.dim_out, next.dim_in
            )));
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Self::new(self.dim_in, next.dim_out, kraus)
    }

    /// Applies the channel to the system half of a purification of `rho_a`
    /// and returns the joint output/reference state (`B ⊗ R`).
    pub fn apply_with_reference(&self, rho_a: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho_a)?;
        let psi = purify(rho_a);
        DensityMatrix::new(self.act_on_first(&psi, rho_a.dim()))
    }

    /// `Σ (K ⊗ I)|Ψ⟩⟨Ψ|(K ⊗ I)†` for `Ψ` on `(input) ⊗ (dim_ref)`.
    fn act_on_first(&self, psi: &PureState, dim_ref: usize) -> ComplexMatrix {
        let amps = psi.amplitudes();
        let n = self.dim_out * dim_ref;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            let mut v = vec![ZERO; n];
            for b in 0..self.dim_out {
                for a in 0..self.dim_in {
                    let kba = k[(b, a)];
                    if kba == ZERO {
                        continue;
                    }
                    for r in 0..dim_ref {
                        v[b * dim_ref + r] += kba * amps[a * dim_ref + r];
                    }
                }
            }
            out = &out + &ComplexMatrix::projector(&v);
        }
        out
    }

    /// Forward joint state `(I ⊗ N)|Ψ⟩⟨Ψ|` of a reference `A` and the channel
    /// output `B`, where `Ψ` purifies `rho_a`. The `A` marginal is `rho_a`.
    pub fn joint_from_channel(&self, rho_a: &DensityMatrix) -> Result<DensityMatrix> {
        let br = self.apply_with_reference(rho_a)?;
        DensityMatrix::new(swap_subsystems(br.matrix(), self.dim_out, rho_a.dim()))
    }

    /// `S[ρ_B] − S[ρ_BR]`, possibly negative.
    pub fn coherent_information(&self, rho_a: &DensityMatrix) -> Result<f64> {
        let br = self.apply_with_reference(rho_a)?;
        let b = br.reduce(&[self.dim_out, rho_a.dim()], &[0])?;
        Ok(b.entropy() - br.entropy())
    }

    /// [`coherent_information`](Self::coherent_information) with negative values reported as zero.
    pub fn coherent_information_clamped(&self, rho_a: &DensityMatrix) -> Result<f64> {
        Ok(self.coherent_information(rho_a)?.max(0.0))
    }
}

/// Reorders a bipartite operator on `X ⊗ Y` into `Y ⊗ X`.
pub fn swap_subsystems(m: &ComplexMatrix, dim_x: usize, dim_y: usize) -> ComplexMatrix {
    let n = dim_x * dim_y;
    let perm = |i: usize| (i % dim_y) * dim_x + i / dim_y;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(perm(r), perm(c))] = m[(r, c)];
        }
    }
    out
}

fn check_bipartite(rho: &DensityMatrix, dims: (usize, usize)) -> Result<()> {
    if dims.0 * dims.1 != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} subsystems do not match a {}-dimensional joint state",
            dims.0,
            dims.1,
            rho.dim()
        )));
    }
    Ok(())
}

/// `S[ρ_A] + S[ρ_B] − S[ρ_AB]`
pub fn one_time_mutual(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<f64> {
    check_bipartite(rho_ab, dims)?;
    let d = [dims.0, dims.1];
    let sa = rho_ab.reduce(&d, &[0])?.entropy();
    let sb = rho_ab.reduce(&d, &[1])?.entropy();
    Ok(sa + sb - rho_ab.entropy())
}

/// `S[ρ_B] − S[ρ_AB]`, possibly negative.
pub fn one_time_coherent(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<f64> {
    check_bipartite(rho_ab, dims)?;
    let sb = rho_ab.reduce(&[dims.0, dims.1], &[1])?.entropy();
    Ok(sb - rho_ab.entropy())
}

/// [`one_time_coherent`] with negative values reported as zero.
pub fn one_time_coherent_clamped(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<f64> {
    Ok(one_time_coherent(rho_ab, dims)?.max(0.0))
}

/// Parameters of the three-level Λ atom driven by one pulse and then left
/// to decay into the photon field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaParams {
    /// Decay rate of the excited state into ground state `|1⟩`.
    pub gamma1: f64,
    /// Decay rate into ground state `|2⟩`.
    pub gamma2: f64,
    /// Pulse action angle `Ω τ_p`.
    pub theta: f64,
    /// Decay time after the pulse.
    pub t: f64,
}

impl LambdaParams {
    pub fn new(gamma1: f64, gamma2: f64, theta: f64, t: f64) -> Result<Self> {
        let p = Self {
            gamma1,
            gamma2,
            theta,
            t,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "[0, ∞)",
                });
            }
        }
        if self.gamma1 + self.gamma2 <= 0.0 {
            return Err(Error::OutOfRange {
                name: "gamma1 + gamma2",
                value: self.gamma1 + self.gamma2,
                range: "(0, ∞)",
            });
        }
        if !(0.0..=2.0 * std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: self.theta,
                range: "[0, 2π]",
            });
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::OutOfRange {
                name: "t",
                value: self.t,
                range: "[0, ∞)",
            });
        }
        Ok(())
    }

    /// Total decay rate `Γ = γ₁ + γ₂`.
    pub fn total_rate(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    /// Amplitude left in the excited state, `e^{−Γt}`.
    pub fn survival(&self) -> f64 {
        (-self.total_rate() * self.t).exp()
    }

    /// Ground-state superposition coupled to `|e⟩` by the pulse, as
    /// coefficients on `(|1⟩, |2⟩)`: `(√γ₂, √γ₁)/√Γ`.
    ///
    /// With one decay channel closed this pumps the ground state that the
    /// excited level does not decay into, which is the two-level radiator.
    pub fn bright_state(&self) -> [f64; 2] {
        let g = self.total_rate();
        [(self.gamma2 / g).sqrt(), (self.gamma1 / g).sqrt()]
    }

    /// Orthogonal partner of [`bright_state`](Self::bright_state), untouched by the pulse.
    pub fn dark_state(&self) -> [f64; 2] {
        let [b1, b2] = self.bright_state();
        [b2, -b1]
    }
}

/// Channel from the ground-state qubit `span{|1⟩, |2⟩}` of a Λ atom to the
/// single-excitation photon field `span{|vac⟩, |ph₁⟩, |ph₂⟩}`.
///
/// 1. The pulse rotates the bright state toward `|e⟩` by `θ/2` in amplitude;
///    the dark state is untouched.
/// 2. Decay for time `t`: `|e⟩ → √η|e⟩|vac⟩ + √(γ₁(1−η)/Γ)|1⟩|ph₁⟩ +
///    √(γ₂(1−η)/Γ)|2⟩|ph₂⟩` with `η = e^{−Γt}`; ground states stay put with
///    the field in vacuum.
/// 3. The atom is traced out, one Kraus operator per atomic basis state
///    `|1⟩, |2⟩, |e⟩`.
pub fn lambda_channel(p: &LambdaParams) -> Result<KrausChannel> {
    p.validate()?;
    let gamma = p.total_rate();
    let eta = p.survival();
    let bright = p.bright_state();
    let dark = p.dark_state();
    let (s, c) = (p.theta / 2.0).sin_cos();

    // Atom after the pulse for each input basis state: amplitudes on (|1⟩, |2⟩, |e⟩).
    let after_pulse: Vec<[f64; 3]> = (0..2)
        .map(|i| {
            let (cb, cd) = (bright[i], dark[i]);
            [
                cd * dark[0] + cb * c * bright[0],
                cd * dark[1] + cb * c * bright[1],
                cb * s,
            ]
        })
        .collect();

    let decay_1 = (p.gamma1 * (1.0 - eta) / gamma).sqrt();
    let decay_2 = (p.gamma2 * (1.0 - eta) / gamma).sqrt();
    let stay = eta.sqrt();

    const VAC: usize = 0;
    const PH1: usize = 1;
    const PH2: usize = 2;
    let mut kraus = vec![ComplexMatrix::zeros(3, 2); 3];
    for (input, amps) in after_pulse.iter().enumerate() {
        let [g1, g2, e] = *amps;
        // atom |1⟩: undisturbed ground amplitude plus decay into ph₁
        kraus[0][(VAC, input)] += C64::new(g1, 0.0);
        kraus[0][(PH1, input)] += C64::new(e * decay_1, 0.0);
        // atom |2⟩
        kraus[1][(VAC, input)] += C64::new(g2, 0.0);
        kraus[1][(PH2, input)] += C64::new(e * decay_2, 0.0);
        // atom still excited
        kraus[2][(VAC, input)] += C64::new(e * stay, 0.0);
    }
    KrausChannel::new(2, 3, kraus)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    linalg::shannon_bits([p, 1.0 - p])
}

/// Input state `(1−p)|d⟩⟨d| + p|b⟩⟨b|` diagonal in the dark/bright basis
/// of the Λ atom.
pub fn lambda_input(params: &LambdaParams, bright_population: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&bright_population) {
        return Err(Error::OutOfRange {
            name: "bright population",
            value: bright_population,
            range: "[0, 1]",
        });
    }
    let b: Vec<C64> = params.bright_state().iter().map(|&x| C64::new(x, 0.0)).collect();
    let d: Vec<C64> = params.dark_state().iter().map(|&x| C64::new(x, 0.0)).collect();
    DensityMatrix::new(
        &ComplexMatrix::projector(&b).scale_real(bright_population)
            + &ComplexMatrix::projector(&d).scale_real(1.0 - bright_population),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{mixed_family, pure_family};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn half() -> DensityMatrix {
        DensityMatrix::maximally_mixed(2)
    }

    #[test]
    fn rejects_bad_kraus_sets() {
        assert!(matches!(KrausChannel::new(2, 2, vec![]), Err(Error::Empty(_))));
        let k = ComplexMatrix::identity(2).scale_real(0.9);
        assert!(matches!(
            KrausChannel::new(2, 2, vec![k]),
            Err(Error::NotTracePreserving { .. })
        ));
        assert!(KrausChannel::new(2, 3, vec![ComplexMatrix::identity(2)]).is_err());
    }

    #[test]
    fn input_dimension_checked() {
        let ch = KrausChannel::identity(2);
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(ch.apply(&rho), Err(Error::DimensionMismatch(_))));
        assert!(ch.coherent_information(&rho).is_err());
    }

    #[test]
    fn fully_depolarizing_outputs_maximally_mixed() {
        let ch = KrausChannel::fully_depolarizing();
        let rho = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(half().matrix()) < 1e-15);
    }

    #[test]
    fn depolarized_reference_state() {
        let joint = KrausChannel::fully_depolarizing()
            .apply_with_reference(&half())
            .unwrap();
        assert!(
            joint
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                < 1e-12
        );
        let rho = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let ab = KrausChannel::fully_depolarizing().joint_from_channel(&rho).unwrap();
        assert!(ab.matrix().max_abs_diff(rho.tensor(&half()).matrix()) < 1e-12);
    }

    #[test]
    fn identity_channel_keeps_full_entanglement() {
        let ch = KrausChannel::identity(2);
        let joint = ch.apply_with_reference(&half()).unwrap();
        assert_abs_diff_eq!(joint.purity(), 1.0, epsilon = 1e-12);
        assert!(joint.matrix().max_abs_diff(pure_family(1.0).unwrap().matrix()) < 1e-12);
        assert_abs_diff_eq!(ch.coherent_information(&half()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn one_time_values() {
        let product = DensityMatrix::diagonal(&[0.3, 0.7])
            .unwrap()
            .tensor(&DensityMatrix::diagonal(&[0.6, 0.4]).unwrap());
        assert_abs_diff_eq!(one_time_mutual(&product, (2, 2)).unwrap(), 0.0, epsilon = 1e-12);
        let bell = pure_family(1.0).unwrap();
        assert_abs_diff_eq!(one_time_mutual(&bell, (2, 2)).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(one_time_coherent(&bell, (2, 2)).unwrap(), 1.0, epsilon = 1e-12);
        let classical = mixed_family(0.0).unwrap();
        assert_abs_diff_eq!(one_time_mutual(&classical, (2, 2)).unwrap(), 1.0, epsilon = 1e-12);
        let uniform = DensityMatrix::diagonal(&[0.25; 4]).unwrap();
        assert_abs_diff_eq!(one_time_coherent(&uniform, (2, 2)).unwrap(), -1.0, epsilon = 1e-12);
        assert_eq!(one_time_coherent_clamped(&uniform, (2, 2)).unwrap(), 0.0);
        assert!(one_time_mutual(&bell, (2, 3)).is_err());
    }

    #[test]
    fn classical_channel_is_never_coherent() {
        let ch = KrausChannel::classical(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let rho = DensityMatrix::diagonal(&[0.4, 0.6]).unwrap();
        assert!(ch.coherent_information(&rho).unwrap() <= 1e-12);
    }

    #[test]
    fn swap_roundtrip() {
        let m = ComplexMatrix::from_fn(6, 6, |r, c| C64::new(r as f64, c as f64));
        let back = swap_subsystems(&swap_subsystems(&m, 2, 3), 3, 2);
        assert_eq!(back, m);
    }

    #[test]
    fn lambda_params_validation() {
        assert!(LambdaParams::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(LambdaParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(LambdaParams::new(1.0, 1.0, 7.0, 1.0).is_err());
        assert!(LambdaParams::new(1.0, 1.0, 1.0, f64::INFINITY).is_err());
        assert!(LambdaParams::new(1.0, 0.0, PI, 0.0).is_ok());
    }

    #[test]
    fn lambda_at_zero_time_emits_nothing() {
        let p = LambdaParams::new(1.0, 1.0, PI, 0.0).unwrap();
        let ch = lambda_channel(&p).unwrap();
        let out = ch.apply(&half()).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_eq!(ch.coherent_information_clamped(&half()).unwrap(), 0.0);
    }

    #[test]
    fn lambda_without_pulse_is_constant_vacuum() {
        let p = LambdaParams::new(1.0, 0.5, 0.0, 2.0).unwrap();
        let ch = lambda_channel(&p).unwrap();
        for rho in [half(), DensityMatrix::diagonal(&[1.0, 0.0]).unwrap()] {
            let out = ch.apply(&rho).unwrap();
            assert!(out.matrix().max_abs_diff(&ComplexMatrix::diag(&[1.0, 0.0, 0.0])) < 1e-12);
        }
    }

    #[test]
    fn two_level_limit_is_complementary_amplitude_damping() {
        for t in [0.1, 0.5, 1.0, 1.8457, 3.0, 6.0] {
            let p = LambdaParams::new(1.0, 0.0, PI, t).unwrap();
            let eta = p.survival();
            let expected = binary_entropy((1.0 - eta) / 2.0) - binary_entropy(eta / 2.0);
            let got = lambda_channel(&p).unwrap().coherent_information(&half()).unwrap();
            assert_abs_diff_eq!(got, expected, epsilon = 1e-9);
        }
    }
}
