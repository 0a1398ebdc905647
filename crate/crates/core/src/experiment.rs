//! Prepare–extract–transmit–read out experiments.
//!
//! An experiment feeds `rho_in` through an extraction measure `A(da)`, a
//! channel `N` and a readout measure `B(db)`. The joint law of the two
//! labels is `P(a, b) = μ(a) ν(b) Tr B_b N A_a ρ_in`, and its Shannon mutual
//! information is the figure of merit that control parameters are tuned for.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{lambda_channel, lambda_input, KrausChannel, LambdaParams};
use crate::error::{Error, Result};
use crate::grid::BlochGrid;
use crate::io::{self, JsonMatrix};
use crate::linalg::{qubit_rotation, ComplexMatrix, C64};
use crate::measurement::{shannon_mutual, JointDistribution, Outcome};
use crate::optimize::{self, maximize_1d, Evaluation, Interval, SearchConfig};
use crate::states::{bloch_state, mixed_family, pure_family, BlochAngles, DensityMatrix};

/// Allowed deviation of `Σ μ A†A` from the identity.
pub const PSM_NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsmFlavor {
    /// `ρ ↦ U(a) ρ U(a)†` with an a-priori weight per label.
    UnitaryFamily,
    /// `ρ ↦ |a⟩⟨a|ρ|a⟩⟨a|`, a record that can be copied.
    ProjectiveFamily,
    General,
}

#[derive(Clone, Debug)]
pub struct PsmOutcome {
    pub label: String,
    pub weight: f64,
    pub branch: Vec<ComplexMatrix>,
}

/// Positive superoperator measure: labeled completely positive branches
/// whose weighted sum is trace preserving.
#[derive(Clone, Debug)]
pub struct Psm {
    flavor: PsmFlavor,
    dim_in: usize,
    dim_out: usize,
    outcomes: Vec<PsmOutcome>,
}

impl Psm {
    pub fn new(flavor: PsmFlavor, outcomes: Vec<PsmOutcome>) -> Result<Self> {
        let first = outcomes
            .iter()
            .flat_map(|o| o.branch.first())
            .next()
            .ok_or(Error::Empty("measure"))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        for o in &outcomes {
            if !(o.weight >= 0.0 && o.weight.is_finite()) {
                return Err(Error::OutOfRange {
                    name: "outcome weight",
                    value: o.weight,
                    range: "[0, ∞)",
                });
            }
            if o.branch.iter().any(|k| k.rows() != dim_out || k.cols() != dim_in) {
                return Err(Error::DimensionMismatch(format!(
                    "branch operators of outcome `{}` must all be {dim_out}×{dim_in}",
                    o.label
                )));
            }
        }
        let psm = Self {
            flavor,
            dim_in,
            dim_out,
            outcomes,
        };
        let deviation = psm.normalization_deviation();
        if deviation > PSM_NORMALIZATION_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(psm)
    }

    /// Unitary family; weights default to uniform.
    pub fn unitary_family(unitaries: Vec<ComplexMatrix>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = unitaries.len();
        let weights = weights.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        if weights.len() != n {
            return Err(Error::DimensionMismatch("one weight per unitary".into()));
        }
        let outcomes = unitaries
            .into_iter()
            .zip(weights)
            .enumerate()
            .map(|(a, (u, weight))| PsmOutcome {
                label: format!("u{a}"),
                weight,
                branch: vec![u],
            })
            .collect();
        Self::new(PsmFlavor::UnitaryFamily, outcomes)
    }

    /// Projective family `|a⟩⟨a| · |a⟩⟨a|`; weights default to one.
    pub fn projective(kets: Vec<Vec<C64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = kets.len();
        let weights = weights.unwrap_or_else(|| vec![1.0; n]);
        if weights.len() != n {
            return Err(Error::DimensionMismatch("one weight per ket".into()));
        }
        let outcomes = kets
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(a, (ket, weight))| PsmOutcome {
                label: a.to_string(),
                weight,
                branch: vec![ComplexMatrix::projector(ket)],
            })
            .collect();
        Self::new(PsmFlavor::ProjectiveFamily, outcomes)
    }

    pub fn computational(dim: usize) -> Result<Self> {
        Self::projective((0..dim).map(|k| crate::linalg::basis_vector(dim, k)).collect(), None)
    }

    /// Qubit basis `U⁻¹|l⟩`, `U = exp(iσ_y ϑ/2)`.
    pub fn rotated_basis(vartheta: f64) -> Result<Self> {
        let u_inv = qubit_rotation(vartheta).adjoint();
        Self::projective(vec![u_inv.column(0), u_inv.column(1)], None)
    }

    /// Projective family over Bloch-grid nodes, weighted by the grid.
    pub fn bloch(grid: &BlochGrid) -> Result<Self> {
        let kets = grid.nodes().iter().map(|n| n.ket.to_vec()).collect();
        let weights = grid.nodes().iter().map(|n| n.weight).collect();
        Self::projective(kets, Some(weights))
    }

    pub fn flavor(&self) -> PsmFlavor {
        self.flavor
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn outcomes(&self) -> &[PsmOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// `μ(a) Σ_i A m A†` for outcome `a`.
    pub fn apply_branch(&self, a: usize, m: &ComplexMatrix) -> ComplexMatrix {
        let o = &self.outcomes[a];
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &o.branch {
            out = &out + &k.sandwich(m);
        }
        out.scale_real(o.weight)
    }

    /// Weighted effect `μ(a) Σ_i A†A` of outcome `a` on the input space.
    pub fn effect(&self, a: usize) -> ComplexMatrix {
        self.adjoint_branch(a, &ComplexMatrix::identity(self.dim_out))
    }

    fn adjoint_branch(&self, a: usize, x: &ComplexMatrix) -> ComplexMatrix {
        let o = &self.outcomes[a];
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &o.branch {
            out = &out + &(&(&k.adjoint() * x) * k);
        }
        out.scale_real(o.weight)
    }

    /// Heisenberg-picture sum `Σ_a μ(a) Σ_i A† x A`.
    pub fn apply_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        (0..self.len()).fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, a| {
            &acc + &self.adjoint_branch(a, x)
        })
    }

    /// `max |Σ_a μ(a) Σ_i A†A − I|`
    pub fn normalization_deviation(&self) -> f64 {
        self.apply_adjoint(&ComplexMatrix::identity(self.dim_out))
            .max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }
}

/// A fully specified experiment with no free parameters.
#[derive(Clone, Debug)]
pub struct SchemeInstance {
    pub rho_in: DensityMatrix,
    pub extraction: Psm,
    pub channel: KrausChannel,
    pub readout: Psm,
}

impl SchemeInstance {
    pub fn new(rho_in: DensityMatrix, extraction: Psm, channel: KrausChannel, readout: Psm) -> Result<Self> {
        let chain = [
            ("input state", rho_in.dim(), "extraction", extraction.dim_in()),
            ("extraction", extraction.dim_out(), "channel", channel.dim_in()),
            ("channel", channel.dim_out(), "readout", readout.dim_in()),
        ];
        for (from, out, to, inp) in chain {
            if out != inp {
                return Err(Error::DimensionMismatch(format!(
                    "{from} produces dimension {out} but {to} expects {inp}"
                )));
            }
        }
        Ok(Self {
            rho_in,
            extraction,
            channel,
            readout,
        })
    }

    pub fn distribution(&self) -> Result<JointDistribution> {
        let effects: Vec<ComplexMatrix> = (0..self.readout.len()).map(|b| self.readout.effect(b)).collect();
        let row = |a: usize| -> Vec<f64> {
            let sent = self
                .channel
                .apply_matrix(&self.extraction.apply_branch(a, self.rho_in.matrix()));
            effects.iter().map(|e| (e * &sent).trace().re).collect()
        };
        #[cfg(feature = "parallel")]
        let rows: Vec<Vec<f64>> = (0..self.extraction.len()).into_par_iter().map(row).collect();
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Vec<f64>> = (0..self.extraction.len()).map(row).collect();

        let (na, nb) = (self.extraction.len(), self.readout.len());
        JointDistribution::new(
            (0..na).map(Outcome::Discrete).collect(),
            (0..nb).map(Outcome::Discrete).collect(),
            vec![1.0; na],
            vec![1.0; nb],
            rows.concat(),
        )
    }

    pub fn information(&self) -> Result<f64> {
        Ok(shannon_mutual(&self.distribution()?))
    }
}

/// A real number that is either fixed or taken from a named control.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Value(f64),
    Control { control: String },
}

impl Param {
    pub fn control(name: &str) -> Self {
        Param::Control {
            control: name.to_string(),
        }
    }

    fn resolve(&self, values: &ControlValues) -> Result<f64> {
        match self {
            Param::Value(v) => Ok(*v),
            Param::Control { control } => values.get(control),
        }
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Value(v)
    }
}

/// Named tunable parameter with its admissible range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Control {
    pub name: String,
    pub min: f64,
    pub max: f64,
    /// Value used when the scheme is evaluated without optimization;
    /// defaults to `min`.
    #[serde(default)]
    pub value: Option<f64>,
}

impl Control {
    pub fn new(name: &str, min: f64, max: f64) -> Self {
        Self {
            name: name.to_string(),
            min,
            max,
            value: None,
        }
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub fn interval(&self) -> Result<Interval> {
        Interval::new(self.min, self.max)
    }

    pub fn default_value(&self) -> f64 {
        self.value.unwrap_or(self.min)
    }
}

struct ControlValues<'a> {
    controls: &'a [Control],
    values: &'a [f64],
}

impl ControlValues<'_> {
    fn get(&self, name: &str) -> Result<f64> {
        self.controls
            .iter()
            .position(|c| c.name == name)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::UnknownControl(name.to_string()))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    MaximallyMixed {
        dim: usize,
    },
    Diagonal {
        probs: Vec<f64>,
    },
    Matrix {
        dim: usize,
        matrix: JsonMatrix,
    },
    /// Pure qubit state on the Bloch sphere.
    Bloch {
        theta: Param,
        phi: Param,
    },
    PureFamily {
        q: Param,
    },
    MixedFamily {
        q: Param,
    },
    /// Density-matrix file, relative to the scheme file.
    File {
        path: PathBuf,
    },
    #[serde(skip_deserializing)]
    Given(DensityMatrix),
}

impl StateSpec {
    fn build(&self, v: &ControlValues) -> Result<DensityMatrix> {
        match self {
            StateSpec::MaximallyMixed { dim } => Ok(DensityMatrix::maximally_mixed(*dim)),
            StateSpec::Diagonal { probs } => DensityMatrix::diagonal(probs),
            StateSpec::Matrix { dim, matrix } => DensityMatrix::new(matrix.to_matrix(*dim, *dim)?),
            StateSpec::Bloch { theta, phi } => {
                Ok(bloch_state(BlochAngles::new(theta.resolve(v)?, phi.resolve(v)?)?).density())
            }
            StateSpec::PureFamily { q } => pure_family(q.resolve(v)?),
            StateSpec::MixedFamily { q } => mixed_family(q.resolve(v)?),
            StateSpec::File { path } => io::load_density(path),
            StateSpec::Given(rho) => Ok(rho.clone()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity {
        dim: usize,
    },
    Depolarizing {
        p: Param,
    },
    AmplitudeDamping {
        gamma: Param,
    },
    /// Qubit rotation `exp(iσ_y angle/2)`.
    Rotation {
        angle: Param,
    },
    Lambda {
        gamma1: f64,
        gamma2: f64,
        theta: Param,
        t: Param,
    },
    Kraus {
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<JsonMatrix>,
    },
    /// Channel file, relative to the scheme file.
    File {
        path: PathBuf,
    },
    #[serde(skip_deserializing)]
    Given(KrausChannel),
}

impl ChannelSpec {
    fn build(&self, v: &ControlValues) -> Result<KrausChannel> {
        match self {
            ChannelSpec::Identity { dim } => Ok(KrausChannel::identity(*dim)),
            ChannelSpec::Depolarizing { p } => KrausChannel::depolarizing(p.resolve(v)?),
            ChannelSpec::AmplitudeDamping { gamma } => KrausChannel::amplitude_damping(gamma.resolve(v)?),
            ChannelSpec::Rotation { angle } => KrausChannel::unitary(qubit_rotation(angle.resolve(v)?)),
            ChannelSpec::Lambda {
                gamma1,
                gamma2,
                theta,
                t,
            } => lambda_channel(&LambdaParams::new(*gamma1, *gamma2, theta.resolve(v)?, t.resolve(v)?)?),
            ChannelSpec::Kraus { dim_in, dim_out, kraus } => io::ChannelFile {
                dim_in: *dim_in,
                dim_out: *dim_out,
                kraus: kraus.clone(),
            }
            .to_channel(),
            ChannelSpec::File { path } => io::load_channel(path),
            ChannelSpec::Given(ch) => Ok(ch.clone()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSpec {
    Computational {
        dim: usize,
    },
    /// Qubit basis rotated by `exp(iσ_y angle/2)`.
    Rotated {
        angle: Param,
    },
    /// Bloch-sphere quadrature nodes, weighted by the grid.
    Bloch {
        n_theta: usize,
        n_phi: usize,
    },
    Kets {
        kets: Vec<Vec<[f64; 2]>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSpec {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    pub operators: Vec<JsonMatrix>,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "flavor", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsmSpec {
    Projective {
        basis: BasisSpec,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    /// Either `rotations` (qubit angles) or explicit `unitaries`.
    Unitary {
        #[serde(default)]
        rotations: Option<Vec<Param>>,
        #[serde(default)]
        unitaries: Option<Vec<JsonMatrix>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    General {
        outcomes: Vec<OutcomeSpec>,
    },
    #[serde(skip_deserializing)]
    Given(Psm),
}

impl PsmSpec {
    fn build(&self, v: &ControlValues) -> Result<Psm> {
        match self {
            PsmSpec::Projective { basis, weights } => {
                let kets = match basis {
                    BasisSpec::Computational { dim } => {
                        (0..*dim).map(|k| crate::linalg::basis_vector(*dim, k)).collect()
                    }
                    BasisSpec::Rotated { angle } => {
                        let u_inv = qubit_rotation(angle.resolve(v)?).adjoint();
                        vec![u_inv.column(0), u_inv.column(1)]
                    }
                    BasisSpec::Bloch { n_theta, n_phi } => {
                        let grid = BlochGrid::new(*n_theta, *n_phi)?;
                        let w = weights
                            .clone()
                            .unwrap_or_else(|| grid.nodes().iter().map(|n| n.weight).collect());
                        let kets = grid.nodes().iter().map(|n| n.ket.to_vec()).collect();
                        return Psm::projective(kets, Some(w));
                    }
                    BasisSpec::Kets { kets } => kets
                        .iter()
                        .map(|k| k.iter().map(|&[re, im]| C64::new(re, im)).collect())
                        .collect(),
                };
                Psm::projective(kets, weights.clone())
            }
            PsmSpec::Unitary {
                rotations,
                unitaries,
                weights,
            } => {
                let us = match (rotations, unitaries) {
                    (Some(angles), None) => angles
                        .iter()
                        .map(|a| Ok(qubit_rotation(a.resolve(v)?)))
                        .collect::<Result<Vec<_>>>()?,
                    (None, Some(ms)) => ms.iter().map(JsonMatrix::to_matrix_auto).collect::<Result<Vec<_>>>()?,
                    _ => {
                        return Err(Error::Schema {
                            path: "unitary".into(),
                            message: "give exactly one of `rotations` or `unitaries`".into(),
                        })
                    }
                };
                Psm::unitary_family(us, weights.clone())
            }
            PsmSpec::General { outcomes } => {
                let outcomes = outcomes
                    .iter()
                    .enumerate()
                    .map(|(a, o)| {
                        Ok(PsmOutcome {
                            label: o.label.clone().unwrap_or_else(|| a.to_string()),
                            weight: o.weight,
                            branch: o
                                .operators
                                .iter()
                                .map(JsonMatrix::to_matrix_auto)
                                .collect::<Result<_>>()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Psm::new(PsmFlavor::General, outcomes)
            }
            PsmSpec::Given(psm) => Ok(psm.clone()),
        }
    }
}

/// Experiment with optional named controls.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentScheme {
    pub rho_in: StateSpec,
    pub extraction: PsmSpec,
    pub channel: ChannelSpec,
    pub readout: PsmSpec,
    #[serde(default)]
    pub controls: Vec<Control>,
}

impl ExperimentScheme {
    /// Scheme without controls from already-built parts.
    pub fn fixed(rho_in: DensityMatrix, extraction: Psm, channel: KrausChannel, readout: Psm) -> Self {
        Self {
            rho_in: StateSpec::Given(rho_in),
            extraction: PsmSpec::Given(extraction),
            channel: ChannelSpec::Given(channel),
            readout: PsmSpec::Given(readout),
            controls: vec![],
        }
    }

    /// Parses a scheme, resolving file references against `base_dir`, and
    /// checks it at the default control values.
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut scheme: Self = io::from_json_str(text)?;
        if let Some(dir) = base_dir {
            scheme.resolve_paths(dir);
        }
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&io::read_text(path)?, path.parent())
    }

    fn resolve_paths(&mut self, dir: &Path) {
        if let StateSpec::File { path } = &mut self.rho_in {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
        if let ChannelSpec::File { path } = &mut self.channel {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.controls.iter().enumerate() {
            let range = c.interval()?;
            let v = c.default_value();
            if !(range.lo..=range.hi).contains(&v) {
                return Err(Error::OutOfRange {
                    name: "control value",
                    value: v,
                    range: "[min, max] of its control",
                });
            }
            if self.controls[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::Schema {
                    path: "controls".into(),
                    message: format!("duplicate control `{}`", c.name),
                });
            }
        }
        self.instantiate(&self.default_values()).map(|_| ())
    }

    pub fn default_values(&self) -> Vec<f64> {
        self.controls.iter().map(Control::default_value).collect()
    }

    pub fn control_names(&self) -> Vec<String> {
        self.controls.iter().map(|c| c.name.clone()).collect()
    }

    /// Builds the concrete experiment for one value per control.
    pub fn instantiate(&self, values: &[f64]) -> Result<SchemeInstance> {
        if values.len() != self.controls.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} control values for {} controls",
                values.len(),
                self.controls.len()
            )));
        }
        let v = ControlValues {
            controls: &self.controls,
            values,
        };
        SchemeInstance::new(
            self.rho_in.build(&v)?,
            self.extraction.build(&v)?,
            self.channel.build(&v)?,
            self.readout.build(&v)?,
        )
    }
}

/// Joint label distribution at the default control values.
pub fn experiment_distribution(s: &ExperimentScheme) -> Result<JointDistribution> {
    s.instantiate(&s.default_values())?.distribution()
}

/// Shannon information between extraction and readout labels, in bits.
pub fn experiment_information(s: &ExperimentScheme) -> Result<f64> {
    s.instantiate(&s.default_values())?.information()
}

/// Outcome of a parameter search.
#[derive(Clone, Debug, Serialize)]
pub struct RateResult {
    pub best_value: f64,
    pub best_params: BTreeMap<String, f64>,
    /// Best value among the coarse grid samples.
    pub best_grid_value: f64,
    /// Parameter order used in `trace`.
    pub param_names: Vec<String>,
    pub trace: Vec<Evaluation>,
}

impl RateResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.best_params.get(name).copied()
    }
}

/// Grid-then-golden search of a fallible objective. The first objective
/// error aborts the result.
fn search(
    names: Vec<String>,
    bounds: &[Interval],
    points: &[usize],
    config: SearchConfig,
    f: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<RateResult> {
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let out = optimize::maximize(
        |p| match f(p) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                f64::NAN
            }
        },
        bounds,
        points,
        config,
    )?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(RateResult {
        best_value: out.best.value,
        best_params: names.iter().cloned().zip(out.best.params.iter().copied()).collect(),
        best_grid_value: out.best_grid_value,
        param_names: names,
        trace: out.trace,
    })
}

/// Maximizes `f` over the controls' ranges: `⌈√budget⌉` grid points per
/// axis, then golden-section refinement.
pub fn optimize_objective(
    controls: &[Control],
    budget: usize,
    f: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<RateResult> {
    if controls.is_empty() {
        return Err(Error::Empty("control set"));
    }
    if budget < 9 {
        return Err(Error::OutOfRange {
            name: "budget",
            value: budget as f64,
            range: ">= 9",
        });
    }
    let bounds = controls.iter().map(Control::interval).collect::<Result<Vec<_>>>()?;
    let n = (budget as f64).sqrt().ceil() as usize;
    search(
        controls.iter().map(|c| c.name.clone()).collect(),
        &bounds,
        &vec![n; bounds.len()],
        SearchConfig::default(),
        f,
    )
}

/// Tunes the scheme's controls for maximal [`experiment_information`].
pub fn optimize_controls(s: &ExperimentScheme, budget: usize) -> Result<RateResult> {
    optimize_objective(&s.controls, budget, |v| s.instantiate(v)?.information())
}

/// Input state used for the Λ emission rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaInput {
    /// `I/2` on the ground-state qubit.
    MaximallyMixed,
    /// Best state diagonal in the dark/bright basis, chosen per `(t, θ)`.
    Optimized,
}

/// Default scan length in units of `1/Γ`.
pub const LAMBDA_T_SPAN: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct LambdaRateConfig {
    pub n_t: usize,
    pub n_theta: usize,
    /// Inclusive `t` range; defaults to `[T/n_t, T]` with `T = 10/Γ`, so the
    /// grid covers `(0, T]`.
    pub t_range: Option<(f64, f64)>,
    pub theta_range: (f64, f64),
    pub refine: bool,
    pub input: LambdaInput,
}

impl Default for LambdaRateConfig {
    fn default() -> Self {
        Self {
            n_t: 64,
            n_theta: 64,
            t_range: None,
            theta_range: (0.0, PI),
            refine: true,
            input: LambdaInput::MaximallyMixed,
        }
    }
}

/// Coherent information of the Λ channel, with the bright-state population
/// of the input that was used.
pub fn lambda_coherent_information(params: &LambdaParams, input: LambdaInput) -> Result<(f64, f64)> {
    let ch = lambda_channel(params)?;
    match input {
        LambdaInput::MaximallyMixed => Ok((ch.coherent_information(&DensityMatrix::maximally_mixed(2))?, 0.5)),
        LambdaInput::Optimized => {
            let ic = |p: f64| {
                lambda_input(params, p)
                    .and_then(|rho| ch.coherent_information(&rho))
                    .unwrap_or(f64::NEG_INFINITY)
            };
            let (p, v) = maximize_1d(ic, 0.0, 1.0, 1e-9);
            Ok((v, p))
        }
    }
}

/// `R = max(I_c, 0)/t`, zero at `t = 0`.
pub fn lambda_rate(gamma1: f64, gamma2: f64, t: f64, theta: f64, input: LambdaInput) -> Result<f64> {
    let params = LambdaParams::new(gamma1, gamma2, theta, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(lambda_coherent_information(&params, input)?.0.max(0.0) / t)
}

/// Best coherent-information rate of the Λ channel with input `I/2` over
/// the default grid; parameters are named `t` and `theta`.
pub fn lambda_rate_optimum(gamma1: f64, gamma2: f64) -> Result<RateResult> {
    lambda_rate_optimum_with(gamma1, gamma2, &LambdaRateConfig::default())
}

pub fn lambda_rate_optimum_with(gamma1: f64, gamma2: f64, config: &LambdaRateConfig) -> Result<RateResult> {
    let probe = LambdaParams::new(gamma1, gamma2, 0.0, 0.0)?;
    if config.n_t == 0 || config.n_theta == 0 {
        return Err(Error::Empty("rate grid"));
    }
    let span = LAMBDA_T_SPAN / probe.total_rate();
    let (t_lo, t_hi) = config.t_range.unwrap_or((span / config.n_t as f64, span));
    let (th_lo, th_hi) = config.theta_range;
    let bounds = [Interval::new(t_lo, t_hi)?, Interval::new(th_lo, th_hi)?];
    let search_config = SearchConfig {
        refine_rounds: if config.refine {
            SearchConfig::default().refine_rounds
        } else {
            0
        },
        ..SearchConfig::default()
    };
    let input = config.input;
    search(
        vec!["t".into(), "theta".into()],
        &bounds,
        &[config.n_t, config.n_theta],
        search_config,
        |p| lambda_rate(gamma1, gamma2, p[0], p[1], input),
    )
}

/// One optimized rate in both normalizations.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaRateSummary {
    pub input: LambdaInput,
    /// Bits per unit time, in the units of the decay rates.
    pub rate: f64,
    /// `rate / Γ`, `Γ = γ₁ + γ₂`.
    pub rate_per_total: f64,
    /// `rate / max(γ₁, γ₂)`.
    pub rate_per_max: f64,
    pub t: f64,
    pub theta: f64,
    /// `Γ t` at the optimum.
    pub total_rate_times_t: f64,
    pub coherent_information: f64,
    pub bright_population: f64,
    pub result: RateResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaRateReport {
    pub gamma1: f64,
    pub gamma2: f64,
    pub variants: Vec<LambdaRateSummary>,
}

/// Optimized rate for the fixed `I/2` input and for the optimized input.
pub fn lambda_rate_report(gamma1: f64, gamma2: f64, config: &LambdaRateConfig) -> Result<LambdaRateReport> {
    let mut variants = vec![];
    for input in [LambdaInput::MaximallyMixed, LambdaInput::Optimized] {
        let cfg = LambdaRateConfig {
            input,
            ..config.clone()
        };
        let result = lambda_rate_optimum_with(gamma1, gamma2, &cfg)?;
        let (t, theta) = (result.best_params["t"], result.best_params["theta"]);
        let params = LambdaParams::new(gamma1, gamma2, theta, t)?;
        let (ic, p) = lambda_coherent_information(&params, input)?;
        let total = gamma1 + gamma2;
        variants.push(LambdaRateSummary {
            input,
            rate: result.best_value,
            rate_per_total: result.best_value / total,
            rate_per_max: result.best_value / gamma1.max(gamma2),
            t,
            theta,
            total_rate_times_t: total * t,
            coherent_information: ic,
            bright_population: p,
            result,
        });
    }
    Ok(LambdaRateReport {
        gamma1,
        gamma2,
        variants,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub t: f64,
    pub theta: f64,
    pub coherent_information: f64,
    pub clamped: f64,
}

/// `I_c(t, θ)` with input `I/2` over a tensor grid, `t` slow.
pub fn lambda_surface(gamma1: f64, gamma2: f64, ts: &[f64], thetas: &[f64]) -> Result<Vec<SurfacePoint>> {
    let pts: Vec<(f64, f64)> = ts.iter().flat_map(|&t| thetas.iter().map(move |&th| (t, th))).collect();
    let eval = |&(t, theta): &(f64, f64)| -> Result<SurfacePoint> {
        let params = LambdaParams::new(gamma1, gamma2, theta, t)?;
        let ic = lambda_coherent_information(&params, LambdaInput::MaximallyMixed)?.0;
        Ok(SurfacePoint {
            t,
            theta,
            coherent_information: ic,
            clamped: ic.max(0.0),
        })
    };
    #[cfg(feature = "parallel")]
    return pts.par_iter().map(eval).collect();
    #[cfg(not(feature = "parallel"))]
    return pts.iter().map(eval).collect();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::selected_information;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn matched(readout_angle: f64) -> ExperimentScheme {
        ExperimentScheme::fixed(
            DensityMatrix::maximally_mixed(2),
            Psm::computational(2).unwrap(),
            KrausChannel::identity(2),
            Psm::rotated_basis(readout_angle).unwrap(),
        )
    }

    #[test]
    fn matched_noiseless_scheme_carries_one_bit() {
        let s = matched(0.0);
        let d = experiment_distribution(&s).unwrap();
        assert_abs_diff_eq!(d.mass(0, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mass(0, 1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(experiment_information(&s).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn crossed_readout_carries_nothing() {
        assert_abs_diff_eq!(
            experiment_information(&matched(FRAC_PI_2)).unwrap(),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn depolarized_scheme_factorizes() {
        let s = ExperimentScheme::fixed(
            DensityMatrix::maximally_mixed(2),
            Psm::computational(2).unwrap(),
            KrausChannel::fully_depolarizing(),
            Psm::computational(2).unwrap(),
        );
        assert_abs_diff_eq!(experiment_information(&s).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn matches_selected_information_at_full_selectivity() {
        let grid = BlochGrid::new(4, 8).unwrap();
        for v in [0.3, 0.9, 1.2] {
            let direct = experiment_information(&matched(v)).unwrap();
            let selected = selected_information(&mixed_family(0.0).unwrap(), 1.0, v, &grid).unwrap();
            assert_abs_diff_eq!(direct, selected, epsilon = 1e-9);
        }
    }

    #[test]
    fn psm_normalization_is_checked() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let bad = Psm::new(
            PsmFlavor::General,
            vec![PsmOutcome {
                label: "x".into(),
                weight: 1.0,
                branch: vec![half],
            }],
        );
        assert!(matches!(bad, Err(Error::NotTracePreserving { .. })));
        let psm = Psm::unitary_family(
            vec![qubit_rotation(0.2), qubit_rotation(1.1), qubit_rotation(2.0)],
            None,
        )
        .unwrap();
        assert!(psm.normalization_deviation() < 1e-12);
        assert!(
            psm.apply_adjoint(&ComplexMatrix::identity(2))
                .max_abs_diff(&ComplexMatrix::identity(2))
                < 1e-10
        );
        assert!(Psm::projective(vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]], None).is_err());
    }

    #[test]
    fn bloch_psm_is_normalized() {
        let psm = Psm::bloch(&BlochGrid::new(16, 32).unwrap()).unwrap();
        assert!(psm.normalization_deviation() < 1e-10);
    }

    #[test]
    fn dimension_chain_is_checked() {
        let err = SchemeInstance::new(
            DensityMatrix::maximally_mixed(2),
            Psm::computational(2).unwrap(),
            KrausChannel::identity(3),
            Psm::computational(3).unwrap(),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn optimizer_finds_matched_readout() {
        let mut s = matched(0.0);
        s.readout = PsmSpec::Projective {
            basis: BasisSpec::Rotated {
                angle: Param::control("vartheta"),
            },
            weights: None,
        };
        s.controls = vec![Control::new("vartheta", 0.0, FRAC_PI_2).with_value(0.7)];
        s.validate().unwrap();
        let r = optimize_controls(&s, 25).unwrap();
        assert!(r.param("vartheta").unwrap().abs() < 1e-3);
        assert_abs_diff_eq!(r.best_value, 1.0, epsilon = 1e-9);
        assert!(r.best_value >= r.best_grid_value);
    }

    #[test]
    fn optimizer_rejects_bad_requests() {
        assert!(matches!(optimize_controls(&matched(0.0), 16), Err(Error::Empty(_))));
        let c = [Control::new("x", 0.0, 1.0)];
        assert!(optimize_objective(&c, 4, |_| Ok(0.0)).is_err());
        let err = optimize_objective(&c, 9, |p| {
            if p[0] > 0.6 {
                Err(Error::NonFinite("objective"))
            } else {
                Ok(p[0])
            }
        });
        assert!(matches!(err, Err(Error::NonFinite(_))));
    }

    #[test]
    fn quadratic_objective() {
        let c = [Control::new("x", -2.0, 3.0)];
        let r = optimize_objective(&c, 16, |p| Ok(1.5 - (p[0] - 0.7321).powi(2))).unwrap();
        assert_abs_diff_eq!(r.param("x").unwrap(), 0.7321, epsilon = 1e-6);
        assert_abs_diff_eq!(r.best_value, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn unknown_control_is_reported() {
        let mut s = matched(0.0);
        s.readout = PsmSpec::Projective {
            basis: BasisSpec::Rotated {
                angle: Param::control("nope"),
            },
            weights: None,
        };
        assert!(matches!(s.validate(), Err(Error::UnknownControl(_))));
    }

    #[test]
    fn degenerate_rate_grid() {
        let (t, theta) = (1.3, 2.9);
        let cfg = LambdaRateConfig {
            n_t: 1,
            n_theta: 1,
            t_range: Some((t, t)),
            theta_range: (theta, theta),
            ..LambdaRateConfig::default()
        };
        let r = lambda_rate_optimum_with(1.0, 0.0, &cfg).unwrap();
        let ic = lambda_channel(&LambdaParams::new(1.0, 0.0, theta, t).unwrap())
            .unwrap()
            .coherent_information(&DensityMatrix::maximally_mixed(2))
            .unwrap();
        assert!(ic > 0.0);
        assert_abs_diff_eq!(r.best_value, ic / t, epsilon = 1e-15);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn rate_vanishes_at_short_and_long_times() {
        assert_eq!(
            lambda_rate(1.0, 1.0, 0.0, PI, LambdaInput::MaximallyMixed).unwrap(),
            0.0
        );
        assert_eq!(
            lambda_rate(1.0, 1.0, 1e-3, PI, LambdaInput::MaximallyMixed).unwrap(),
            0.0
        );
        assert!(lambda_rate(1.0, 0.0, 40.0, PI, LambdaInput::MaximallyMixed).unwrap() < 0.03);
    }

    #[test]
    fn optimized_input_never_loses() {
        for (t, th) in [(0.8, 2.0), (1.8, PI), (3.0, 1.0)] {
            let a = lambda_rate(1.0, 0.4, t, th, LambdaInput::MaximallyMixed).unwrap();
            let b = lambda_rate(1.0, 0.4, t, th, LambdaInput::Optimized).unwrap();
            assert!(b >= a - 1e-12);
        }
    }

    #[test]
    fn surface_rows() {
        let pts = lambda_surface(1.0, 1.0, &[0.0, 1.0], &[0.0, PI]).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts[..2].iter().all(|p| p.clamped == 0.0));
        assert!(pts.iter().all(|p| p.coherent_information <= 1.0 + 1e-12));
    }
}
