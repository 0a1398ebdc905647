//! Quadrature grid on the Bloch sphere of pure qubit states.
//!
//! Nodes are Gauss–Legendre in `cos ϑ` times uniform in `φ`. Weights realize
//! the measure `sin ϑ dϑ dφ / 2π`, so they sum to 2 (the dimension of the
//! qubit space) and `Σ w |α⟩⟨α|` resolves the identity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::quadrature::gauss_legendre;
use crate::states::BlochAngles;

/// Smallest resolution accepted anywhere in the crate.
pub const MIN_N_THETA: usize = 2;
pub const MIN_N_PHI: usize = 3;

#[derive(Clone, Debug)]
pub struct BlochNode {
    pub angles: BlochAngles,
    pub weight: f64,
    /// `|α⟩ = (cos ϑ/2, e^{iφ} sin ϑ/2)`
    pub ket: [C64; 2],
    /// Orthogonal partner `|α⊥⟩`, so that `(|α⟩, |α⊥⟩)` is an orthonormal basis.
    pub ket_perp: [C64; 2],
}

#[derive(Clone, Debug)]
pub struct BlochGrid {
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<BlochNode>,
}

impl BlochGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < MIN_N_THETA {
            return Err(Error::OutOfRange {
                name: "n_theta",
                value: n_theta as f64,
                range: ">= 2",
            });
        }
        if n_phi < MIN_N_PHI {
            return Err(Error::OutOfRange {
                name: "n_phi",
                value: n_phi as f64,
                range: ">= 3",
            });
        }
        let (z, wz) = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (&cz, &w) in z.iter().zip(&wz) {
            // Gauss nodes never touch ±1, so theta stays strictly inside (0, π).
            let theta = cz.clamp(-1.0, 1.0).acos();
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                let angles = BlochAngles { theta, phi };
                nodes.push(BlochNode {
                    ket: angles.ket(),
                    ket_perp: angles.ket_perp(),
                    angles,
                    weight: w / n_phi as f64,
                });
            }
        }
        Ok(Self { n_theta, n_phi, nodes })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[BlochNode] {
        &self.nodes
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// `Σ w |α⟩⟨α|`, which should equal `I₂`.
    pub fn completeness(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(2, 2);
        for n in &self.nodes {
            acc = &acc + &ComplexMatrix::projector(&n.ket).scale_real(n.weight);
        }
        acc
    }

    pub fn completeness_deviation(&self) -> f64 {
        self.completeness().max_abs_diff(&ComplexMatrix::identity(2))
    }

    /// Same grid with both resolutions doubled.
    pub fn refined(&self) -> Result<Self> {
        Self::new(2 * self.n_theta, 2 * self.n_phi)
    }
}
