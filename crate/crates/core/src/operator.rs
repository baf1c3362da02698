//! Assembly and spectral calculus of `P_V = -Δ + V` on the truncated
//! plane-wave basis: dense Hermitian matrix, cached eigendecomposition,
//! functional calculus, smooth spectral cutoffs, and dyadic partitions.

use std::sync::{Arc, OnceLock};

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::bump::{standard_bump, DyadicEnvelope};
use crate::error::{CoreError, Result};
use crate::field::FourierField;
use crate::lattice::TorusLattice;
use crate::C64;

/// Hard cap on the truncation: `(2N+1)²` dense eigensolves beyond this are
/// rejected rather than silently thrashing memory.
const MAX_BAND: usize = 32;

/// Cached eigendecomposition (ascending eigenvalues, orthonormal columns).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

/// `P_V = -Δ + V` on the `(2N+1)²`-dimensional plane-wave space.
#[derive(Debug)]
pub struct SchrodingerOperator {
    lattice: TorusLattice,
    band: usize,
    potential: FourierField,
    matrix: Array2<C64>,
    eig: OnceLock<Arc<EigenDecomposition>>,
}

impl SchrodingerOperator {
    /// Assemble the Hermitian matrix
    /// `H[(k,ℓ),(k',ℓ')] = δ·((2πk/A)² + (2πℓ/B)²) + V̂(k-k', ℓ-ℓ')`.
    ///
    /// `V` must be real-valued (conjugate-symmetric coefficients); bands
    /// beyond `N` are truncated with a warning.
    pub fn assemble(lattice: TorusLattice, potential: &FourierField, band: usize) -> Result<Self> {
        if band == 0 || band > MAX_BAND {
            return Err(CoreError::ResourceLimit(format!(
                "band limit {band} outside supported range 1..={MAX_BAND}"
            )));
        }
        let (defect, wk, wl) = potential.realness_defect();
        let scale = potential
            .coeffs()
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        if defect > 1e-10 * scale {
            return Err(CoreError::NonRealPotential {
                k: wk,
                l: wl,
                deviation: defect,
            });
        }
        if potential.band() > band {
            log::warn!(
                "potential band {} exceeds truncation {}; higher harmonics are dropped",
                potential.band(),
                band
            );
        }
        let v = potential.rebanded(2 * band); // all offsets |δ| <= 2N available
        let side = 2 * band + 1;
        let dim = side * side;
        let nb = band as i64;
        let tau = std::f64::consts::TAU;
        let mut h = Array2::<C64>::zeros((dim, dim));
        for k in -nb..=nb {
            for l in -nb..=nb {
                let row = ((k + nb) as usize) * side + (l + nb) as usize;
                let fx = tau * k as f64 / lattice.x_period;
                let fy = tau * l as f64 / lattice.y_period;
                for kp in -nb..=nb {
                    for lp in -nb..=nb {
                        let col = ((kp + nb) as usize) * side + (lp + nb) as usize;
                        let mut val = v.get(k - kp, l - lp);
                        if row == col {
                            val += C64::new(fx * fx + fy * fy, 0.0);
                        }
                        h[(row, col)] = val;
                    }
                }
            }
        }
        Ok(Self {
            lattice,
            band,
            potential: potential.clone(),
            matrix: h,
            eig: OnceLock::new(),
        })
    }

    /// Free operator `-Δ`.
    pub fn free(lattice: TorusLattice, band: usize) -> Result<Self> {
        let zero = FourierField::zero(lattice, 1);
        Self::assemble(lattice, &zero, band)
    }

    pub fn lattice(&self) -> TorusLattice {
        self.lattice
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn dim(&self) -> usize {
        let side = 2 * self.band + 1;
        side * side
    }

    pub fn potential(&self) -> &FourierField {
        &self.potential
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Eigendecomposition, computed once on first use.
    pub fn eigen(&self) -> Arc<EigenDecomposition> {
        self.eig
            .get_or_init(|| {
                let (vals, vecs) = self
                    .matrix
                    .eigh(UPLO::Lower)
                    .expect("Hermitian eigendecomposition failed");
                Arc::new(EigenDecomposition {
                    values: vals.to_vec(),
                    vectors: vecs,
                })
            })
            .clone()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values.clone()
    }

    /// The j-th eigenfunction as a unit-L²-norm field.
    pub fn eigenfunction(&self, j: usize) -> FourierField {
        let eig = self.eigen();
        let dim = self.dim();
        assert!(j < dim);
        let scale = 1.0 / self.lattice.area().sqrt();
        let coeffs: Vec<C64> = (0..dim).map(|i| eig.vectors[(i, j)] * scale).collect();
        FourierField::from_coeffs(self.lattice, self.band, coeffs)
    }

    /// Coefficient vector -> eigenbasis coordinates (unitary on ℓ²).
    pub fn to_eigen_coords(&self, u: &FourierField) -> Array1<C64> {
        assert_eq!(u.band(), self.band, "band mismatch");
        let eig = self.eigen();
        let v = Array1::from_vec(u.coeffs().to_vec());
        eig.vectors.t().map(|c| c.conj()).dot(&v)
    }

    pub fn from_eigen_coords(&self, c: &Array1<C64>) -> FourierField {
        let eig = self.eigen();
        let v = eig.vectors.dot(c);
        FourierField::from_coeffs(self.lattice, self.band, v.to_vec())
    }

    /// Functional calculus `g(P_V) u = Σ g(λ_j) ⟨u, e_j⟩ e_j`.
    pub fn apply_function<G: Fn(f64) -> C64>(&self, g: G, u: &FourierField) -> FourierField {
        let eig = self.eigen();
        let mut c = self.to_eigen_coords(u);
        for (cj, &lj) in c.iter_mut().zip(&eig.values) {
            *cj *= g(lj);
        }
        self.from_eigen_coords(&c)
    }

    /// Apply `P_V` itself (matrix route, no eigendecomposition needed).
    pub fn apply(&self, u: &FourierField) -> FourierField {
        assert_eq!(u.band(), self.band);
        let v = Array1::from_vec(u.coeffs().to_vec());
        let w = self.matrix.dot(&v);
        FourierField::from_coeffs(self.lattice, self.band, w.to_vec())
    }

    /// Quadratic form `⟨P_V u, u⟩`.
    pub fn energy(&self, u: &FourierField) -> f64 {
        self.apply(u).inner(u).re
    }

    /// Littlewood–Paley split `u_j = φ_j(P_V) u` with ratio `R`: the squared
    /// pieces telescope exactly, so `Σ ‖u_j‖² = ‖u‖²`. Pieces beyond the
    /// spectral range are dropped.
    pub fn dyadic_partition(&self, ratio: f64, u: &FourierField) -> Result<Vec<FourierField>> {
        if !(ratio > 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "dyadic ratio must exceed 1, got {ratio}"
            )));
        }
        let env = DyadicEnvelope::new(ratio);
        let eig = self.eigen();
        let lam_max = eig
            .values
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()))
            .max(1.0);
        // piece j covers (R^{j-1}, R^{j+1}); stop once the band is empty
        let j_max = (lam_max.ln() / ratio.ln()).ceil() as usize + 1;
        let mut pieces = Vec::new();
        for j in 0..=j_max {
            let piece = self.apply_function(|l| C64::new(env.piece(j, l), 0.0), u);
            pieces.push(piece);
        }
        Ok(pieces)
    }
}

/// Smooth spectral shell filter `Π_{h,ρ} = χ((h² P_V - 1)/ρ)` with the
/// standard bump `χ` (1 on [-1/2,1/2], supported in (-1,1)).
#[derive(Debug, Clone, Copy)]
pub struct SpectralCutoff {
    pub h: f64,
    pub rho: f64,
}

impl SpectralCutoff {
    pub fn new(h: f64, rho: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "semiclassical parameter must satisfy 0 < h < 1, got {h}"
            )));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "shell width must satisfy 0 < ρ <= 1, got {rho}"
            )));
        }
        Ok(Self { h, rho })
    }

    /// The scalar filter profile.
    pub fn chi(&self, lambda: f64) -> f64 {
        standard_bump((self.h * self.h * lambda - 1.0) / self.rho)
    }

    pub fn apply(&self, op: &SchrodingerOperator, u: &FourierField) -> FourierField {
        op.apply_function(|l| C64::new(self.chi(l), 0.0), u)
    }
}
