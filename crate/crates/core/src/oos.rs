//! Out-of-sample extension of the kernel eigenfunctions.
//!
//! For a new delay state `y` with kernel section `k_j = K(y, x_j)` and mean
//! mass `s = (1/N') sum_j k_j`,
//!
//! ```text
//! phi_l(y)     = (1 / (N' s)) sum_j k_j gamma_l(j) w_j / sigma_l
//! g_chaos0(y)  = sum_l phi_l(y) E_l = (1 / (N' s)) k^T (Gamma~ E)
//! ```
//!
//! where `w = q^{-1/2}` reproduces the training values of `phi` exactly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::ChaoticCoefficients;
use crate::ingest::EmbeddedSeries;
use crate::kernel::{gaussian, KernelBasis};
use crate::scalar::{squared_distance, Real};

/// Mean kernel mass below which a point counts as outside the data support.
pub const SUPPORT_FLOOR: f64 = 1e-12;

/// Column weighting of `gamma` in the extension formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionMode {
    /// `w = q^{-1/2}`: consistent with the bistochastic normalization, so
    /// `phi_l(x_i)` equals the training eigenvector entry.
    #[default]
    Consistent,
    /// `w = q^{-1}`, as the formula is literally written.
    PaperExact,
}

impl std::str::FromStr for ExtensionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(Self::Consistent),
            "paper_exact" | "paper-exact" => Ok(Self::PaperExact),
            other => Err(Error::InvalidArgument(format!("unknown extension mode '{other}'"))),
        }
    }
}

/// `Gamma~[j][l] = gamma_l(j) w_j / sigma_l`.
pub fn gamma_tilde<T: Real>(basis: &KernelBasis<T>, mode: ExtensionMode) -> DMatrix<T> {
    let mut g = basis.gammas.clone();
    for (l, mut col) in g.column_iter_mut().enumerate() {
        let inv_sigma = T::one() / basis.sigmas[l];
        for (j, v) in col.iter_mut().enumerate() {
            let qj = basis.q[j];
            let w = match mode {
                ExtensionMode::Consistent => T::one() / qj.sqrt(),
                ExtensionMode::PaperExact => T::one() / qj,
            };
            *v *= w * inv_sigma;
        }
    }
    g
}

/// Kernel section of a point against the training states.
#[derive(Debug, Clone)]
pub struct KernelSection<T: Real> {
    /// `K(y, x_j)` for every training state.
    pub values: Vec<T>,
    /// Mean kernel mass `s`.
    pub mass: T,
}

impl<T: Real> KernelSection<T> {
    /// Convex weights `k_j / (N' s)`.
    pub fn weights(&self) -> Vec<T> {
        let denom = self.mass * T::from_usize_lossy(self.values.len());
        self.values.iter().map(|v| *v / denom).collect()
    }
}

/// Evaluator for `phi_l` and `g_chaos0` at arbitrary delay states.
#[derive(Debug, Clone)]
pub struct NystromExtension<T: Real> {
    /// Training states, one per column.
    states: DMatrix<T>,
    epsilon: T,
    mode: ExtensionMode,
    gamma_tilde: DMatrix<T>,
    /// `Gamma~ E`, `N' x k`.
    products: DMatrix<T>,
    support_floor: T,
}

impl<T: Real> NystromExtension<T> {
    pub fn new(
        train: &EmbeddedSeries<T>,
        basis: &KernelBasis<T>,
        chaotic: &ChaoticCoefficients<T>,
        mode: ExtensionMode,
    ) -> Result<Self> {
        if train.len() != basis.n_states() {
            return Err(Error::Shape(format!(
                "{} training states but the basis has {}",
                train.len(),
                basis.n_states()
            )));
        }
        if chaotic.e.nrows() != basis.len() {
            return Err(Error::Shape(format!(
                "E has {} rows but the basis has {} eigenfunctions",
                chaotic.e.nrows(),
                basis.len()
            )));
        }
        let gamma_tilde = gamma_tilde(basis, mode);
        let products = &gamma_tilde * &chaotic.e;
        Ok(Self {
            states: train.state_columns().clone(),
            epsilon: basis.epsilon,
            mode,
            gamma_tilde,
            products,
            support_floor: T::lit(SUPPORT_FLOOR),
        })
    }

    pub fn with_support_floor(mut self, floor: T) -> Self {
        self.support_floor = floor;
        self
    }

    pub fn mode(&self) -> ExtensionMode {
        self.mode
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn support_floor(&self) -> T {
        self.support_floor
    }

    pub fn n_states(&self) -> usize {
        self.states.ncols()
    }

    pub fn state_dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn channels(&self) -> usize {
        self.products.ncols()
    }

    pub fn gamma_tilde(&self) -> &DMatrix<T> {
        &self.gamma_tilde
    }

    /// `Gamma~ E`; row `j` is the value the extension assigns to training state `j`.
    pub fn products(&self) -> &DMatrix<T> {
        &self.products
    }

    fn check_dim(&self, y: &[T]) -> Result<()> {
        if y.len() != self.state_dim() {
            return Err(Error::Shape(format!(
                "state has {} entries, expected {}",
                y.len(),
                self.state_dim()
            )));
        }
        Ok(())
    }

    pub fn kernel_section(&self, y: &[T]) -> Result<KernelSection<T>> {
        self.check_dim(y)?;
        let values: Vec<T> = self
            .states
            .column_iter()
            .map(|x| gaussian(squared_distance(x.as_slice(), y), self.epsilon))
            .collect();
        let mass = values.iter().copied().sum::<T>() / T::from_usize_lossy(values.len());
        Ok(KernelSection { values, mass })
    }

    fn supported(&self, y: &[T]) -> Result<KernelSection<T>> {
        let section = self.kernel_section(y)?;
        if !(section.mass >= self.support_floor) {
            return Err(Error::OutOfSupport {
                mass: section.mass.as_f64(),
                threshold: self.support_floor.as_f64(),
            });
        }
        Ok(section)
    }

    /// All extended eigenfunctions `phi_l(y)`.
    pub fn phis(&self, y: &[T]) -> Result<Vec<T>> {
        let section = self.supported(y)?;
        let w = section.weights();
        Ok(self
            .gamma_tilde
            .column_iter()
            .map(|g| crate::scalar::dot(g.as_slice(), &w))
            .collect())
    }

    /// `g_chaos0(y)`, one value per channel.
    pub fn gchaos0(&self, y: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.channels()];
        self.gchaos0_into(y, &mut out)?;
        Ok(out)
    }

    pub fn gchaos0_into(&self, y: &[T], out: &mut [T]) -> Result<()> {
        let section = self.supported(y)?;
        let w = section.weights();
        for (c, o) in out.iter_mut().enumerate() {
            *o = crate::scalar::dot(self.products.column(c).as_slice(), &w);
        }
        Ok(())
    }
}
