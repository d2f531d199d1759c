use alloc::vec::Vec;

use super::{ModeBasis, ModeError, Scene};

/// Overlaps of every source with every mode: raw `Γ_q(x_s)` and the
/// projection-normalised `η_q(x_s) = Γ_q / sqrt(Σ_r Γ_r²)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OverlapTable {
    gamma: Vec<Vec<f64>>,
    eta: Vec<Vec<f64>>,
}

impl OverlapTable {
    /// `Γ_q(x_s)` indexed `[s][q]`.
    pub fn gamma(&self) -> &[Vec<f64>] {
        &self.gamma
    }

    /// `η_q(x_s)` indexed `[s][q]`.
    pub fn eta(&self) -> &[Vec<f64>] {
        &self.eta
    }

    pub fn sources(&self) -> usize {
        self.eta.len()
    }

    pub fn modes(&self) -> usize {
        self.eta.first().map_or(0, Vec::len)
    }
}

fn normalize(gamma: &[f64], source_index: usize, x: f64) -> Result<Vec<f64>, ModeError> {
    let total: f64 = gamma.iter().map(|g| g * g).sum();
    if !(total >= 1e-14) {
        return Err(ModeError::ProjectionDegenerate {
            source_index,
            x,
            modes: gamma.len(),
        });
    }
    let scale = libm::sqrt(total);
    Ok(gamma.iter().map(|g| g / scale).collect())
}

/// `η_q(x)` for a single position.
pub fn eta_at(basis: &ModeBasis, x: f64) -> Result<Vec<f64>, ModeError> {
    normalize(&basis.gammas(x), 0, x)
}

pub fn overlaps(basis: &ModeBasis, scene: &Scene) -> Result<OverlapTable, ModeError> {
    let mut gamma = Vec::with_capacity(scene.len());
    let mut eta = Vec::with_capacity(scene.len());
    for (s, src) in scene.sources().iter().enumerate() {
        let g = basis.gammas(src.x);
        eta.push(normalize(&g, s, src.x)?);
        gamma.push(g);
    }
    Ok(OverlapTable { gamma, eta })
}
