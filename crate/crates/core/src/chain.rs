//! Periodic spin-1/2 chain `H = Σ_k (X_k + b_k Y_k + J Z_k Z_{k+1})` and the
//! discrete family of target chains.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{validation, QuizError, Result};
use crate::hilbert::{
    hermitian_ground_state, site_operator, GroundState, Operator, Pauli, StateVector,
    DEFAULT_MAX_SITES,
};
use crate::similarity::BlochVector;

/// Maximum number of targets an enumeration may produce.
pub const DEFAULT_SWEEP_BUDGET: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n_sites: usize,
    coupling: f64,
    fields: Vec<f64>,
}

impl ChainSpec {
    pub fn new(fields: Vec<f64>, coupling: f64) -> Result<Self> {
        if fields.len() < 2 {
            return Err(validation(format!(
                "chain needs at least 2 sites, got {}",
                fields.len()
            )));
        }
        if !coupling.is_finite() || fields.iter().any(|b| !b.is_finite()) {
            return Err(validation("chain parameters must be finite"));
        }
        Ok(ChainSpec {
            n_sites: fields.len(),
            coupling,
            fields,
        })
    }

    pub fn uniform(n_sites: usize, field: f64, coupling: f64) -> Result<Self> {
        Self::new(vec![field; n_sites], coupling)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Same chain with sites relabelled `k → k + shift (mod N)`.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut fields = self.fields.clone();
        fields.rotate_right(shift % self.n_sites);
        ChainSpec { fields, ..*self }
    }
}

/// Builds the dense Hamiltonian. Bond `k` couples sites `k` and `k + 1` with
/// `N + 1 ≡ 1`, summed for every `k`, so on two sites the single physical bond
/// appears twice.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<Operator> {
    let n = spec.n_sites();
    if n > DEFAULT_MAX_SITES {
        return Err(QuizError::Capacity(format!(
            "{n} sites exceed dense cap of {DEFAULT_MAX_SITES}; use the product-state path"
        )));
    }
    let mut h = Operator::zeros(1 << n);
    let z: Vec<Operator> = (1..=n)
        .map(|k| site_operator(Pauli::Z, k, n))
        .collect::<Result<_>>()?;
    for k in 1..=n {
        h = &h + &site_operator(Pauli::X, k, n)?;
        let b = spec.fields[k - 1];
        if b != 0.0 {
            h = &h + &(&site_operator(Pauli::Y, k, n)? * b);
        }
        if spec.coupling != 0.0 {
            let next = k % n;
            h = &h + &(&(&z[k - 1] * &z[next]) * spec.coupling);
        }
    }
    Operator::new(h.dim(), h.entries().to_vec(), true)
}

/// Exact ground state of the chain. Check `degenerate` before trusting
/// per-site quantities.
pub fn ground_state(spec: &ChainSpec) -> Result<GroundState> {
    hermitian_ground_state(&build_hamiltonian(spec)?)
}

/// Bloch vector of the ground state of a lone site `X + b Y`.
pub fn product_ground_bloch(b: f64) -> BlochVector {
    let r = (1.0 + b * b).sqrt();
    BlochVector::new(-1.0 / r, -b / r, 0.0)
}

/// Single-site ground state of `X + b Y`, first amplitude real positive.
pub fn product_ground_site(b: f64) -> [Complex64; 2] {
    let r = (1.0 + b * b).sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [Complex64::new(h, 0.0), Complex64::new(-1.0, -b) * (h / r)]
}

/// Product of single-site grounds, ignoring the coupling. Exact at `J = 0`.
pub fn product_ground_state(spec: &ChainSpec) -> Result<StateVector> {
    let sites: Vec<[Complex64; 2]> = spec
        .fields
        .iter()
        .map(|&b| product_ground_site(b))
        .collect();
    StateVector::product(&sites)
}

/// `levels` equally spaced field values from `b_min` to `b_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    b_min: f64,
    b_max: f64,
    levels: usize,
}

impl ParameterGrid {
    /// A single level is allowed and stands for `b_min` alone.
    pub fn new(b_min: f64, b_max: f64, levels: usize) -> Result<Self> {
        if !b_min.is_finite() || !b_max.is_finite() {
            return Err(validation("grid bounds must be finite"));
        }
        if levels == 0 {
            return Err(validation("grid needs at least one level"));
        }
        if levels >= 2 && b_min >= b_max {
            return Err(validation(format!(
                "grid bounds need b_min < b_max, got {b_min} and {b_max}"
            )));
        }
        Ok(ParameterGrid {
            b_min,
            b_max,
            levels,
        })
    }

    pub fn b_min(&self) -> f64 {
        self.b_min
    }

    pub fn b_max(&self) -> f64 {
        self.b_max
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.levels == 1 {
            return self.b_min;
        }
        self.b_min + i as f64 * (self.b_max - self.b_min) / (self.levels - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.levels).map(|i| self.value(i)).collect()
    }

    /// `levels^n`, or an error when it exceeds `budget`.
    pub fn target_count(&self, n: usize, budget: u64) -> Result<u64> {
        u32::try_from(n)
            .ok()
            .and_then(|n| (self.levels as u64).checked_pow(n))
            .filter(|&count| count <= budget)
            .ok_or_else(|| {
                QuizError::Capacity(format!(
                    "{}^{n} targets exceed sweep budget {budget}",
                    self.levels
                ))
            })
    }
}

/// Index of a target in `[0, D^N)`. Digits in base `D`, site 1 least
/// significant, select grid levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TargetId(pub u64);

impl TargetId {
    pub fn levels(self, grid: &ParameterGrid, n: usize) -> Vec<usize> {
        let d = grid.levels() as u64;
        let mut rest = self.0;
        (0..n)
            .map(|_| {
                let digit = rest % d;
                rest /= d;
                digit as usize
            })
            .collect()
    }

    pub fn fields(self, grid: &ParameterGrid, n: usize) -> Vec<f64> {
        self.levels(grid, n)
            .into_iter()
            .map(|i| grid.value(i))
            .collect()
    }

    pub fn from_levels(levels: &[usize], grid: &ParameterGrid) -> Result<Self> {
        let d = grid.levels() as u64;
        let mut id = 0u64;
        for &level in levels.iter().rev() {
            if level >= grid.levels() {
                return Err(QuizError::Index(format!(
                    "level {level} not below {}",
                    grid.levels()
                )));
            }
            id = id
                .checked_mul(d)
                .and_then(|id| id.checked_add(level as u64))
                .ok_or_else(|| QuizError::Capacity("target id overflows u64".into()))?;
        }
        Ok(TargetId(id))
    }
}

impl std::fmt::Display for TargetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Every target chain on the grid in increasing id order.
pub fn enumerate_targets(
    grid: &ParameterGrid,
    n: usize,
    coupling: f64,
) -> Result<impl ExactSizeIterator<Item = (TargetId, ChainSpec)> + Clone> {
    let count = grid.target_count(n, DEFAULT_SWEEP_BUDGET)?;
    if n < 2 {
        return Err(validation(format!("chain needs at least 2 sites, got {n}")));
    }
    let grid = *grid;
    Ok((0..count as usize).map(move |id| {
        let id = TargetId(id as u64);
        let spec = ChainSpec {
            n_sites: n,
            coupling,
            fields: id.fields(&grid, n),
        };
        (id, spec)
    }))
}
