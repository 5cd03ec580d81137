//! Black-box similarity oracles.
//!
//! An [`Oracle`] holds the hidden target and answers similarity queries about
//! a candidate state. Nothing about the target can be read back out; the
//! only outputs are scalar similarities, measurement bits and a fingerprint
//! of the construction parameters.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{ground_state, ChainSpec};
use crate::error::{validation, QuizError, Result};
use crate::hilbert::{DensityMatrix, StateVector};
use crate::similarity::{similarity_from_densities, site_densities, AngleProfile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleKind {
    Exact,
    /// Reply offset by `u ~ Uniform(−ε, ε)`.
    UniformNoise {
        epsilon: f64,
    },
    /// One projective measurement per site, `F ≈ 2 Σ m_k − N`.
    Measurement,
}

impl OracleKind {
    pub fn validate(&self) -> Result<()> {
        if let OracleKind::UniformNoise { epsilon } = *self {
            if !(epsilon.is_finite() && epsilon >= 0.0) {
                return Err(validation(format!(
                    "noise bound {epsilon} must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }

    fn epsilon(&self) -> f64 {
        match *self {
            OracleKind::UniformNoise { epsilon } => epsilon,
            _ => 0.0,
        }
    }
}

/// Interface the protocol runner sees.
pub trait SimilarityOracle {
    /// Budgeted similarity query.
    fn query(&mut self, candidate: &StateVector) -> Result<f64>;

    /// Exact similarity through a separate diagnostic channel that does not
    /// consume budget. Reporting only; strategies must not act on it.
    fn verify(&mut self, candidate: &StateVector) -> Result<f64>;

    fn remaining(&self) -> usize;
}

/// Outcome of one measured query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementRecord {
    /// `m_k = 1` when site `k` was found in the target's single-site state.
    pub m: Vec<u8>,
}

impl MeasurementRecord {
    /// `2 Σ m_k − N`
    pub fn f_estimate(&self) -> f64 {
        let hits: i64 = self.m.iter().map(|&b| b as i64).sum();
        (2 * hits - self.m.len() as i64) as f64
    }
}

pub struct Oracle {
    kind: OracleKind,
    target_sites: Vec<DensityMatrix>,
    budget: usize,
    used: usize,
    rng: ChaCha8Rng,
    fingerprint: u64,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("kind", &self.kind)
            .field("remaining", &self.remaining())
            .field("fingerprint", &format_args!("{:016x}", self.fingerprint))
            .finish_non_exhaustive()
    }
}

/// Programs an oracle with the ground state of `target`, solved once here.
pub fn make_oracle(
    target: &ChainSpec,
    kind: OracleKind,
    budget: usize,
    seed: u64,
) -> Result<Oracle> {
    kind.validate()?;
    let gs = ground_state(target)?;
    let mut h = DefaultHasher::new();
    target.n_sites().hash(&mut h);
    target.coupling().to_bits().hash(&mut h);
    for b in target.fields() {
        b.to_bits().hash(&mut h);
    }
    Oracle::build(&gs.state, kind, budget, seed, h)
}

impl Oracle {
    /// Programs an oracle with an explicit target state, e.g. a product state
    /// for chains beyond the dense cap.
    pub fn from_state(
        target: &StateVector,
        kind: OracleKind,
        budget: usize,
        seed: u64,
    ) -> Result<Oracle> {
        kind.validate()?;
        let mut h = DefaultHasher::new();
        for a in target.amplitudes() {
            a.re.to_bits().hash(&mut h);
            a.im.to_bits().hash(&mut h);
        }
        Oracle::build(target, kind, budget, seed, h)
    }

    fn build(
        target: &StateVector,
        kind: OracleKind,
        budget: usize,
        seed: u64,
        mut h: DefaultHasher,
    ) -> Result<Oracle> {
        let target_sites = site_densities(target)?;
        format!("{kind:?}").hash(&mut h);
        kind.epsilon().to_bits().hash(&mut h);
        budget.hash(&mut h);
        seed.hash(&mut h);
        Ok(Oracle {
            kind,
            target_sites,
            budget,
            used: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            fingerprint: h.finish(),
        })
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    /// Hash of the construction parameters.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn used(&self) -> usize {
        self.used
    }

    fn ensure_budget(&self) -> Result<()> {
        if self.used >= self.budget {
            return Err(QuizError::BudgetExhausted { used: self.used });
        }
        Ok(())
    }

    fn profile(&self, candidate: &StateVector) -> Result<(f64, AngleProfile)> {
        if candidate.n_sites() != self.target_sites.len() {
            return Err(validation(format!(
                "candidate has {} sites, oracle expects {}",
                candidate.n_sites(),
                self.target_sites.len()
            )));
        }
        similarity_from_densities(&self.target_sites, &site_densities(candidate)?)
    }

    pub fn query_exact(&mut self, candidate: &StateVector) -> Result<f64> {
        self.ensure_budget()?;
        let (f, _) = self.profile(candidate)?;
        self.used += 1;
        Ok(f)
    }

    /// `F + u` with `u` uniform on `(−ε, ε)`, `ε` taken from the oracle kind
    /// (zero unless it is [`OracleKind::UniformNoise`]).
    pub fn query_noisy(&mut self, candidate: &StateVector) -> Result<f64> {
        self.ensure_budget()?;
        let (f, _) = self.profile(candidate)?;
        let eps = self.kind.epsilon();
        let u = if eps > 0.0 {
            loop {
                let u = self.rng.gen_range(-eps..eps);
                if u != -eps {
                    break u;
                }
            }
        } else {
            0.0
        };
        self.used += 1;
        Ok(f + u)
    }

    /// Measures every candidate site once in the target's single-site basis;
    /// site `k` answers yes with probability `(1 + cos θ_k) / 2`.
    pub fn query_measured(&mut self, candidate: &StateVector) -> Result<(f64, MeasurementRecord)> {
        self.ensure_budget()?;
        let (_, profile) = self.profile(candidate)?;
        let m = profile
            .cosines()
            .iter()
            .map(|&c| {
                let p = ((1.0 + c) / 2.0).clamp(0.0, 1.0);
                self.rng.gen_bool(p) as u8
            })
            .collect();
        self.used += 1;
        let record = MeasurementRecord { m };
        Ok((record.f_estimate(), record))
    }
}

impl SimilarityOracle for Oracle {
    fn query(&mut self, candidate: &StateVector) -> Result<f64> {
        match self.kind {
            OracleKind::Exact => self.query_exact(candidate),
            OracleKind::UniformNoise { .. } => self.query_noisy(candidate),
            OracleKind::Measurement => self.query_measured(candidate).map(|(f, _)| f),
        }
    }

    fn verify(&mut self, candidate: &StateVector) -> Result<f64> {
        self.profile(candidate).map(|(f, _)| f)
    }

    fn remaining(&self) -> usize {
        self.budget - self.used
    }
}
