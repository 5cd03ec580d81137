//! Bloch vectors, inter-chain angles and subsystem similarity measures.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{validation, QuizError, Result};
use crate::hilbert::{partial_trace, DensityMatrix, Operator, StateVector, SubsetMask};

/// Bloch vectors shorter than this have no usable direction.
pub const DIRECTION_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const X: BlochVector = BlochVector::new(1.0, 0.0, 0.0);
    pub const Y: BlochVector = BlochVector::new(0.0, 1.0, 0.0);
    pub const Z: BlochVector = BlochVector::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        BlochVector::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    /// Component perpendicular to the unit vector `axis`.
    pub fn reject(self, axis: Self) -> Self {
        self - axis * self.dot(axis)
    }

    /// Counterclockwise rotation by `angle` about the unit vector `axis`.
    pub fn rotate(self, axis: Self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        self * c + axis.cross(self) * s + axis * (axis.dot(self) * (1.0 - c))
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    /// `(I + v·σ) / 2`
    pub fn to_density(self) -> Result<DensityMatrix> {
        let h = 0.5;
        let m = Operator::new(
            2,
            vec![
                Complex64::new(h * (1.0 + self.z), 0.0),
                Complex64::new(h * self.x, -h * self.y),
                Complex64::new(h * self.x, h * self.y),
                Complex64::new(h * (1.0 - self.z), 0.0),
            ],
            true,
        )?;
        DensityMatrix::new(m)
    }
}

impl Add for BlochVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for BlochVector {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// `(tr ρX, tr ρY, tr ρZ)` of a single-site density matrix.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(validation(format!(
            "Bloch vector needs a 2x2 density matrix, got {0}x{0}",
            rho.dim()
        )));
    }
    let off = rho.get(1, 0);
    Ok(BlochVector::new(
        2.0 * off.re,
        2.0 * off.im,
        (rho.get(0, 0) - rho.get(1, 1)).re,
    ))
}

fn check_single_site(rho: &DensityMatrix, role: &str) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(validation(format!("{role} density matrix is not 2x2")));
    }
    // |v|² = 2 tr ρ² − 1
    let len_sq = 2.0 * rho.purity() - 1.0;
    if len_sq < DIRECTION_FLOOR * DIRECTION_FLOOR {
        return Err(QuizError::UndefinedDirection(format!(
            "{role} Bloch vector length {} is below {DIRECTION_FLOOR}",
            len_sq.max(0.0).sqrt()
        )));
    }
    Ok(len_sq)
}

/// Cosine of the angle between two single-site Bloch vectors, computed from
/// traces: `(2 tr ρ_t ρ_c − 1) / (√(2 tr ρ_c² − 1) √(2 tr ρ_t² − 1))`.
pub fn cos_theta(rho_t: &DensityMatrix, rho_c: &DensityMatrix) -> Result<f64> {
    let t = check_single_site(rho_t, "target")?;
    let c = check_single_site(rho_c, "candidate")?;
    let cross = 2.0 * rho_t.overlap(rho_c)? - 1.0;
    Ok((cross / (c.sqrt() * t.sqrt())).clamp(-1.0, 1.0))
}

/// In-plane angle from `c` to `r` about the unit `axis`, in `(−π, π]`.
/// Positive when `c` must turn counterclockwise about `axis` to meet `r`.
pub fn signed_theta(c: BlochVector, r: BlochVector, axis: BlochVector) -> Result<f64> {
    if (axis.norm() - 1.0).abs() > 1e-12 {
        return Err(validation("rotation axis must be a unit vector"));
    }
    for (v, role) in [(c, "candidate"), (r, "target")] {
        let projected = v.reject(axis).norm();
        if projected < DIRECTION_FLOOR {
            return Err(QuizError::UndefinedDirection(format!(
                "{role} Bloch vector has in-plane length {projected}"
            )));
        }
    }
    let sin_part = axis.dot(c.cross(r));
    let cos_part = c.dot(r) - c.dot(axis) * r.dot(axis);
    Ok(wrap_angle(sin_part.atan2(cos_part)))
}

/// Maps `−π` onto `π` so angles live in `(−π, π]`.
fn wrap_angle(theta: f64) -> f64 {
    if theta <= -std::f64::consts::PI {
        theta + 2.0 * std::f64::consts::PI
    } else {
        theta
    }
}

/// Signed per-site angles between candidate and target Bloch vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleProfile {
    thetas: Vec<f64>,
    cosines: Vec<f64>,
    sum_sin: f64,
    sum_cos: f64,
}

impl AngleProfile {
    /// Profile from bare angles; cosines are `cos θ_k`.
    pub fn from_thetas(thetas: Vec<f64>) -> Result<Self> {
        let cosines = thetas.iter().map(|t| t.cos()).collect();
        Self::from_parts(thetas, cosines)
    }

    fn from_parts(thetas: Vec<f64>, cosines: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(validation("empty angle profile"));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(validation("angles must be finite"));
        }
        let sum_sin = thetas.iter().map(|t| t.sin()).sum();
        let sum_cos = cosines.iter().sum();
        Ok(AngleProfile {
            thetas,
            cosines,
            sum_sin,
            sum_cos,
        })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn cosines(&self) -> &[f64] {
        &self.cosines
    }

    pub fn sum_sin(&self) -> f64 {
        self.sum_sin
    }

    /// Equal to the chain similarity F.
    pub fn sum_cos(&self) -> f64 {
        self.sum_cos
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

/// Single-site reduced states of every site of `state`.
pub fn site_densities(state: &StateVector) -> Result<Vec<DensityMatrix>> {
    let n = state.n_sites();
    (1..=n)
        .map(|k| partial_trace(state, SubsetMask::singleton(k, n)?))
        .collect()
}

pub fn site_bloch_vectors(state: &StateVector) -> Result<Vec<BlochVector>> {
    site_densities(state)?.iter().map(bloch_vector).collect()
}

/// Chain similarity `F = Σ_k cos θ_k` between matching sites, with the signed
/// angle profile about `+ẑ`.
pub fn similarity_chain(
    state_t: &StateVector,
    state_c: &StateVector,
) -> Result<(f64, AngleProfile)> {
    if state_t.n_sites() != state_c.n_sites() {
        return Err(validation(format!(
            "target has {} sites, candidate {}",
            state_t.n_sites(),
            state_c.n_sites()
        )));
    }
    similarity_from_densities(&site_densities(state_t)?, &site_densities(state_c)?)
}

/// [`similarity_chain`] on precomputed single-site reduced states.
///
/// `cos θ_k` comes from the trace formula. The signed angle has magnitude
/// `atan2(|c × r|, c·r)` and takes its sign from `ẑ·(c × r)`, which reduces to
/// [`signed_theta`] about `ẑ` whenever the vectors lie in the xy plane.
pub fn similarity_from_densities(
    target: &[DensityMatrix],
    candidate: &[DensityMatrix],
) -> Result<(f64, AngleProfile)> {
    if target.len() != candidate.len() {
        return Err(validation("site count mismatch"));
    }
    let mut thetas = Vec::with_capacity(target.len());
    let mut cosines = Vec::with_capacity(target.len());
    for (rho_t, rho_c) in target.iter().zip(candidate) {
        cosines.push(cos_theta(rho_t, rho_c)?);
        let r = bloch_vector(rho_t)?;
        let c = bloch_vector(rho_c)?;
        let cross = c.cross(r);
        let magnitude = cross.norm().atan2(c.dot(r));
        let sign = if cross.z < 0.0 { -1.0 } else { 1.0 };
        thetas.push(wrap_angle(sign * magnitude));
    }
    let profile = AngleProfile::from_parts(thetas, cosines)?;
    Ok((profile.sum_cos(), profile))
}

/// All non-empty proper subsets of `n` sites, ascending by bitmask.
pub fn enumerate_bipartition_subsets(n: usize) -> Result<Vec<SubsetMask>> {
    if n < 2 {
        return Err(validation(format!("need at least 2 sites, got {n}")));
    }
    if n > 31 {
        return Err(QuizError::Capacity(format!("{n} sites")));
    }
    (1..(1u32 << n) - 1)
        .map(|bits| SubsetMask::new(bits, n))
        .collect()
}

/// `1 − [tr ρ_t² − tr ρ_c²]²`
pub fn purity_term(rho_t: &DensityMatrix, rho_c: &DensityMatrix) -> Result<f64> {
    if rho_t.dim() != rho_c.dim() {
        return Err(validation(format!(
            "subset dimensions {} and {} differ",
            rho_t.dim(),
            rho_c.dim()
        )));
    }
    let d = rho_t.purity() - rho_c.purity();
    Ok(1.0 - d * d)
}

/// Per-subset comparison function of the general similarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetFunctionKind {
    /// `cos θ` between Bloch vectors; singletons only.
    CosineSingleSite,
    /// [`purity_term`]; any subset.
    Purity,
}

impl SubsetFunctionKind {
    pub fn evaluate(self, rho_t: &DensityMatrix, rho_c: &DensityMatrix) -> Result<f64> {
        match self {
            SubsetFunctionKind::CosineSingleSite => cos_theta(rho_t, rho_c),
            SubsetFunctionKind::Purity => purity_term(rho_t, rho_c),
        }
    }

    fn accepts(self, subset: &SubsetMask) -> bool {
        match self {
            SubsetFunctionKind::CosineSingleSite => subset.len() == 1,
            SubsetFunctionKind::Purity => true,
        }
    }
}

/// Sum over `subsets` of `f(ρ_t|S, ρ_c|S)` for an arbitrary comparison `f`.
pub fn similarity_with<F>(
    state_t: &StateVector,
    state_c: &StateVector,
    subsets: &[SubsetMask],
    mut f: F,
) -> Result<f64>
where
    F: FnMut(SubsetMask, &DensityMatrix, &DensityMatrix) -> Result<f64>,
{
    if state_t.n_sites() != state_c.n_sites() {
        return Err(validation("target and candidate differ in size"));
    }
    let mut total = 0.0;
    for &subset in subsets {
        let rho_t = partial_trace(state_t, subset)?;
        let rho_c = partial_trace(state_c, subset)?;
        total += f(subset, &rho_t, &rho_c)?;
    }
    Ok(total)
}

/// General subset similarity with one of the built-in comparison functions.
pub fn similarity_general(
    state_t: &StateVector,
    state_c: &StateVector,
    subsets: &[SubsetMask],
    kind: SubsetFunctionKind,
) -> Result<f64> {
    if let Some(bad) = subsets.iter().find(|s| !kind.accepts(s)) {
        return Err(validation(format!(
            "{kind:?} cannot be applied to subset {bad}"
        )));
    }
    similarity_with(state_t, state_c, subsets, |_, t, c| kind.evaluate(t, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ground_state, product_ground_bloch, ChainSpec};

    fn rho(v: BlochVector) -> DensityMatrix {
        v.to_density().unwrap()
    }

    #[test]
    fn bloch_read_off() {
        assert_eq!(
            bloch_vector(&rho(BlochVector::default())).unwrap(),
            BlochVector::default()
        );
        let up = DensityMatrix::pure(&StateVector::basis(1, 0).unwrap());
        assert_eq!(bloch_vector(&up).unwrap(), BlochVector::Z);
        let v = bloch_vector(&rho(BlochVector::new(0.6, -0.8, 0.0))).unwrap();
        assert!(v.max_abs_diff(BlochVector::new(0.6, -0.8, 0.0)) < 1e-15);
    }

    #[test]
    fn bloch_needs_single_site() {
        let two = DensityMatrix::pure(&StateVector::basis(2, 0).unwrap());
        assert!(bloch_vector(&two).is_err());
    }

    #[test]
    fn cos_theta_examples() {
        let v = BlochVector::new(0.3, -0.4, 0.866);
        let v = v.normalized();
        assert!((cos_theta(&rho(v), &rho(v)).unwrap() - 1.0).abs() < 1e-12);
        assert!((cos_theta(&rho(v), &rho(-v)).unwrap() + 1.0).abs() < 1e-12);

        let r = BlochVector::new(-0.9, 0.0, 0.0);
        let c = BlochVector::new(0.0, -0.5, 0.0);
        assert!(cos_theta(&rho(r), &rho(c)).unwrap().abs() < 1e-15);
        assert!((r.dot(c) / (r.norm() * c.norm())).abs() < 1e-15);
    }

    #[test]
    fn cos_theta_floor() {
        let err = cos_theta(&rho(BlochVector::default()), &rho(BlochVector::X)).unwrap_err();
        assert!(matches!(err, QuizError::UndefinedDirection(_)));
    }

    #[test]
    fn signed_theta_examples() {
        let c = product_ground_bloch(-0.5);
        let r = product_ground_bloch(0.5);
        assert_eq!(signed_theta(c, c, BlochVector::Z).unwrap(), 0.0);
        let theta = signed_theta(c, r, BlochVector::Z).unwrap();
        assert!((theta - 0.8f64.atan2(0.6)).abs() < 1e-15);
        assert!((theta - 2.0 * 0.5f64.atan()).abs() < 1e-15);
        assert!((signed_theta(r, c, BlochVector::Z).unwrap() + theta).abs() < 1e-15);

        assert!(matches!(
            signed_theta(BlochVector::Z, r, BlochVector::Z),
            Err(QuizError::UndefinedDirection(_))
        ));
        assert!(signed_theta(c, r, BlochVector::new(0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn antipodal_angle_is_pi() {
        let theta = signed_theta(BlochVector::X, -BlochVector::X, BlochVector::Z).unwrap();
        assert_eq!(theta, std::f64::consts::PI);
    }

    #[test]
    fn chain_similarity_identical() {
        let spec = ChainSpec::new(vec![-0.5, 0.25, 0.0, 0.5], 1.0).unwrap();
        let psi = ground_state(&spec).unwrap().state;
        let (f, profile) = similarity_chain(&psi, &psi).unwrap();
        assert!((f - 4.0).abs() < 1e-12);
        assert!(profile.thetas().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn chain_similarity_uncoupled_uniform() {
        let t = ground_state(&ChainSpec::uniform(4, 0.5, 0.0).unwrap())
            .unwrap()
            .state;
        let c = ground_state(&ChainSpec::uniform(4, -0.5, 0.0).unwrap())
            .unwrap()
            .state;
        let (f, profile) = similarity_chain(&t, &c).unwrap();
        assert!((f - 2.4).abs() < 1e-10);
        for &theta in profile.thetas() {
            assert!((theta - 2.0 * 0.5f64.atan()).abs() < 1e-9);
        }
        assert!((profile.sum_cos() - f).abs() == 0.0);
    }

    #[test]
    fn chain_similarity_size_mismatch() {
        let a = StateVector::basis(2, 0).unwrap();
        let b = StateVector::basis(3, 0).unwrap();
        assert!(similarity_chain(&a, &b).is_err());
    }

    #[test]
    fn bipartition_counts() {
        let two = enumerate_bipartition_subsets(2).unwrap();
        assert_eq!(two.iter().map(|m| m.bits()).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(enumerate_bipartition_subsets(4).unwrap().len(), 14);
        assert_eq!(enumerate_bipartition_subsets(6).unwrap().len(), 62);
        assert!(enumerate_bipartition_subsets(1).is_err());
    }

    #[test]
    fn purity_term_examples() {
        let pure = rho(BlochVector::X);
        let mixed = rho(BlochVector::default());
        assert_eq!(purity_term(&pure, &pure).unwrap(), 1.0);
        assert!((purity_term(&pure, &mixed).unwrap() - 0.75).abs() < 1e-15);
        let two = DensityMatrix::pure(&StateVector::basis(2, 0).unwrap());
        assert!(purity_term(&pure, &two).is_err());
    }

    #[test]
    fn general_similarity_kinds() {
        let spec_t = ChainSpec::new(vec![0.5, 0.25, 0.0, -0.25], 1.0).unwrap();
        let spec_c = ChainSpec::uniform(4, -0.5, 1.0).unwrap();
        let t = ground_state(&spec_t).unwrap().state;
        let c = ground_state(&spec_c).unwrap().state;

        let singles: Vec<_> = (1..=4)
            .map(|k| SubsetMask::singleton(k, 4).unwrap())
            .collect();
        let general =
            similarity_general(&t, &c, &singles, SubsetFunctionKind::CosineSingleSite).unwrap();
        let (f, _) = similarity_chain(&t, &c).unwrap();
        assert!((general - f).abs() < 1e-12);

        let all = enumerate_bipartition_subsets(4).unwrap();
        let same = similarity_general(&t, &t, &all, SubsetFunctionKind::Purity).unwrap();
        assert!((same - 14.0).abs() < 1e-12);

        assert!(matches!(
            similarity_general(&t, &c, &all, SubsetFunctionKind::CosineSingleSite),
            Err(QuizError::Validation(_))
        ));
    }

    #[test]
    fn pluggable_subset_function() {
        let t = StateVector::basis(3, 0).unwrap();
        let subsets = enumerate_bipartition_subsets(3).unwrap();
        let sizes = similarity_with(&t, &t, &subsets, |s, _, _| Ok(s.len() as f64)).unwrap();
        // three singletons and three pairs
        assert_eq!(sizes, 9.0);
    }

    #[test]
    fn rotation_helper_is_counterclockwise() {
        let v = BlochVector::X.rotate(BlochVector::Z, std::f64::consts::FRAC_PI_2);
        assert!(v.max_abs_diff(BlochVector::Y) < 1e-15);
    }
}
