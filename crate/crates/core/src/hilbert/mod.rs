//! Dense complex linear algebra over qubit registers.
//!
//! Basis ordering follows the Kronecker convention: site 1 is the most
//! significant bit of a basis index, so `|10⟩` on two sites is index 2.

mod eigen;

pub use eigen::{hermitian_eigen, hermitian_ground_state, EigenDecomposition, GroundState};

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{validation, QuizError, Result};

/// Largest register handled densely unless a caller opts into more.
pub const DEFAULT_MAX_SITES: usize = 10;

/// Tolerance for the unit-norm invariant on states.
pub const NORM_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Operator {
        let entries = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        Operator {
            dim: 2,
            entries: entries.to_vec(),
            hermitian_hint: true,
        }
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, Debug)]
pub struct Operator {
    dim: usize,
    entries: Vec<Complex64>,
    hermitian_hint: bool,
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.entries == other.entries
    }
}

impl Operator {
    /// Builds an operator from row-major entries. `hermitian_hint` is checked,
    /// not trusted.
    pub fn new(dim: usize, entries: Vec<Complex64>, hermitian_hint: bool) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(validation(format!(
                "operator of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let op = Operator {
            dim,
            entries,
            hermitian_hint,
        };
        if hermitian_hint && op.hermiticity_defect() >= HERMITIAN_TOL {
            return Err(validation("operator flagged Hermitian is not"));
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![ONE; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            dim,
            entries: vec![ZERO; dim * dim],
            hermitian_hint: true,
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let dim = diag.len();
        let mut entries = vec![ZERO; dim * dim];
        for (i, d) in diag.iter().enumerate() {
            entries[i * dim + i] = *d;
        }
        Operator {
            dim,
            entries,
            hermitian_hint: diag.iter().all(|d| d.im == 0.0),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    /// max |A − A†| over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| i == j || self.get(i, j) == ZERO))
    }

    /// max |U†U − I| over entries.
    pub fn unitarity_defect(&self) -> f64 {
        if self.is_diagonal() {
            return (0..self.dim)
                .map(|i| (self.get(i, i).norm_sqr() - 1.0).abs())
                .fold(0.0, f64::max);
        }
        let prod = &self.adjoint() * self;
        prod.max_abs_diff(&Operator::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() < tol
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.get(i, j).conj();
            }
        }
        Operator {
            dim: n,
            entries,
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
            hermitian_hint: self.hermitian_hint && factor.im == 0.0,
        }
    }

    /// Matrix-vector product on raw amplitudes.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self + &rhs.scale(-ONE)
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                let row = &rhs.entries[k * n..(k + 1) * n];
                for (out, b) in entries[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *out += a * b;
                }
            }
        }
        Operator {
            dim: n,
            entries,
            hermitian_hint: false,
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: f64) -> Operator {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

fn capacity_check(dim: usize) -> Result<()> {
    if dim > 1usize << DEFAULT_MAX_SITES {
        return Err(QuizError::Capacity(format!(
            "dimension {dim} exceeds dense cap of 2^{DEFAULT_MAX_SITES}"
        )));
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Result<Operator> {
    let dim = a
        .dim
        .checked_mul(b.dim)
        .ok_or_else(|| QuizError::Capacity("kron dimension overflows usize".into()))?;
    capacity_check(dim)?;
    let mut entries = vec![ZERO; dim * dim];
    for i in 0..a.dim {
        for j in 0..a.dim {
            let aij = a.get(i, j);
            if aij == ZERO {
                continue;
            }
            for k in 0..b.dim {
                for l in 0..b.dim {
                    entries[(i * b.dim + k) * dim + j * b.dim + l] = aij * b.get(k, l);
                }
            }
        }
    }
    Ok(Operator {
        dim,
        entries,
        hermitian_hint: a.hermitian_hint && b.hermitian_hint,
    })
}

/// `p` acting on site `k` (1-based) of an `n`-site register.
pub fn site_operator(p: Pauli, k: usize, n: usize) -> Result<Operator> {
    if n > DEFAULT_MAX_SITES {
        return Err(QuizError::Capacity(format!(
            "{n} sites exceed dense cap of {DEFAULT_MAX_SITES}"
        )));
    }
    if k == 0 || k > n {
        return Err(QuizError::Index(format!("site {k} not in 1..={n}")));
    }
    let mut op = if k == 1 {
        p.matrix()
    } else {
        Pauli::I.matrix()
    };
    for site in 2..=n {
        let factor = if site == k { p } else { Pauli::I };
        op = kron(&op, &factor.matrix())?;
    }
    Ok(op)
}

/// Pure state on `n_sites` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    n_sites: usize,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_sites = register_size(amplitudes.len())?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(validation(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector {
            amplitudes,
            n_sites,
        })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(validation("cannot normalize a zero or non-finite vector"));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::new(amplitudes)
    }

    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > DEFAULT_MAX_SITES {
            return Err(QuizError::Capacity(format!("{n_sites} sites")));
        }
        let dim = 1usize << n_sites;
        if index >= dim {
            return Err(QuizError::Index(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    /// Tensor product of single-site states, site 1 first.
    pub fn product(sites: &[[Complex64; 2]]) -> Result<Self> {
        if sites.is_empty() {
            return Err(validation("product of zero sites"));
        }
        if sites.len() > DEFAULT_MAX_SITES {
            return Err(QuizError::Capacity(format!("{} sites", sites.len())));
        }
        let mut amps = vec![ONE];
        for site in sites {
            amps = amps
                .iter()
                .flat_map(|a| [a * site[0], a * site[1]])
                .collect();
        }
        Self::normalized(amps)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// ‖self − other‖₂, with no phase alignment.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Applies the fixed phase convention: first amplitude with modulus above
    /// 1e−10 becomes real positive.
    pub(crate) fn fix_phase(&mut self) {
        if let Some(lead) = self.amplitudes.iter().find(|a| a.norm() > 1e-10) {
            let phase = lead.conj() / lead.norm();
            for a in &mut self.amplitudes {
                *a *= phase;
            }
        }
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn register_size(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(validation(format!(
            "state length {len} is not 2^N with N >= 1"
        )));
    }
    let n = len.trailing_zeros() as usize;
    if n > DEFAULT_MAX_SITES {
        return Err(QuizError::Capacity(format!("{n} sites")));
    }
    Ok(n)
}

/// Non-empty set of sites, bit `k − 1` standing for site `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    bits: u32,
    n_sites: usize,
}

impl SubsetMask {
    pub fn new(bits: u32, n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > 31 {
            return Err(validation(format!("register of {n_sites} sites")));
        }
        if bits == 0 {
            return Err(validation("empty subset"));
        }
        if bits >> n_sites != 0 {
            return Err(QuizError::Index(format!(
                "mask {bits:#b} names sites beyond {n_sites}"
            )));
        }
        Ok(SubsetMask { bits, n_sites })
    }

    /// From 1-based site labels.
    pub fn from_sites(sites: &[usize], n_sites: usize) -> Result<Self> {
        let mut bits = 0u32;
        for &k in sites {
            if k == 0 || k > n_sites || k > 31 {
                return Err(QuizError::Index(format!("site {k} not in 1..={n_sites}")));
            }
            bits |= 1 << (k - 1);
        }
        Self::new(bits, n_sites)
    }

    pub fn singleton(k: usize, n_sites: usize) -> Result<Self> {
        Self::from_sites(&[k], n_sites)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_proper(&self) -> bool {
        self.len() < self.n_sites
    }

    /// Ascending 1-based site labels.
    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n_sites).filter(move |k| self.bits & (1 << (k - 1)) != 0)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.sites().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// Reduced state of a set of sites.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: Operator,
    n_sites: usize,
}

impl DensityMatrix {
    pub const TOL: f64 = 1e-10;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: Operator) -> Result<Self> {
        let n_sites = register_size(matrix.dim())?;
        let rho = DensityMatrix { matrix, n_sites };
        rho.check_invariants()?;
        Ok(rho)
    }

    pub fn pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        let n = a.len();
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = a[i] * a[j].conj();
            }
        }
        DensityMatrix {
            matrix: Operator {
                dim: n,
                entries,
                hermitian_hint: true,
            },
            n_sites: state.n_sites(),
        }
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// tr(ρ²), using Hermiticity: Σ |ρ_ij|².
    pub fn purity(&self) -> f64 {
        self.matrix.entries().iter().map(|e| e.norm_sqr()).sum()
    }

    /// tr(self · other)
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(validation(format!(
                "density matrices of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        Ok(acc.re)
    }

    pub fn transform(&self, u: &Operator) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(validation("unitary and density matrix differ in dimension"));
        }
        let m = &(u * &self.matrix) * &u.adjoint();
        Ok(DensityMatrix {
            matrix: Operator {
                hermitian_hint: true,
                ..m
            },
            n_sites: self.n_sites,
        })
    }

    pub fn check_invariants(&self) -> Result<()> {
        if !self.matrix.is_hermitian(Self::TOL) {
            return Err(validation("density matrix is not Hermitian"));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > Self::TOL {
            return Err(validation(format!("density matrix trace {tr}")));
        }
        let eig = hermitian_eigen(&self.matrix)?;
        if eig.values[0] < -Self::TOL {
            return Err(validation(format!(
                "density matrix eigenvalue {} is negative",
                eig.values[0]
            )));
        }
        let p = self.purity();
        let floor = 1.0 / self.dim() as f64;
        if p < floor - Self::TOL || p > 1.0 + Self::TOL {
            return Err(validation(format!("purity {p} outside [{floor}, 1]")));
        }
        Ok(())
    }
}

/// Reduced density matrix of the sites in `keep`, tracing out the rest.
///
/// Kept sites keep their relative order, so the lowest-numbered kept site is
/// the most significant bit of the reduced basis.
pub fn partial_trace(state: &StateVector, keep: SubsetMask) -> Result<DensityMatrix> {
    let n = state.n_sites();
    if keep.n_sites() != n {
        return Err(validation(format!(
            "mask for {} sites applied to {n}-site state",
            keep.n_sites()
        )));
    }
    let kept: Vec<usize> = keep.sites().collect();
    let traced: Vec<usize> = (1..=n).filter(|k| !kept.contains(k)).collect();
    let dk = 1usize << kept.len();
    let de = 1usize << traced.len();

    // Reshape ψ into a dk × de matrix M, then ρ = M M†.
    let mut m = vec![ZERO; dk * de];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let bit = |site: usize| (idx >> (n - site)) & 1;
        let ki = kept.iter().fold(0, |acc, &s| (acc << 1) | bit(s));
        let ei = traced.iter().fold(0, |acc, &s| (acc << 1) | bit(s));
        m[ki * de + ei] = *amp;
    }
    let mut entries = vec![ZERO; dk * dk];
    for i in 0..dk {
        for j in i..dk {
            let v: Complex64 = (0..de).map(|e| m[i * de + e] * m[j * de + e].conj()).sum();
            entries[i * dk + j] = v;
            entries[j * dk + i] = v.conj();
        }
        entries[i * dk + i].im = 0.0;
    }
    Ok(DensityMatrix {
        matrix: Operator {
            dim: dk,
            entries,
            hermitian_hint: true,
        },
        n_sites: kept.len(),
    })
}

/// `u |state⟩`, rejecting non-unitary `u`.
pub fn apply_unitary(u: &Operator, state: &StateVector) -> Result<StateVector> {
    if u.dim() != state.dim() {
        return Err(validation(format!(
            "operator dimension {} vs state dimension {}",
            u.dim(),
            state.dim()
        )));
    }
    let defect = u.unitarity_defect();
    if defect >= UNITARY_TOL {
        return Err(validation(format!(
            "operator is not unitary (defect {defect:e})"
        )));
    }
    let amplitudes = if u.is_diagonal() {
        state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| u.get(i, i) * a)
            .collect()
    } else {
        u.apply(state.amplitudes())
    };
    Ok(StateVector {
        amplitudes,
        n_sites: state.n_sites(),
    })
}
