use num_complex::Complex64;

use super::{Operator, StateVector, HERMITIAN_TOL};
use crate::error::{validation, Result};

/// Spectral gaps below this mark a ground state as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order and the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

impl EigenDecomposition {
    pub fn vector(&self, index: usize) -> Vec<Complex64> {
        let n = self.vectors.dim();
        (0..n).map(|row| self.vectors.get(row, index)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// E₁ − E₀; infinite for a one-dimensional space.
    pub gap: f64,
    /// Set when `gap` is below [`DEGENERACY_GAP`]. The ground vector is then
    /// one arbitrary member of the ground space.
    pub degenerate: bool,
}

/// Full spectrum of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary on column `q`, then zeroes the now-real pivot with a plane rotation.
pub fn hermitian_eigen(h: &Operator) -> Result<EigenDecomposition> {
    let defect = h.hermiticity_defect();
    if defect >= HERMITIAN_TOL {
        return Err(validation(format!(
            "eigensolver needs a Hermitian matrix (defect {defect:e})"
        )));
    }
    let n = h.dim();
    let mut a: Vec<Complex64> = h.entries().to_vec();
    let mut v = Operator::identity(n).entries().to_vec();
    for i in 0..n {
        a[i * n + i].im = 0.0;
    }

    let scale: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let threshold = (f64::EPSILON * scale).powi(2);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum();
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let e = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ec = e.conj();

                // A ← A G with G = [[c, s], [−s ē, c ē]] on columns p, q.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * ec * s;
                    a[k * n + q] = akp * s + akq * ec * c;
                }
                // A ← G† A on rows p, q.
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * e * s;
                    a[q * n + k] = apk * s + aqk * e * c;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * ec * s;
                    v[k * n + q] = vkp * s + vkq * ec * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut sorted = vec![Complex64::new(0.0, 0.0); n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            sorted[row * n + col] = v[row * n + src];
        }
    }
    Ok(EigenDecomposition {
        values,
        vectors: Operator::new(n, sorted, false)?,
    })
}

/// Lowest eigenpair of `h`, with the gap to the next level.
pub fn hermitian_ground_state(h: &Operator) -> Result<GroundState> {
    let eig = hermitian_eigen(h)?;
    let mut state = StateVector::normalized(eig.vector(0))?;
    state.fix_phase();
    let gap = eig
        .values
        .get(1)
        .map_or(f64::INFINITY, |e1| (e1 - eig.values[0]).max(0.0));
    Ok(GroundState {
        energy: eig.values[0],
        state,
        gap,
        degenerate: gap < DEGENERACY_GAP,
    })
}
