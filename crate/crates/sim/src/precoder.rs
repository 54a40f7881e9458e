//! Zero-forcing private precoders and the generic common precoder.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_gaussian, CVector};
use crate::SimError;

/// Estimates whose stacked matrix has a larger condition number are treated
/// as degenerate and resampled.
pub const CONDITION_LIMIT: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct Precoders {
    /// Unit-norm ZF precoder per active user, `None` for inactive users.
    pub private: Vec<Option<CVector>>,
    /// Unit-norm common precoder, independent of the channel.
    pub common: CVector,
}

fn normalized(v: CVector) -> Option<CVector> {
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| v / Complex64::new(n, 0.0))
}

/// Orthonormal basis of the span of `vectors` (modified Gram-Schmidt with one
/// re-orthogonalization pass). Zero vectors are skipped.
fn orthonormal_basis(vectors: &[&CVector]) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = (*v).clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        if w.norm() > 1e-12 * scale {
            basis.extend(normalized(w));
        }
    }
    basis
}

fn project_out(v: &CVector, basis: &[CVector]) -> CVector {
    let mut w = v.clone();
    for _ in 0..2 {
        for q in basis {
            let c = q.dotc(&w);
            w -= q * c;
        }
    }
    w
}

/// Condition number of the matrix whose rows are the non-zero vectors.
pub fn condition_number(vectors: &[&CVector]) -> f64 {
    let rows: Vec<&CVector> = vectors.iter().copied().filter(|v| v.norm() > 0.0).collect();
    if rows.is_empty() {
        return 1.0;
    }
    let m = rows[0].len();
    let mat = DMatrix::from_fn(rows.len(), m, |r, c| rows[r][c].conj());
    let sv = mat.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// ZF precoders over the channel estimates: `v_i ⊥ ĥ_l` for every other
/// active user `l`. The direction within the null space is the projection of
/// `ĥ_i`; when user `i` has no CSIT at all a random direction is projected
/// instead.
pub fn zf_precoders<R: Rng + ?Sized>(estimates: &[CVector], active: &[bool], rng: &mut R) -> Result<Precoders, SimError> {
    let m = estimates.first().map(|e| e.len()).unwrap_or(0);
    let active_ids: Vec<usize> = (0..estimates.len()).filter(|&i| active[i]).collect();
    if active_ids.len() > m {
        return Err(SimError::InvalidConfig(format!("{} active users exceed {m} antennas", active_ids.len())));
    }
    let stacked: Vec<&CVector> = active_ids.iter().map(|&i| &estimates[i]).collect();
    let cond = condition_number(&stacked);
    if cond.is_nan() || cond > CONDITION_LIMIT {
        return Err(SimError::IllConditioned(cond));
    }
    let common = normalized(complex_gaussian(m, 1.0, rng)).ok_or(SimError::IllConditioned(f64::INFINITY))?;
    let mut private = vec![None; estimates.len()];
    for &i in &active_ids {
        let others: Vec<&CVector> = active_ids.iter().filter(|&&l| l != i).map(|&l| &estimates[l]).collect();
        let basis = orthonormal_basis(&others);
        let target = if estimates[i].norm() > 0.0 { estimates[i].clone() } else { complex_gaussian(m, 1.0, rng) };
        let mut v = project_out(&target, &basis);
        if v.norm() <= 1e-12 * target.norm() {
            // estimate lies in the others' span; any null-space direction works
            v = project_out(&complex_gaussian(m, 1.0, rng), &basis);
        }
        private[i] = Some(normalized(v).ok_or(SimError::IllConditioned(f64::INFINITY))?);
    }
    Ok(Precoders { private, common })
}
