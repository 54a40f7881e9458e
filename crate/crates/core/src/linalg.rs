//! Exact Gaussian elimination over the rationals.

use crate::Rational;

/// Solves the square system `a x = b`. Returns `None` unless the solution is
/// unique.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    assert_eq!(b.len(), n, "rhs length");
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = Rational::one() / &m[col][col];
        for x in m[col][col..].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            let (pivot_row, target) = if r < col {
                let (lo, hi) = m.split_at_mut(col);
                (&hi[0], &mut lo[r])
            } else {
                let (lo, hi) = m.split_at_mut(r);
                (&lo[col], &mut hi[0])
            };
            for c in col..=n {
                if pivot_row[c].is_zero() {
                    continue;
                }
                let delta = &factor * &pivot_row[c];
                target[c] -= &delta;
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().expect("augmented column")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn mat(rows: &[&[&str]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|s| q(s)).collect()).collect()
    }

    fn vecq(xs: &[&str]) -> Vec<Rational> {
        xs.iter().map(|s| q(s)).collect()
    }

    #[test]
    fn two_by_two_by_hand() {
        // x + y = 1.3, y = 1  ->  (0.3, 1)
        let a = mat(&[&["1", "1"], &["0", "1"]]);
        assert_eq!(solve(&a, &vecq(&["1.3", "1"])), Some(vecq(&["0.3", "1"])));
        // 2x + 3y = 7, 4x - y = 1  ->  x = 5/7, y = 13/7
        let a = mat(&[&["2", "3"], &["4", "-1"]]);
        assert_eq!(solve(&a, &vecq(&["7", "1"])), Some(vecq(&["5/7", "13/7"])));
    }

    #[test]
    fn three_by_three_by_hand() {
        // needs a row swap: first pivot is zero
        // y + z = 1.2, x + y + z = 1.7, x + y = 1.5  ->  (0.5, 1, 0.2)
        let a = mat(&[&["0", "1", "1"], &["1", "1", "1"], &["1", "1", "0"]]);
        assert_eq!(solve(&a, &vecq(&["1.2", "1.7", "1.5"])), Some(vecq(&["0.5", "1", "0.2"])));
        // x - 2y + z = 0, 2y - 8z = 8, -4x + 5y + 9z = -9  ->  (29, 16, 3)
        let a = mat(&[&["1", "-2", "1"], &["0", "2", "-8"], &["-4", "5", "9"]]);
        assert_eq!(solve(&a, &vecq(&["0", "8", "-9"])), Some(vecq(&["29", "16", "3"])));
    }

    #[test]
    fn singular_systems_have_no_unique_solution() {
        let a = mat(&[&["1", "1"], &["2", "2"]]);
        assert_eq!(solve(&a, &vecq(&["1", "2"])), None);
        assert_eq!(solve(&a, &vecq(&["1", "3"])), None);
        let a = mat(&[&["1", "1", "0"], &["0", "1", "1"], &["1", "2", "1"]]);
        assert_eq!(solve(&a, &vecq(&["1", "1", "2"])), None);
    }
}
