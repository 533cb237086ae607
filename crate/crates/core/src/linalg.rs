//! Dense linear algebra over exact rationals.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::Rational;

pub type QMatrix = Vec<Vec<Rational>>;

pub fn zeros(n: usize, m: usize) -> QMatrix {
    vec![vec![Rational::zero(); m]; n]
}

pub fn identity(n: usize) -> QMatrix {
    let mut a = zeros(n, n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    a
}

pub fn transpose(a: &[Vec<Rational>]) -> QMatrix {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> QMatrix {
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .filter(|(x, _)| !x.is_zero())
                        .map(|(x, brow)| x * &brow[j])
                        .sum()
                })
                .collect()
        })
        .collect()
}

pub fn scale(a: &[Vec<Rational>], k: &Rational) -> QMatrix {
    a.iter().map(|row| row.iter().map(|x| x * k).collect()).collect()
}

pub fn add(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> QMatrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn is_skew(a: &[Vec<Rational>]) -> bool {
    let n = a.len();
    a.iter().all(|r| r.len() == n)
        && (0..n).all(|i| a[i][i].is_zero() && (0..i).all(|j| a[i][j] == -&a[j][i]))
}

/// Gaussian elimination with the first nonzero pivot.
pub fn det(a: &[Vec<Rational>]) -> Rational {
    let n = a.len();
    let mut m: QMatrix = a.to_vec();
    let mut d = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        let p = m[col][col].clone();
        d *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..n {
                let sub = &f * &m[col][c];
                m[r][c] -= sub;
            }
        }
    }
    d
}

pub fn inverse(a: &[Vec<Rational>]) -> Result<QMatrix> {
    let n = a.len();
    let mut m: QMatrix = a.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::Singular)?;
        m.swap(piv, col);
        inv.swap(piv, col);
        let p = m[col][col].recip();
        for c in 0..n {
            m[col][c] *= &p;
            inv[col][c] *= &p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..n {
                let s1 = &f * &m[col][c];
                m[r][c] -= s1;
                let s2 = &f * &inv[col][c];
                inv[r][c] -= s2;
            }
        }
    }
    Ok(inv)
}

/// Coefficients (lowest degree first) of the polynomial through the points
/// `(xs[i], ys[i])`, by Lagrange interpolation.
pub fn interpolate(xs: &[Rational], ys: &[Rational]) -> Vec<Rational> {
    let n = xs.len();
    let mut out = vec![Rational::zero(); n];
    for i in 0..n {
        // basis numerator Π_{j≠i} (x - x_j), built incrementally
        let mut basis = vec![Rational::one()];
        let mut denom = Rational::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut next = vec![Rational::zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] += b;
                next[k] -= b * &xs[j];
            }
            basis = next;
            denom *= &xs[i] - &xs[j];
        }
        let w = &ys[i] / denom;
        for (o, b) in out.iter_mut().zip(&basis) {
            *o += b * &w;
        }
    }
    while out.len() > 1 && out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{int, rat};

    fn q(rows: &[&[i64]]) -> QMatrix {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn det_and_inverse() {
        let a = q(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(det(&a), int(18));
        let inv = inverse(&a).unwrap();
        assert_eq!(mul(&a, &inv), identity(3));
        assert_eq!(inverse(&q(&[&[1, 2], &[2, 4]])), Err(Error::Singular));
        assert_eq!(det(&q(&[&[0, 1], &[1, 0]])), int(-1));
    }

    #[test]
    fn skew_check() {
        assert!(is_skew(&q(&[&[0, 1], &[-1, 0]])));
        assert!(!is_skew(&q(&[&[0, 1], &[1, 0]])));
        assert!(!is_skew(&q(&[&[1, 0], &[0, 0]])));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        // 3 - x/2 + 2x^3
        let p = |x: &Rational| int(3) - x * rat(1, 2) + x * x * x * int(2);
        let xs: Vec<Rational> = (0..5).map(int).collect();
        let ys: Vec<Rational> = xs.iter().map(p).collect();
        assert_eq!(interpolate(&xs, &ys), vec![int(3), rat(-1, 2), int(0), int(2)]);
    }

    fn matrix(n: usize) -> impl proptest::strategy::Strategy<Value = QMatrix> {
        use proptest::prelude::*;
        prop::collection::vec(prop::collection::vec((-9i64..=9, 1i64..=3), n), n)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(|(a, b)| rat(a, b)).collect()).collect())
    }

    proptest::proptest! {
        #[test]
        fn det_is_multiplicative(a in matrix(3), b in matrix(3)) {
            proptest::prop_assert_eq!(det(&mul(&a, &b)), det(&a) * det(&b));
            proptest::prop_assert_eq!(det(&transpose(&a)), det(&a));
        }

        #[test]
        fn inverse_when_invertible(a in matrix(4)) {
            match inverse(&a) {
                Ok(inv) => proptest::prop_assert_eq!(mul(&a, &inv), identity(4)),
                Err(_) => proptest::prop_assert!(det(&a).is_zero()),
            }
        }
    }
}
