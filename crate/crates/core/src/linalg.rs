//! Small exact linear solvers: reduced row echelon over the rationals and
//! integer systems via diagonalization (Smith form without the divisibility
//! chain, which solving does not need). Matrices here are a handful of rows,
//! so clarity wins over pivoting strategy.

use num::{Integer, Signed, Zero};

use crate::{qi, Q, Z};

/// In-place reduced row echelon form; returns the pivot column of each
/// pivot row.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] = &m[i][j] - &sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// A particular rational solution of `a x = b`, or `None` if inconsistent.
pub fn solve_rational(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.last() == Some(&cols) {
        return None; // pivot in the constants column
    }
    let mut x = vec![Q::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    Some(x)
}

/// Basis of the rational kernel of `a`.
pub fn kernel_basis(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Q>> = a.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = qi(1);
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

struct Diag {
    s: Vec<Vec<Z>>,
    u: Vec<Vec<Z>>, // row ops accumulated: s = u * a * v
    v: Vec<Vec<Z>>,
}

fn identity(n: usize) -> Vec<Vec<Z>> {
    (0..n)
        .map(|i| (0..n).map(|j| Z::from((i == j) as i64)).collect())
        .collect()
}

/// Diagonalize an integer matrix by unimodular row and column operations.
fn diagonalize(a: &[Vec<Z>]) -> Diag {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut d = Diag {
        s: a.to_vec(),
        u: identity(rows),
        v: identity(cols),
    };
    let n = rows.min(cols);
    for k in 0..n {
        loop {
            // Smallest nonzero entry in the remaining block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if !d.s[i][j].is_zero()
                        && best
                            .map(|(bi, bj)| d.s[i][j].abs() < d.s[bi][bj].abs())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return d;
            };
            d.s.swap(k, bi);
            d.u.swap(k, bi);
            for row in d.s.iter_mut() {
                row.swap(k, bj);
            }
            for row in d.v.iter_mut() {
                row.swap(k, bj);
            }
            let mut clean = true;
            for i in k + 1..rows {
                if d.s[i][k].is_zero() {
                    continue;
                }
                let q = d.s[i][k].div_floor(&d.s[k][k]);
                for j in 0..cols {
                    let sub = &q * &d.s[k][j];
                    d.s[i][j] = &d.s[i][j] - &sub;
                }
                for j in 0..rows {
                    let sub = &q * &d.u[k][j];
                    d.u[i][j] = &d.u[i][j] - &sub;
                }
                if !d.s[i][k].is_zero() {
                    clean = false;
                }
            }
            for j in k + 1..cols {
                if d.s[k][j].is_zero() {
                    continue;
                }
                let q = d.s[k][j].div_floor(&d.s[k][k]);
                for i in 0..rows {
                    let sub = &q * &d.s[i][k];
                    d.s[i][j] = &d.s[i][j] - &sub;
                }
                for i in 0..cols {
                    let sub = &q * &d.v[i][k];
                    d.v[i][j] = &d.v[i][j] - &sub;
                }
                if !d.s[k][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
    }
    d
}

/// An integer solution of `a x = c`, or `None` when none exists.
pub fn solve_integer(a: &[Vec<Z>], c: &[Z]) -> Option<Vec<Z>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    if rows == 0 {
        return Some(Vec::new());
    }
    let d = diagonalize(a);
    // s y = u c, then x = v y.
    let uc: Vec<Z> = (0..rows)
        .map(|i| (0..rows).map(|j| &d.u[i][j] * &c[j]).sum())
        .collect();
    let mut y = vec![Z::zero(); cols];
    for i in 0..rows {
        let s = if i < cols { d.s[i][i].clone() } else { Z::zero() };
        if s.is_zero() {
            if !uc[i].is_zero() {
                return None;
            }
        } else {
            let (q, r) = uc[i].div_rem(&s);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(
        (0..cols)
            .map(|i| (0..cols).map(|j| &d.v[i][j] * &y[j]).sum())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn zi(n: i64) -> Z {
        Z::from(n)
    }

    #[test]
    fn rational_solving() {
        // x + y = 3, x - y = 1
        let a = vec![vec![qi(1), qi(1)], vec![qi(1), qi(-1)]];
        let x = solve_rational(&a, &[qi(3), qi(1)]).unwrap();
        assert_eq!(x, vec![qi(2), qi(1)]);
        // inconsistent
        let b = vec![vec![qi(1), qi(1)], vec![qi(2), qi(2)]];
        assert!(solve_rational(&b, &[qi(1), qi(3)]).is_none());
        // underdetermined: a particular solution still satisfies the system
        let c = vec![vec![qi(1), qi(1), qi(1)]];
        let x = solve_rational(&c, &[qi(5)]).unwrap();
        assert_eq!(&x[0] + &(&x[1] + &x[2]), qi(5));
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let a = vec![vec![qi(1), qi(1), qi(1)], vec![qi(2), qi(2), qi(2)]];
        let k = kernel_basis(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            let dot: Q = (0..3).map(|i| &a[0][i] * &v[i]).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn integer_solving_exact_cases() {
        // 2x = 3 has no integer solution
        assert!(solve_integer(&[vec![zi(2)]], &[zi(3)]).is_none());
        // 2x = 6 does
        assert_eq!(solve_integer(&[vec![zi(2)]], &[zi(6)]), Some(vec![zi(3)]));
        // 3x + 5y = 1 (coprime)
        let x = solve_integer(&[vec![zi(3), zi(5)]], &[zi(1)]).unwrap();
        assert_eq!(zi(3) * &x[0] + zi(5) * &x[1], zi(1));
        // 2x + 4y = 5 impossible mod 2
        assert!(solve_integer(&[vec![zi(2), zi(4)]], &[zi(5)]).is_none());
    }

    #[test]
    fn integer_solving_random_consistent_systems() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let rows = rng.gen_range(1..4);
            let cols = rng.gen_range(1..4);
            let a: Vec<Vec<Z>> = (0..rows)
                .map(|_| (0..cols).map(|_| zi(rng.gen_range(-6..=6))).collect())
                .collect();
            let x0: Vec<Z> = (0..cols).map(|_| zi(rng.gen_range(-5..=5))).collect();
            let c: Vec<Z> = (0..rows)
                .map(|i| (0..cols).map(|j| &a[i][j] * &x0[j]).sum())
                .collect();
            let x = solve_integer(&a, &c).expect("consistent by construction");
            for i in 0..rows {
                let got: Z = (0..cols).map(|j| &a[i][j] * &x[j]).sum();
                assert_eq!(got, c[i]);
            }
        }
    }
}
