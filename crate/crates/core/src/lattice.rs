//! Integer matrix routines: rank, determinantal divisors, kernels and saturation.
//!
//! Matrices are dense row-major `Vec<Vec<BigInt>>`; every row has the same length.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Matrix = Vec<Vec<BigInt>>;

pub fn from_i64(rows: &[Vec<i64>]) -> Matrix {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Diagonalizes by unimodular row and column operations.
///
/// Returns the absolute values of the nonzero diagonal entries. Their count is
/// the rank and their product is the gcd of the maximal nonvanishing minors.
pub fn diagonal_entries(mut m: Matrix) -> Vec<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut top = 0;
    while top < rows.min(cols) {
        // Smallest nonzero entry in the remaining block becomes the pivot.
        let mut pivot: Option<(usize, usize)> = None;
        for r in top..rows {
            for c in top..cols {
                if m[r][c].is_zero() {
                    continue;
                }
                match pivot {
                    Some((pr, pc)) if m[pr][pc].abs() <= m[r][c].abs() => {}
                    _ => pivot = Some((r, c)),
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        m.swap(top, pr);
        for row in m.iter_mut() {
            row.swap(top, pc);
        }
        loop {
            let p = m[top][top].clone();
            let mut clean = true;
            for r in top + 1..rows {
                if m[r][top].is_zero() {
                    continue;
                }
                let q = m[r][top].div_floor(&p);
                for c in top..cols {
                    let delta = &q * &m[top][c];
                    m[r][c] -= delta;
                }
                if !m[r][top].is_zero() {
                    clean = false;
                }
            }
            for c in top + 1..cols {
                if m[top][c].is_zero() {
                    continue;
                }
                let q = m[top][c].div_floor(&p);
                for r in top..rows {
                    let delta = &q * &m[r][top];
                    m[r][c] -= delta;
                }
                if !m[top][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
            // A remainder smaller than the pivot survived; move it into place.
            let mut best = (top, top);
            for r in top..rows {
                if !m[r][top].is_zero() && m[r][top].abs() < m[best.0][best.1].abs() {
                    best = (r, top);
                }
            }
            for c in top..cols {
                if !m[top][c].is_zero() && m[top][c].abs() < m[best.0][best.1].abs() {
                    best = (top, c);
                }
            }
            m.swap(top, best.0);
            for row in m.iter_mut() {
                row.swap(top, best.1);
            }
        }
        diag.push(m[top][top].abs());
        top += 1;
    }
    diag
}

pub fn rank(m: &Matrix) -> usize {
    diagonal_entries(m.clone()).len()
}

/// Index of the row lattice inside its saturation.
///
/// For independent rows this is `[Λ : L]` where `L` is spanned by the rows and
/// `Λ` is the set of integer points of their rational span.
pub fn saturation_index(m: &Matrix) -> BigInt {
    diagonal_entries(m.clone())
        .into_iter()
        .fold(BigInt::one(), |acc, d| acc * d)
}

/// `(g, x, y)` with `g = gcd(a, b) = x a + y b` and `g ≥ 0`.
fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// A basis of `{x ∈ Z^cols : m x = 0}`, as rows.
pub fn integer_kernel(m: &Matrix, cols: usize) -> Matrix {
    let mut a: Matrix = m.clone();
    // u tracks the column operations; its columns end up spanning the kernel.
    let mut u: Matrix = (0..cols)
        .map(|r| (0..cols).map(|c| if r == c { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut pivot = 0;
    for r in 0..a.len() {
        if pivot == cols {
            break;
        }
        for c in pivot + 1..cols {
            if a[r][c].is_zero() {
                continue;
            }
            let (g, x, y) = extended_gcd(&a[r][pivot], &a[r][c]);
            let ap = &a[r][pivot] / &g;
            let bc = &a[r][c] / &g;
            // [col_p, col_c] <- [x col_p + y col_c, -bc col_p + ap col_c]; determinant 1.
            let combine = |mat: &mut Matrix| {
                for row in mat.iter_mut() {
                    let p = row[pivot].clone();
                    let q = row[c].clone();
                    row[pivot] = &x * &p + &y * &q;
                    row[c] = &ap * &q - &bc * &p;
                }
            };
            combine(&mut a);
            combine(&mut u);
        }
        if !a[r][pivot].is_zero() {
            pivot += 1;
        }
    }
    (pivot..cols)
        .map(|c| u.iter().map(|row| row[c].clone()).collect())
        .collect()
}

/// A basis of the integer points in the rational row span of `m`.
pub fn saturation(m: &Matrix, cols: usize) -> Matrix {
    let kernel = integer_kernel(m, cols);
    if kernel.is_empty() {
        return identity(cols);
    }
    integer_kernel(&kernel, cols)
}

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|r| (0..n).map(|c| if r == c { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}
