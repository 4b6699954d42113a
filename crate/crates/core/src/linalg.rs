//! Small dense LU and block-tridiagonal elimination for the implicit solves.

pub type Mat<const N: usize> = [[f64; N]; N];

/// Row-pivoted LU factors of an `N x N` matrix.
#[derive(Debug, Clone, Copy)]
pub struct Lu<const N: usize> {
    lu: Mat<N>,
    perm: [usize; N],
}

impl<const N: usize> Lu<N> {
    /// Returns `None` when a pivot vanishes or is not finite.
    pub fn new(a: &Mat<N>) -> Option<Self> {
        let mut lu = *a;
        let mut perm = [0usize; N];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        for k in 0..N {
            let mut piv = k;
            let mut best = lu[k][k].abs();
            for (i, row) in lu.iter().enumerate().skip(k + 1) {
                if row[k].abs() > best {
                    best = row[k].abs();
                    piv = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return None;
            }
            if piv != k {
                lu.swap(piv, k);
                perm.swap(piv, k);
            }
            let inv = 1.0 / lu[k][k];
            for i in (k + 1)..N {
                let f = lu[i][k] * inv;
                lu[i][k] = f;
                if f != 0.0 {
                    for j in (k + 1)..N {
                        lu[i][j] -= f * lu[k][j];
                    }
                }
            }
        }
        Some(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64; N]) -> [f64; N] {
        let mut x = [0.0; N];
        for i in 0..N {
            x[i] = b[self.perm[i]];
        }
        for i in 0..N {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..N).rev() {
            let mut s = x[i];
            for j in (i + 1)..N {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s / self.lu[i][i];
        }
        x
    }

    /// `A^{-1} B` column by column.
    pub fn solve_mat(&self, b: &Mat<N>) -> Mat<N> {
        let mut out = [[0.0; N]; N];
        for j in 0..N {
            let col: [f64; N] = std::array::from_fn(|i| b[i][j]);
            let x = self.solve(&col);
            for i in 0..N {
                out[i][j] = x[i];
            }
        }
        out
    }
}

pub fn mat_vec<const N: usize>(a: &Mat<N>, x: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| (0..N).map(|j| a[i][j] * x[j]).sum())
}

fn mat_mul<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> Mat<N> {
    let mut c = [[0.0; N]; N];
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..N {
                    c[i][j] += aik * b[k][j];
                }
            }
        }
    }
    c
}

/// Solves the block-tridiagonal system in place (`rhs` becomes the solution).
/// `lower[i]` couples row `i` to unknown `i-1` (`lower[0]` unused) and
/// `upper[i]` couples row `i` to unknown `i+1` (`upper[n-1]` unused).
/// No pivoting across blocks; returns `None` on a singular diagonal block.
pub fn solve_block_tridiagonal<const N: usize>(
    lower: &[Mat<N>],
    diag: &[Mat<N>],
    upper: &[Mat<N>],
    rhs: &mut [[f64; N]],
) -> Option<()> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Some(());
    }
    let mut c_prime: Vec<Mat<N>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut d = diag[i];
        if i > 0 {
            let lc = mat_mul(&lower[i], &c_prime[i - 1]);
            let lg = mat_vec(&lower[i], &rhs[i - 1]);
            for r in 0..N {
                for c in 0..N {
                    d[r][c] -= lc[r][c];
                }
                rhs[i][r] -= lg[r];
            }
        }
        let lu = Lu::new(&d)?;
        rhs[i] = lu.solve(&rhs[i]);
        c_prime.push(if i + 1 < n { lu.solve_mat(&upper[i]) } else { [[0.0; N]; N] });
    }
    for i in (0..n.saturating_sub(1)).rev() {
        let cx = mat_vec(&c_prime[i], &rhs[i + 1]);
        for r in 0..N {
            rhs[i][r] -= cx[r];
        }
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_with_pivoting() {
        let a = [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]];
        let x = [1.0, -2.0, 0.5];
        let b = mat_vec(&a, &x);
        let got = Lu::new(&a).unwrap().solve(&b);
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-14);
        }
        assert!(Lu::new(&[[1.0, 2.0], [2.0, 4.0]]).is_none());
    }

    #[test]
    fn block_tridiagonal_matches_dense() {
        // Assemble a random diagonally dominant 5-block system with 2x2 blocks.
        let n = 5;
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut lower = vec![[[0.0; 2]; 2]; n];
        let mut diag = vec![[[0.0; 2]; 2]; n];
        let mut upper = vec![[[0.0; 2]; 2]; n];
        for i in 0..n {
            for r in 0..2 {
                for c in 0..2 {
                    lower[i][r][c] = rnd();
                    upper[i][r][c] = rnd();
                    diag[i][r][c] = rnd() + if r == c { 4.0 } else { 0.0 };
                }
            }
        }
        let x: Vec<[f64; 2]> = (0..n).map(|_| [rnd(), rnd()]).collect();
        let mut b = vec![[0.0; 2]; n];
        for i in 0..n {
            b[i] = mat_vec(&diag[i], &x[i]);
            if i > 0 {
                let l = mat_vec(&lower[i], &x[i - 1]);
                b[i][0] += l[0];
                b[i][1] += l[1];
            }
            if i + 1 < n {
                let u = mat_vec(&upper[i], &x[i + 1]);
                b[i][0] += u[0];
                b[i][1] += u[1];
            }
        }
        solve_block_tridiagonal(&lower, &diag, &upper, &mut b).unwrap();
        for i in 0..n {
            for r in 0..2 {
                assert!((b[i][r] - x[i][r]).abs() < 1e-13);
            }
        }
    }
}
