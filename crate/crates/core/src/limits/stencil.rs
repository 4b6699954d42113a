//! Three-point stencil systems: one generic residual per cell, exact block
//! Jacobians from dual numbers.

use std::marker::PhantomData;

use rayon::prelude::*;

use crate::dual::{Acc, Dual, Scalar};
use crate::linalg::Mat;
use crate::newton::BlockSystem;

const MIN_PAR: usize = 64;

pub(crate) trait CellStencil<const N: usize>: Sync {
    /// Residual rows of cell `i` from `[left, centre, right]`.
    fn cell<T: Scalar>(&self, i: usize, s: [[T; N]; 3]) -> [Acc<T>; N];

    /// Fixed ghost values beyond the left and right walls.
    fn ghosts(&self) -> [[f64; N]; 2];

    fn admissible(&self, x: &[f64; N]) -> bool;
}

/// Adapts a stencil to the Newton solver; `M` must equal `3 N`.
pub(crate) struct StencilSystem<'a, S, const M: usize> {
    inner: &'a S,
    _m: PhantomData<[(); M]>,
}

impl<'a, S, const M: usize> StencilSystem<'a, S, M> {
    pub fn new(inner: &'a S) -> Self {
        StencilSystem { inner, _m: PhantomData }
    }
}

/// `None` where the stencil reaches past a wall.
fn neighbours<const N: usize>(x: &[[f64; N]], i: usize) -> [Option<[f64; N]>; 3] {
    let left = if i == 0 { None } else { Some(x[i - 1]) };
    let right = x.get(i + 1).copied();
    [left, Some(x[i]), right]
}

impl<S, const N: usize, const M: usize> BlockSystem<N> for StencilSystem<'_, S, M>
where
    S: CellStencil<N>,
{
    fn residual(&self, x: &[[f64; N]], r: &mut [[f64; N]], scale: &mut [[f64; N]]) {
        let g = self.inner.ghosts();
        r.par_iter_mut().zip(scale.par_iter_mut()).enumerate().with_min_len(MIN_PAR).for_each(|(i, (ri, si))| {
            let nb = neighbours(x, i);
            let s = [nb[0].unwrap_or(g[0]), x[i], nb[2].unwrap_or(g[1])];
            let acc = self.inner.cell(i, s);
            for k in 0..N {
                ri[k] = acc[k].v;
                si[k] = acc[k].m;
            }
        });
    }

    fn jacobian(&self, x: &[[f64; N]], lower: &mut [Mat<N>], diag: &mut [Mat<N>], upper: &mut [Mat<N>]) {
        assert_eq!(M, 3 * N, "stencil dual width must be three blocks");
        let g = self.inner.ghosts();
        lower
            .par_iter_mut()
            .zip(diag.par_iter_mut())
            .zip(upper.par_iter_mut())
            .enumerate()
            .with_min_len(MIN_PAR)
            .for_each(|(i, ((lo, d), up))| {
                let nb = neighbours(x, i);
                let s: [[Dual<M>; N]; 3] = std::array::from_fn(|j| {
                    std::array::from_fn(|k| match nb[j] {
                        Some(v) => Dual::var(v[k], j * N + k),
                        None => Dual::cst(g[j / 2][k]),
                    })
                });
                let acc = self.inner.cell(i, s);
                for row in 0..N {
                    for k in 0..N {
                        lo[row][k] = acc[row].v.d[k];
                        d[row][k] = acc[row].v.d[N + k];
                        up[row][k] = acc[row].v.d[2 * N + k];
                    }
                }
            });
    }

    fn admissible(&self, x: &[[f64; N]]) -> bool {
        x.iter().all(|c| c.iter().all(|v| v.is_finite()) && self.inner.admissible(c))
    }
}
