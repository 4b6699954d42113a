//! Gauss–Legendre ordinates on `[-1, 1]` and the angular averages
//! `<n^k f> = 1/2 sum_m w_m n_m^k f_m`.
//!
//! Nodes are stored in increasing order and built by mirroring the positive
//! roots, so `n[M-1-m] == -n[m]` and `w[M-1-m] == w[m]` hold bit-for-bit.
//! Moments are summed over mirrored pairs, which makes odd moments of even
//! data vanish exactly rather than to rounding.

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `0.5 * w_m * n_m^k` for k = 0..=3.
    scaled: [Vec<f64>; 4],
}

/// Legendre `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub fn build_quadrature(order: usize) -> Result<Quadrature> {
    if order < 2 || !order.is_multiple_of(2) {
        return Err(Error::invalid(format!("quadrature order must be even and >= 2, got {order}")));
    }
    let half = order / 2;
    let mut pos_nodes = Vec::with_capacity(half);
    let mut pos_weights = Vec::with_capacity(half);
    for i in 1..=half {
        // Tricomi's initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(order, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(order, x);
        pos_nodes.push(x);
        pos_weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    // pos_nodes is decreasing; lay out [-largest .. -smallest, smallest .. largest].
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for k in 0..half {
        nodes.push(-pos_nodes[k]);
        weights.push(pos_weights[k]);
    }
    for k in (0..half).rev() {
        nodes.push(pos_nodes[k]);
        weights.push(pos_weights[k]);
    }
    let scaled =
        std::array::from_fn(|k| nodes.iter().zip(&weights).map(|(&n, &w)| 0.5 * w * n.powi(k as i32)).collect());
    Ok(Quadrature { order, nodes, weights, scaled })
}

impl Default for Quadrature {
    fn default() -> Self {
        build_quadrature(DEFAULT_ORDER).expect("default order is valid")
    }
}

impl Quadrature {
    pub fn half(&self) -> usize {
        self.order / 2
    }

    /// `0.5 * w_m * n_m^k`.
    #[inline]
    pub fn scaled_weight(&self, k: usize, m: usize) -> f64 {
        self.scaled[k][m]
    }

    /// Index pairs `(positive, mirrored negative)` ordered by increasing `|n|`.
    pub fn mirrored_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let h = self.half();
        (0..h).map(move |k| (h + k, h - 1 - k))
    }

    /// `<n^k f>` without argument checks.
    #[inline]
    pub fn moment_unchecked(&self, values: &[f64], k: usize) -> f64 {
        let s = &self.scaled[k];
        let h = self.order / 2;
        let mut acc = 0.0;
        for j in 0..h {
            let (p, q) = (h + j, h - 1 - j);
            acc += s[p] * values[p] + s[q] * values[q];
        }
        acc
    }

    pub fn moment(&self, values: &[f64], k: usize) -> Result<f64> {
        if values.len() != self.order {
            return Err(Error::invalid(format!("moment needs {} values, got {}", self.order, values.len())));
        }
        if k > 3 {
            return Err(Error::invalid(format!("moment order must be 0..=3, got {k}")));
        }
        Ok(self.moment_unchecked(values, k))
    }

    /// `1/2 sum_{n_m > 0} w_m n_m^k f(m)`, summed in the same order as
    /// [`Self::negative_half`] so mirrored data cancels exactly.
    #[inline]
    pub fn positive_half(&self, k: usize, f: impl Fn(usize) -> f64) -> f64 {
        let h = self.half();
        let s = &self.scaled[k];
        (0..h).fold(0.0, |acc, j| acc + s[h + j] * f(h + j))
    }

    #[inline]
    pub fn negative_half(&self, k: usize, f: impl Fn(usize) -> f64) -> f64 {
        let h = self.half();
        let s = &self.scaled[k];
        (0..h).fold(0.0, |acc, j| acc + s[h - 1 - j] * f(h - 1 - j))
    }
}
