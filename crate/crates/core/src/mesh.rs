/// Uniform cell-centered mesh on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub a: f64,
    pub b: f64,
    pub nx: usize,
    pub dx: f64,
}

impl Mesh1D {
    pub fn new(a: f64, b: f64, nx: usize) -> crate::Result<Self> {
        if !(b > a) || nx == 0 || !a.is_finite() || !b.is_finite() {
            return Err(crate::Error::invalid(format!("mesh needs a < b and nx > 0 (got [{a}, {b}], nx={nx})")));
        }
        Ok(Mesh1D { a, b, nx, dx: (b - a) / nx as f64 })
    }

    /// `x_{i-1/2}` for `i = 0..=nx` (interface 0 is the left wall).
    pub fn interface(&self, i: usize) -> f64 {
        if i == self.nx {
            self.b
        } else {
            self.a + i as f64 * self.dx
        }
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.interface(i) + self.interface(i + 1))
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.center(i)).collect()
    }

    pub fn interfaces(&self) -> Vec<f64> {
        (0..=self.nx).map(|i| self.interface(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates() {
        let m = Mesh1D::new(-1.0, 1.0, 8).unwrap();
        assert_eq!(m.interfaces().len(), 9);
        assert_eq!(m.interface(0), -1.0);
        assert_eq!(m.interface(8), 1.0);
        assert_eq!(m.dx, 0.25);
        for i in 0..8 {
            assert_eq!(m.center(i), 0.5 * (m.interface(i) + m.interface(i + 1)));
            assert!(m.interface(i + 1) > m.interface(i));
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Mesh1D::new(1.0, 1.0, 4).is_err());
        assert!(Mesh1D::new(0.0, 1.0, 0).is_err());
    }
}
