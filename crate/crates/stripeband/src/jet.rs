//! Second-order complex jets: exact first and second partial derivatives of
//! polynomial expressions in a fixed set of variables.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

/// Number of independent variables carried by a [`Jet`].
pub const NV: usize = 5;

/// Value, gradient and Hessian of a function of `NV` complex variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub g: [Complex64; NV],
    pub h: [[Complex64; NV]; NV],
}

const Z: Complex64 = Complex64::new(0.0, 0.0);

impl Jet {
    pub fn constant(v: Complex64) -> Self {
        Jet { v, g: [Z; NV], h: [[Z; NV]; NV] }
    }

    pub fn real(v: f64) -> Self {
        Self::constant(Complex64::new(v, 0.0))
    }

    /// The independent variable with index `i`, evaluated at `v`.
    pub fn variable(i: usize, v: Complex64) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = Complex64::new(1.0, 0.0);
        j
    }

    pub fn scale(self, s: Complex64) -> Self {
        let mut out = self;
        out.v *= s;
        for i in 0..NV {
            out.g[i] *= s;
            for k in 0..NV {
                out.h[i][k] *= s;
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for i in 0..NV {
            self.g[i] += o.g[i];
            for k in 0..NV {
                self.h[i][k] += o.h[i][k];
            }
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..NV {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for k in 0..NV {
                out.h[i][k] = self.v * o.h[i][k]
                    + o.v * self.h[i][k]
                    + self.g[i] * o.g[k]
                    + o.g[i] * self.g[k];
            }
        }
        out
    }
}
