//! The radial communication kernel `P(r) = (1 + r²)^(-κ)`.
//!
//! Everything is parameterized by the squared distance, so the gradient
//! with respect to the position difference is smooth at the origin.

/// Kernel value at squared distance `r_squared`.
pub fn kernel(r_squared: f64, kappa: f64) -> f64 {
    CommKernel::new(kappa).value(r_squared)
}

/// Gradient of `x ↦ P(‖x - y‖)` at `diff = x - y`.
pub fn kernel_gradient(diff: &[f64], kappa: f64) -> Vec<f64> {
    let r2 = diff.iter().map(|c| c * c).sum();
    let (_, slope) = CommKernel::new(kappa).value_and_slope(r2);
    diff.iter().map(|c| slope * c).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Exponent {
    One,
    Integer(i32),
    Real(f64),
}

/// Kernel with the exponent pre-classified so the common `κ = 1` case
/// avoids `powf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommKernel {
    kappa: f64,
    exponent: Exponent,
}

impl CommKernel {
    pub fn new(kappa: f64) -> Self {
        let exponent = if kappa == 1.0 {
            Exponent::One
        } else if kappa.fract() == 0.0 && kappa.abs() <= 64.0 {
            Exponent::Integer(kappa as i32)
        } else {
            Exponent::Real(kappa)
        };
        CommKernel { kappa, exponent }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    #[inline]
    pub fn value(&self, r_squared: f64) -> f64 {
        let s = 1.0 + r_squared;
        match self.exponent {
            Exponent::One => 1.0 / s,
            Exponent::Integer(k) => s.powi(-k),
            Exponent::Real(k) => s.powf(-k),
        }
    }

    /// Returns `(P, c)` with `∇P(diff) = c · diff`, i.e.
    /// `c = -2κ (1 + r²)^(-κ-1)`.
    #[inline]
    pub fn value_and_slope(&self, r_squared: f64) -> (f64, f64) {
        let s = 1.0 + r_squared;
        let p = self.value(r_squared);
        (p, -2.0 * self.kappa * p / s)
    }
}
