//! Coordinate systems and exact transforms between them.
//!
//! Three charts are in play:
//!  * full Darboux coordinates (q¹, q², p₁, p₂) on ℂ⁴,
//!  * reduced coordinates (q, ζ, v, ρ) with the fiber (u, θ) split off,
//!  * the cotangent chart (z¹, z², w₁, w₂) used by the Calabi metric.
//!
//! Conventions: u = q¹ + q̄¹, v = i(q̄¹ − q¹), q = q², ζ = p₂/p₁,
//! ρ = ln|p₁|², and θ = arg p₁ canonicalized to [0, 2π) so that
//! p₁ = e^{ρ/2} e^{iθ}.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullPoint {
    pub q1: Complex64,
    pub q2: Complex64,
    pub p1: Complex64,
    pub p2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub q: Complex64,
    pub zeta: Complex64,
    pub v: f64,
    pub rho: f64,
}

/// Fiber coordinates of the symmetry directions; θ is stored in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPoint {
    pub u: f64,
    theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalabiPoint {
    pub z1: Complex64,
    pub z2: Complex64,
    pub w1: Complex64,
    pub w2: Complex64,
}

impl FullPoint {
    pub fn new(q1: Complex64, q2: Complex64, p1: Complex64, p2: Complex64) -> Self {
        Self { q1, q2, p1, p2 }
    }

    /// Real slots in layout order (q¹, q², p₁, p₂) interleaved re/im.
    pub fn to_array(&self) -> [f64; 8] {
        [
            self.q1.re, self.q1.im, self.q2.re, self.q2.im, self.p1.re, self.p1.im,
            self.p2.re, self.p2.im,
        ]
    }

    pub fn from_array(x: &[f64; 8]) -> Self {
        Self {
            q1: Complex64::new(x[0], x[1]),
            q2: Complex64::new(x[2], x[3]),
            p1: Complex64::new(x[4], x[5]),
            p2: Complex64::new(x[6], x[7]),
        }
    }
}

impl ReducedPoint {
    pub fn new(q: Complex64, zeta: Complex64, v: f64, rho: f64) -> Self {
        Self { q, zeta, v, rho }
    }

    /// Real slots in layout order (q, ζ, v, ρ).
    pub fn to_array(&self) -> [f64; 6] {
        [self.q.re, self.q.im, self.zeta.re, self.zeta.im, self.v, self.rho]
    }

    pub fn from_array(x: &[f64; 6]) -> Self {
        Self {
            q: Complex64::new(x[0], x[1]),
            zeta: Complex64::new(x[2], x[3]),
            v: x[4],
            rho: x[5],
        }
    }
}

impl FiberPoint {
    pub fn new(u: f64, theta: f64) -> Self {
        Self {
            u,
            theta: theta.rem_euclid(TAU),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl CalabiPoint {
    pub fn new(z1: Complex64, z2: Complex64, w1: Complex64, w2: Complex64) -> Self {
        Self { z1, z2, w1, w2 }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.z1.re, self.z1.im, self.z2.re, self.z2.im, self.w1.re, self.w1.im,
            self.w2.re, self.w2.im,
        ]
    }
}

/// Splits a full point into reduced coordinates plus the fiber part.
/// Requires p₁ ≠ 0 (ζ and ρ are undefined otherwise).
pub fn full_to_reduced(p: &FullPoint) -> Result<(ReducedPoint, FiberPoint)> {
    if p.p1.norm_sqr() == 0.0 {
        return Err(Error::domain("p1 must be nonzero (zeta = p2/p1 undefined)"));
    }
    let u = 2.0 * p.q1.re;
    let v = 2.0 * p.q1.im; // i(q̄¹ − q¹) = 2 Im q¹
    let zeta = p.p2 / p.p1;
    let rho = p.p1.norm_sqr().ln();
    let theta = p.p1.arg();
    Ok((
        ReducedPoint::new(p.q2, zeta, v, rho),
        FiberPoint::new(u, theta),
    ))
}

pub fn reduced_to_full(r: &ReducedPoint, f: &FiberPoint) -> FullPoint {
    let q1 = 0.5 * Complex64::new(f.u, r.v);
    let p1 = (r.rho / 2.0).exp() * Complex64::from_polar(1.0, f.theta);
    FullPoint::new(q1, r.q, p1, p1 * r.zeta)
}

/// Passage to the cotangent chart: z¹ = e^{i(q¹−q²)}, z² = e^{i(q¹+q²)},
/// w₁ = (i/2)(p₂−p₁)e^{i(q²−q¹)}, w₂ = −(i/2)(p₁+p₂)e^{−i(q¹+q²)}.
pub fn darboux_to_calabi(p: &FullPoint) -> CalabiPoint {
    let i = Complex64::i();
    let z1 = (i * (p.q1 - p.q2)).exp();
    let z2 = (i * (p.q1 + p.q2)).exp();
    let w1 = 0.5 * i * (p.p2 - p.p1) * (i * (p.q2 - p.q1)).exp();
    let w2 = -0.5 * i * (p.p1 + p.p2) * (-i * (p.q1 + p.q2)).exp();
    CalabiPoint::new(z1, z2, w1, w2)
}

/// The three real moduli |z|², |w|², |Σ zʲwⱼ|² of the cotangent chart as
/// closed-form functions of the reduced coordinates alone. The cross term
/// is e^ρ identically.
pub fn calabi_reduced_moduli(r: &ReducedPoint) -> (f64, f64, f64) {
    let e2 = (2.0 * r.q.im).exp(); // e^{i(q̄−q)} = e^{2 Im q}
    let zsq = (-r.v).exp() * (e2 + 1.0 / e2);
    let one = Complex64::ONE;
    let wsq = 0.25
        * (r.rho + r.v).exp()
        * ((one - r.zeta).norm_sqr() / e2 + (one + r.zeta).norm_sqr() * e2);
    let cross = r.rho.exp();
    (zsq, wsq, cross)
}

/// The reduced coordinates (Re q, Im q, Re ζ, Im ζ, v, ρ) written as
/// expressions over the full layout (q¹, q², p₁, p₂). Substituting these
/// into a reduced field's expression realizes the pullback through the
/// projection; evaluation fails with a domain error where p₁ = 0.
pub fn reduced_from_full_exprs() -> [Expr; 6] {
    let p1 = Expr::complex_var(4, 5);
    let p2 = Expr::complex_var(6, 7);
    let zeta = p2 / p1.clone();
    let half = Expr::real(0.5);
    let neg_half_i = Expr::Const(Complex64::new(0.0, -0.5));
    [
        Expr::Var(2),                                              // Re q = Re q²
        Expr::Var(3),                                              // Im q = Im q²
        half * (zeta.clone() + zeta.clone().conj()),               // Re ζ
        neg_half_i * (zeta.clone() - zeta.conj()),                 // Im ζ
        Expr::real(2.0) * Expr::Var(1),                            // v = i(q̄¹−q¹) = 2 Im q¹
        p1.modulus_sq().ln(),                                      // ρ = ln|p₁|²
    ]
}

/// Sampling/domain box for the reduced chart, well inside the z¹, z² ≠ 0
/// cotangent chart: |Im q| ≤ 1, |ζ| ≤ 2, |v| ≤ 2, |ρ| ≤ 2 (Re q is
/// unconstrained by the chart; the box bounds it for sampling).
pub const SAFE_BOX_IM_Q: f64 = 1.0;
pub const SAFE_BOX_ZETA: f64 = 2.0;
pub const SAFE_BOX_V: f64 = 2.0;
pub const SAFE_BOX_RHO: f64 = 2.0;

pub fn in_safe_box(r: &ReducedPoint) -> bool {
    r.q.im.abs() <= SAFE_BOX_IM_Q
        && r.zeta.norm() <= SAFE_BOX_ZETA
        && r.v.abs() <= SAFE_BOX_V
        && r.rho.abs() <= SAFE_BOX_RHO
}

pub fn check_safe_box(r: &ReducedPoint) -> Result<()> {
    if in_safe_box(r) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "point outside the safe box (need |Im q| <= {SAFE_BOX_IM_Q}, |zeta| <= {SAFE_BOX_ZETA}, \
             |v| <= {SAFE_BOX_V}, |rho| <= {SAFE_BOX_RHO}; got Im q = {}, |zeta| = {}, v = {}, rho = {})",
            r.q.im,
            r.zeta.norm(),
            r.v,
            r.rho
        )))
    }
}
