//! Built-in Kähler potentials and gauge shifts.
//!
//! A [`Potential`] is a named real-valued scalar field over one of the three
//! coordinate systems, expressed in the closed expression vocabulary so that
//! jets of any order are exact. The built-ins are the flat potential, its
//! gauge-shifted variant, the flat reduced potential, the Calabi potential
//! on the cotangent chart and its reduced form.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::coords::{check_safe_box, ReducedPoint};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::{Jet, RealCoordsLayout, ScalarField};

/// Which chart a field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordSystem {
    /// (q, ζ, v, ρ): slots (q_re, q_im, zeta_re, zeta_im, v, rho).
    Reduced,
    /// (q¹, q², p₁, p₂): interleaved re/im slots.
    Full,
    /// (z¹, z², w₁, w₂): interleaved re/im slots.
    Calabi,
}

pub mod reduced_idx {
    pub const Q_RE: usize = 0;
    pub const Q_IM: usize = 1;
    pub const Z_RE: usize = 2;
    pub const Z_IM: usize = 3;
    pub const V: usize = 4;
    pub const RHO: usize = 5;
}

impl CoordSystem {
    pub fn dim(&self) -> usize {
        match self {
            CoordSystem::Reduced => 6,
            CoordSystem::Full | CoordSystem::Calabi => 8,
        }
    }

    pub fn layout(&self) -> &'static RealCoordsLayout {
        static REDUCED: OnceLock<RealCoordsLayout> = OnceLock::new();
        static FULL: OnceLock<RealCoordsLayout> = OnceLock::new();
        static CALABI: OnceLock<RealCoordsLayout> = OnceLock::new();
        match self {
            CoordSystem::Reduced => REDUCED.get_or_init(|| {
                RealCoordsLayout::new(
                    &["q_re", "q_im", "zeta_re", "zeta_im", "v", "rho"],
                    &[(0, 1), (2, 3)],
                )
                .expect("static layout")
            }),
            CoordSystem::Full => FULL.get_or_init(|| {
                RealCoordsLayout::new(
                    &[
                        "q1_re", "q1_im", "q2_re", "q2_im", "p1_re", "p1_im", "p2_re",
                        "p2_im",
                    ],
                    &[(0, 1), (2, 3), (4, 5), (6, 7)],
                )
                .expect("static layout")
            }),
            CoordSystem::Calabi => CALABI.get_or_init(|| {
                RealCoordsLayout::new(
                    &[
                        "z1_re", "z1_im", "z2_re", "z2_im", "w1_re", "w1_im", "w2_re",
                        "w2_im",
                    ],
                    &[(0, 1), (2, 3), (4, 5), (6, 7)],
                )
                .expect("static layout")
            }),
        }
    }
}

/// Domain predicate attached to a potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    All,
    /// Reduced safe box (see [`crate::coords::check_safe_box`]).
    SafeBox,
    /// p₁ ≠ 0, for potentials pulled back through the reduction.
    P1Nonzero,
}

impl Domain {
    pub fn description(&self) -> &'static str {
        match self {
            Domain::All => "entire chart",
            Domain::SafeBox => "reduced safe box |Im q| <= 1, |zeta| <= 2, |v| <= 2, |rho| <= 2",
            Domain::P1Nonzero => "p1 != 0",
        }
    }

    fn check(&self, coords: CoordSystem, point: &[f64]) -> Result<()> {
        match self {
            Domain::All => Ok(()),
            Domain::SafeBox => {
                debug_assert_eq!(coords, CoordSystem::Reduced);
                let arr: [f64; 6] = point.try_into().map_err(|_| {
                    Error::invalid("reduced point must have 6 real coordinates")
                })?;
                check_safe_box(&ReducedPoint::from_array(&arr))
            }
            Domain::P1Nonzero => {
                let p1 = Complex64::new(point[4], point[5]);
                if p1.norm_sqr() == 0.0 {
                    Err(Error::domain("p1 must be nonzero"))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// A named scalar field with a jet-evaluation contract over one chart.
#[derive(Debug, Clone)]
pub struct Potential {
    name: String,
    coords: CoordSystem,
    domain: Domain,
    expr: Expr,
}

impl Potential {
    pub fn new(name: impl Into<String>, coords: CoordSystem, domain: Domain, expr: Expr) -> Self {
        Self {
            name: name.into(),
            coords,
            domain,
            expr,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> CoordSystem {
        self.coords
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl ScalarField for Potential {
    fn layout(&self) -> &RealCoordsLayout {
        self.coords.layout()
    }

    fn eval_jet(&self, point: &[f64], order: u8) -> Result<Jet> {
        if point.len() != self.coords.dim() {
            return Err(Error::invalid(format!(
                "potential {} expects {} real coordinates, got {}",
                self.name,
                self.coords.dim(),
                point.len()
            )));
        }
        self.domain.check(self.coords, point)?;
        self.expr.eval(point, order)
    }
}

fn full_q1() -> Expr {
    Expr::complex_var(0, 1)
}
fn full_q2() -> Expr {
    Expr::complex_var(2, 3)
}
fn full_p1() -> Expr {
    Expr::complex_var(4, 5)
}
fn full_p2() -> Expr {
    Expr::complex_var(6, 7)
}

/// Ω = |q¹|² + |q²|² + |p₁|² + |p₂|².
pub fn flat_omega() -> Potential {
    let expr = full_q1().modulus_sq()
        + full_q2().modulus_sq()
        + full_p1().modulus_sq()
        + full_p2().modulus_sq();
    Potential::new("flat-omega", CoordSystem::Full, Domain::All, expr)
}

/// Ω′ = Ω − ½(q¹)² − ½(q̄¹)², the gauge shift that removes the u-dependence.
pub fn flat_omega_prime() -> Potential {
    let mut p = apply_gauge(&flat_omega(), &GaugeFunction::monomial(-0.5, [2, 0, 0, 0]));
    p.name = "flat-omega-prime".to_string();
    p
}

/// H(q, ζ, v, ρ) = ½v² + |q|² + e^ρ(1 + |ζ|²).
pub fn flat_h() -> Potential {
    use reduced_idx::*;
    let q = Expr::complex_var(Q_RE, Q_IM);
    let zeta = Expr::complex_var(Z_RE, Z_IM);
    let expr = Expr::real(0.5) * Expr::Var(V).powi(2)
        + q.modulus_sq()
        + Expr::Var(RHO).exp() * (Expr::real(1.0) + zeta.modulus_sq());
    Potential::new("flat-H", CoordSystem::Reduced, Domain::All, expr)
}

/// The Calabi potential Ω = log(1+|z|²) + √(1+4t) − log(1+√(1+4t)) with
/// t = (1+|z|²)(|w|² + |Σ zʲwⱼ|²), over the cotangent chart.
pub fn calabi_omega_full() -> Potential {
    let z1 = Expr::complex_var(0, 1);
    let z2 = Expr::complex_var(2, 3);
    let w1 = Expr::complex_var(4, 5);
    let w2 = Expr::complex_var(6, 7);
    let zsq = z1.clone().modulus_sq() + z2.clone().modulus_sq();
    let wsq = w1.clone().modulus_sq() + w2.clone().modulus_sq();
    let cross = (z1 * w1 + z2 * w2).modulus_sq();
    let t = (Expr::real(1.0) + zsq.clone()) * (wsq + cross);
    let root = (Expr::real(1.0) + Expr::real(4.0) * t).sqrt();
    let expr = (Expr::real(1.0) + zsq).ln() + root.clone()
        - (Expr::real(1.0) + root).ln();
    Potential::new("calabi-omega", CoordSystem::Calabi, Domain::All, expr)
}

/// The Calabi potential as a function of the reduced coordinates alone,
/// through the closed-form moduli |z|², |w|², |Σ zʲwⱼ|². Restricted to the
/// safe box.
pub fn calabi_h_reduced() -> Potential {
    use reduced_idx::*;
    let one = || Expr::real(1.0);
    let e2 = (Expr::real(2.0) * Expr::Var(Q_IM)).exp();
    let em2 = (Expr::real(-2.0) * Expr::Var(Q_IM)).exp();
    let zeta = Expr::complex_var(Z_RE, Z_IM);
    let zsq = (-Expr::Var(V)).exp() * (e2.clone() + em2.clone());
    let wsq = Expr::real(0.25)
        * (Expr::Var(RHO) + Expr::Var(V)).exp()
        * ((one() - zeta.clone()).modulus_sq() * em2 + (one() + zeta).modulus_sq() * e2);
    let cross = Expr::Var(RHO).exp();
    let t = (one() + zsq.clone()) * (wsq + cross);
    let root = (one() + Expr::real(4.0) * t).sqrt();
    let expr = (one() + zsq).ln() + root.clone() - (one() + root).ln();
    Potential::new("calabi-H", CoordSystem::Reduced, Domain::SafeBox, expr)
}

/// A holomorphic polynomial F(q¹, q², p₁, p₂) given by coefficients; it
/// depends only on the holomorphic coordinates by construction.
#[derive(Debug, Clone, Default)]
pub struct GaugeFunction {
    /// (coefficient, exponents of q¹, q², p₁, p₂).
    terms: Vec<(Complex64, [u32; 4])>,
}

impl GaugeFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coeff: impl Into<Complex64>, exponents: [u32; 4]) -> Self {
        Self {
            terms: vec![(coeff.into(), exponents)],
        }
    }

    pub fn push(&mut self, coeff: Complex64, exponents: [u32; 4]) {
        self.terms.push((coeff, exponents));
    }

    pub fn to_expr(&self) -> Expr {
        let vars = [full_q1(), full_q2(), full_p1(), full_p2()];
        let mut total = Expr::Const(Complex64::ZERO);
        for (coeff, exps) in &self.terms {
            let mut term = Expr::Const(*coeff);
            for (var, &e) in vars.iter().zip(exps) {
                if e > 0 {
                    term = term * var.clone().powi(e);
                }
            }
            total = total + term;
        }
        total
    }
}

/// Ω ↦ Ω + F + F̄ for a holomorphic F; still real-valued.
pub fn apply_gauge(base: &Potential, f: &GaugeFunction) -> Potential {
    assert_eq!(
        base.coords,
        CoordSystem::Full,
        "gauge shifts act on potentials over full coordinates"
    );
    let fe = f.to_expr();
    let expr = base.expr.clone() + fe.clone() + fe.conj();
    Potential::new(
        format!("{}-gauged", base.name),
        CoordSystem::Full,
        base.domain.clone(),
        expr,
    )
}

/// Stable CLI identifiers for the built-ins.
pub fn potential_by_name(name: &str) -> Option<Potential> {
    match name {
        "flat-omega" => Some(flat_omega()),
        "flat-omega-prime" => Some(flat_omega_prime()),
        "flat-H" => Some(flat_h()),
        "calabi-omega" => Some(calabi_omega_full()),
        "calabi-H" => Some(calabi_h_reduced()),
        _ => None,
    }
}

pub const POTENTIAL_NAMES: [&str; 5] = [
    "flat-omega",
    "flat-omega-prime",
    "flat-H",
    "calabi-omega",
    "calabi-H",
];

/// Complex Hessian ∂²Ω/∂zᵅ∂z̄ᵝ over the declared complex coordinates.
pub fn complex_hessian(field: &dyn ScalarField, point: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let jet = field.eval_jet(point, 2)?;
    let view = crate::jets::WirtingerView::new(&jet, field.layout());
    let n = field.layout().complex_pairs().len();
    let mut h = vec![vec![Complex64::ZERO; n]; n];
    for a in 0..n {
        for b in 0..n {
            h[a][b] = view.second(a, false, b, true);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::{darboux_to_calabi, reduced_to_full, FiberPoint, ReducedPoint};
    use crate::jets::WirtingerView;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_reduced() -> Vec<ReducedPoint> {
        let mut pts = Vec::new();
        for k in 0..20 {
            let t = k as f64 / 19.0 * 2.0 - 1.0;
            pts.push(ReducedPoint::new(
                c(0.8 * t, 0.5 * t * t - 0.3),
                c(-0.6 * t, 0.7 * t),
                0.9 * t,
                -0.8 * t,
            ));
        }
        pts
    }

    #[test]
    fn flat_omega_unit_point() {
        let p = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let v = flat_omega().eval_value(&p).unwrap();
        assert!((v - c(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn flat_h_spec_value() {
        // q = 1, zeta = 0, v = 2, rho = 0: 1/2*4 + 1 + 1 = 4
        let v = flat_h()
            .eval_value(&[1.0, 0.0, 0.0, 0.0, 2.0, 0.0])
            .unwrap();
        assert!((v - c(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn flat_h_zeta_zetabar_second_derivative() {
        // H_{ζζ̄} = e^ρ = 2 at ρ = ln 2
        let jet = flat_h()
            .eval_jet(&[0.4, -0.3, 0.7, 0.2, 1.1, 2.0f64.ln()], 2)
            .unwrap();
        let view = WirtingerView::new(&jet, CoordSystem::Reduced.layout());
        assert!((view.second(1, false, 1, true) - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn omega_prime_equals_flat_h_on_reduced_points() {
        let op = flat_omega_prime();
        let h = flat_h();
        for r in sample_reduced() {
            for (u, theta) in [(0.0, 0.0), (1.3, 2.2), (-2.0, 5.5)] {
                let full = reduced_to_full(&r, &FiberPoint::new(u, theta));
                let a = op.eval_value(&full.to_array()).unwrap();
                let b = h.eval_value(&r.to_array()).unwrap();
                assert!((a - b).norm() < 1e-12, "u,theta-independence failed");
            }
        }
    }

    #[test]
    fn calabi_omega_spec_point() {
        // z = (1, 1), w = (0, -i): t = 6, omega = 5 + ln 3 - ln 6
        let p = [1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0];
        let v = calabi_omega_full().eval_value(&p).unwrap();
        let expect = 5.0 + 3.0f64.ln() - 6.0f64.ln();
        assert!((v - c(expect, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn calabi_omega_zero_section() {
        // w = 0: omega = log(1+|z|^2) + 1 - log 2
        let p = [0.7, -0.2, 0.4, 0.9, 0.0, 0.0, 0.0, 0.0];
        let zsq = 0.7f64.powi(2) + 0.2f64.powi(2) + 0.4f64.powi(2) + 0.9f64.powi(2);
        let v = calabi_omega_full().eval_value(&p).unwrap();
        assert!((v.re - ((1.0 + zsq).ln() + 1.0 - 2.0f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn calabi_omega_phase_invariance() {
        let om = calabi_omega_full();
        let z1 = c(0.8, 0.3);
        let z2 = c(-0.5, 0.6);
        let w1 = c(0.2, -0.9);
        let w2 = c(0.4, 0.1);
        let base = om
            .eval_value(&[z1.re, z1.im, z2.re, z2.im, w1.re, w1.im, w2.re, w2.im])
            .unwrap();
        for ang in [0.7, 2.9] {
            let ph = Complex64::from_polar(1.0, ang);
            // (z, w) -> (e^{i a} z, e^{-i a} w)
            let (a1, a2, b1, b2) = (z1 * ph, z2 * ph, w1 / ph, w2 / ph);
            let v = om
                .eval_value(&[a1.re, a1.im, a2.re, a2.im, b1.re, b1.im, b2.re, b2.im])
                .unwrap();
            assert!((v - base).norm() < 1e-13);
            // w -> e^{i a} w
            let (b1, b2) = (w1 * ph, w2 * ph);
            let v = om
                .eval_value(&[z1.re, z1.im, z2.re, z2.im, b1.re, b1.im, b2.re, b2.im])
                .unwrap();
            assert!((v - base).norm() < 1e-13);
        }
    }

    #[test]
    fn calabi_h_matches_composition_for_any_fiber() {
        let h = calabi_h_reduced();
        let om = calabi_omega_full();
        for r in sample_reduced() {
            let hv = h.eval_value(&r.to_array()).unwrap();
            for (u, theta) in [(0.0, 0.0), (2.4, 1.9), (-1.1, 4.4)] {
                let cp = darboux_to_calabi(&reduced_to_full(&r, &FiberPoint::new(u, theta)));
                let ov = om.eval_value(&cp.to_array()).unwrap();
                assert!(
                    (hv - ov).norm() < 1e-10 * (1.0 + ov.norm()),
                    "composition mismatch at {r:?}"
                );
            }
        }
    }

    #[test]
    fn calabi_h_outside_safe_box_is_domain_error() {
        let h = calabi_h_reduced();
        let err = h
            .eval_value(&[0.0, 0.0, 0.0, 0.0, 0.0, 5.0])
            .unwrap_err();
        assert!(err.to_string().contains("safe box"));
    }

    #[test]
    fn builtins_are_real_valued_on_sample_grids() {
        for r in sample_reduced() {
            let hv = flat_h().eval_value(&r.to_array()).unwrap();
            assert!(hv.im.abs() <= 1e-12);
            let cv = calabi_h_reduced().eval_value(&r.to_array()).unwrap();
            assert!(cv.im.abs() <= 1e-12);
            let full = reduced_to_full(&r, &FiberPoint::new(0.4, 1.0));
            assert!(flat_omega().eval_value(&full.to_array()).unwrap().im.abs() <= 1e-12);
            assert!(
                flat_omega_prime()
                    .eval_value(&full.to_array())
                    .unwrap()
                    .im
                    .abs()
                    <= 1e-12
            );
            let cp = darboux_to_calabi(&full);
            assert!(
                calabi_omega_full()
                    .eval_value(&cp.to_array())
                    .unwrap()
                    .im
                    .abs()
                    <= 1e-12
            );
        }
    }

    #[test]
    fn gauge_with_minus_half_q1_squared_gives_omega_prime() {
        let gauged = apply_gauge(&flat_omega(), &GaugeFunction::monomial(-0.5, [2, 0, 0, 0]));
        let op = flat_omega_prime();
        let pts = [
            [0.3, -0.8, 0.2, 0.9, 1.1, -0.4, 0.6, 0.7],
            [1.0, 1.0, -1.0, 0.5, 0.2, 0.2, -0.3, 0.9],
        ];
        for p in pts {
            let a = gauged.eval_value(&p).unwrap();
            let b = op.eval_value(&p).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn trivial_gauges() {
        let base = flat_omega();
        let p = [0.3, -0.8, 0.2, 0.9, 1.1, -0.4, 0.6, 0.7];
        let v0 = base.eval_value(&p).unwrap();
        // F = 0
        let idd = apply_gauge(&base, &GaugeFunction::zero());
        assert_eq!(idd.eval_value(&p).unwrap(), v0);
        // F = i c: F + conj(F) = 0
        let imc = apply_gauge(&base, &GaugeFunction::monomial(c(0.0, 3.7), [0, 0, 0, 0]));
        assert!((imc.eval_value(&p).unwrap() - v0).norm() < 1e-14);
    }

    #[test]
    fn flat_complex_hessian_is_identity_exactly() {
        let h = complex_hessian(&flat_omega(), &[0.3, -0.8, 0.2, 0.9, 1.1, -0.4, 0.6, 0.7])
            .unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a == b { Complex64::ONE } else { Complex64::ZERO };
                assert_eq!(h[a][b], expect);
            }
        }
    }

    #[test]
    fn calabi_complex_hessian_is_positive_definite_on_safe_points() {
        use nalgebra::DMatrix;
        for r in sample_reduced() {
            let cp = darboux_to_calabi(&reduced_to_full(&r, &FiberPoint::new(0.2, 0.8)));
            let h = complex_hessian(&calabi_omega_full(), &cp.to_array()).unwrap();
            // real embedding [[Re, -Im], [Im, Re]] of the Hermitian matrix
            let mut m = DMatrix::<f64>::zeros(8, 8);
            for a in 0..4 {
                for b in 0..4 {
                    m[(a, b)] = h[a][b].re;
                    m[(a, b + 4)] = -h[a][b].im;
                    m[(a + 4, b)] = h[a][b].im;
                    m[(a + 4, b + 4)] = h[a][b].re;
                }
            }
            let eig = m.symmetric_eigen();
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "complex Hessian not positive definite at {r:?}");
        }
    }

    #[test]
    fn gauge_leaves_complex_hessian_unchanged() {
        let base = flat_omega();
        let mut f = GaugeFunction::monomial(c(0.4, -0.7), [1, 2, 0, 0]);
        f.push(c(-0.3, 0.2), [0, 0, 2, 1]);
        f.push(c(0.9, 0.1), [0, 1, 0, 2]);
        let gauged = apply_gauge(&base, &f);
        let p = [0.6, -0.2, 0.8, 0.4, 1.2, -0.9, 0.3, 0.5];
        let ha = complex_hessian(&base, &p).unwrap();
        let hb = complex_hessian(&gauged, &p).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((ha[a][b] - hb[a][b]).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn names_resolve() {
        for name in POTENTIAL_NAMES {
            let p = potential_by_name(name).unwrap();
            assert_eq!(p.name(), name);
        }
        assert!(potential_by_name("no-such").is_none());
    }

    #[test]
    fn wirtinger_conjugation_on_real_valued_builtins() {
        // d_zbar f = conj(d_z f) for every real-valued field and complex pair
        let check = |field: &Potential, x: &[f64]| {
            let jet = field.eval_jet(x, 1).unwrap();
            let view = WirtingerView::new(&jet, field.layout());
            for k in 0..field.layout().complex_pairs().len() {
                let dz = view.d_z(k);
                let dzbar = view.d_zbar(k);
                assert!(
                    (dzbar - dz.conj()).norm() <= 1e-14 * (1.0 + dz.norm()),
                    "{} pair {k}: {dzbar} vs conj({dz})",
                    field.name()
                );
            }
        };
        for r in sample_reduced() {
            check(&flat_h(), &r.to_array());
            check(&calabi_h_reduced(), &r.to_array());
            let full = reduced_to_full(&r, &FiberPoint::new(0.3, 2.4));
            check(&flat_omega(), &full.to_array());
            check(&flat_omega_prime(), &full.to_array());
            check(&calabi_omega_full(), &darboux_to_calabi(&full).to_array());
        }
    }

    #[test]
    fn half_v_squared_gradient() {
        // f(v, rho) = ½v² over the reduced chart: f_v = v, f_rho = 0
        let f = Potential::new(
            "half-v-squared",
            CoordSystem::Reduced,
            Domain::All,
            Expr::real(0.5) * Expr::Var(reduced_idx::V).powi(2),
        );
        let jet = f.eval_jet(&[0.1, 0.2, 0.3, 0.4, 3.0, 0.5], 1).unwrap();
        assert_eq!(jet.grad(reduced_idx::V), Complex64::new(3.0, 0.0));
        assert_eq!(jet.grad(reduced_idx::RHO), Complex64::ZERO);
    }
}
