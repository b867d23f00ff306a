//! The two Poisson brackets and their numerical consistency checks.
//!
//! The reduced bracket acts on functions of (q, ζ, v, ρ) through the bivector
//! e^{−ρ}(i ∂_v∧∂_ρ + iζ ∂_ζ∧∂_v + ∂_ζ∧∂_q), with ∂_ζ, ∂_q the holomorphic
//! Wirtinger derivatives and the wedge convention
//! a·∂_A∧∂_B ↦ a(∂_A f ∂_B g − ∂_B f ∂_A g). The original bracket on ℂ⁴ is
//! Σⱼ ∂_{pⱼ}∧∂_{qʲ}. Both are implemented at the jet level, so a bracket of
//! order-k jets is itself an order-(k−1) jet and brackets nest for the
//! Jacobi test.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use crate::coords::{full_to_reduced, reduced_from_full_exprs, FullPoint, ReducedPoint};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::{Jet, RealCoordsLayout, ScalarField};
use crate::potentials::{reduced_idx, CoordSystem};

/// Reduced bracket of two jets evaluated at the same reduced point.
/// Consumes one derivative order: order-k inputs yield an order-(k−1) jet.
pub fn reduced_bracket_jets(f: &Jet, g: &Jet, point: &[f64; 6]) -> Jet {
    use reduced_idx::*;
    assert_eq!(f.dim(), 6);
    assert_eq!(f.order(), g.order());
    assert!(f.order() >= 1, "bracket needs at least order-1 jets");
    let order = f.order() - 1;
    let i = Complex64::i();

    let fv = f.partial(V);
    let frho = f.partial(RHO);
    let fz = f.wirtinger(Z_RE, Z_IM, false);
    let fq = f.wirtinger(Q_RE, Q_IM, false);
    let gv = g.partial(V);
    let grho = g.partial(RHO);
    let gz = g.wirtinger(Z_RE, Z_IM, false);
    let gq = g.wirtinger(Q_RE, Q_IM, false);

    // coordinate factors as jets of the output order
    let zeta = Jet::variable(6, order, Z_RE, point[Z_RE])
        .add(&Jet::variable(6, order, Z_IM, point[Z_IM]).scale(i));
    let exp_neg_rho = Jet::variable(6, order, RHO, point[RHO]).scale((-1.0).into()).exp();

    let term_vr = fv.mul(&grho).sub(&frho.mul(&gv)).scale(i);
    let term_zv = fz.mul(&gv).sub(&fv.mul(&gz)).scale(i).mul(&zeta);
    let term_zq = fz.mul(&gq).sub(&fq.mul(&gz));
    exp_neg_rho.mul(&term_vr.add(&term_zv).add(&term_zq))
}

/// Reduced bracket value of two fields at a point.
pub fn reduced_bracket(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    at: &ReducedPoint,
) -> Result<Complex64> {
    let x = at.to_array();
    let fj = f.eval_jet(&x, 1)?;
    let gj = g.eval_jet(&x, 1)?;
    Ok(reduced_bracket_jets(&fj, &gj, &x).value())
}

/// Original holomorphic bracket Σⱼ(∂_{pⱼ}f ∂_{qʲ}g − ∂_{qʲ}f ∂_{pⱼ}g) of two
/// jets over an 8-real-coordinate Darboux chart (pairs 0,1 are the base
/// coordinates, pairs 2,3 the momenta).
pub fn original_bracket_jets(f: &Jet, g: &Jet) -> Jet {
    assert_eq!(f.dim(), 8);
    assert_eq!(f.order(), g.order());
    assert!(f.order() >= 1);
    let order = f.order() - 1;
    let mut acc = Jet::constant(8, order, Complex64::ZERO);
    for j in 0..2 {
        let (qx, qy) = (2 * j, 2 * j + 1);
        let (px, py) = (2 * j + 4, 2 * j + 5);
        let fp = f.wirtinger(px, py, false);
        let fq = f.wirtinger(qx, qy, false);
        let gp = g.wirtinger(px, py, false);
        let gq = g.wirtinger(qx, qy, false);
        acc = acc.add(&fp.mul(&gq).sub(&fq.mul(&gp)));
    }
    acc
}

/// Original bracket value of two fields over the full chart.
pub fn original_bracket(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    at: &FullPoint,
) -> Result<Complex64> {
    let x = at.to_array();
    let fj = f.eval_jet(&x, 1)?;
    let gj = g.eval_jet(&x, 1)?;
    Ok(original_bracket_jets(&fj, &gj).value())
}

/// Cyclic Jacobi sum {f,{g,h}} + {g,{h,f}} + {h,{f,g}} of the reduced
/// bracket; vanishes identically because the bivector is Poisson.
/// Fields are evaluated as order-3 jets so the nested brackets are exact.
pub fn jacobi_defect(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    h: &dyn ScalarField,
    at: &ReducedPoint,
) -> Result<Complex64> {
    let x = at.to_array();
    let fj = f.eval_jet(&x, 3)?;
    let gj = g.eval_jet(&x, 3)?;
    let hj = h.eval_jet(&x, 3)?;
    let cyclic = |a: &Jet, b: &Jet, c: &Jet| {
        let inner = reduced_bracket_jets(b, c, &x);
        reduced_bracket_jets(&a.truncated(2), &inner, &x).value()
    };
    Ok(cyclic(&fj, &gj, &hj) + cyclic(&gj, &hj, &fj) + cyclic(&hj, &fj, &gj))
}

/// A reduced field pulled back to the full chart through the projection
/// (q¹,q²,p₁,p₂) ↦ (q, ζ, v, ρ); u- and θ-independent by construction.
pub struct PullbackField<'a> {
    inner: &'a dyn ScalarField,
}

impl<'a> PullbackField<'a> {
    pub fn new(inner: &'a dyn ScalarField) -> Self {
        assert_eq!(
            inner.layout().dim(),
            6,
            "pullback source must live on the reduced chart"
        );
        Self { inner }
    }
}

impl ScalarField for PullbackField<'_> {
    fn layout(&self) -> &RealCoordsLayout {
        CoordSystem::Full.layout()
    }

    fn eval_jet(&self, point: &[f64], order: u8) -> Result<Jet> {
        let maps = reduced_from_full_exprs();
        let mut inner_jets = Vec::with_capacity(6);
        let mut reduced = [0.0; 6];
        for (k, m) in maps.iter().enumerate() {
            let jet = m.eval(point, order)?.real_part();
            reduced[k] = jet.value().re;
            inner_jets.push(jet);
        }
        let outer = self.inner.eval_jet(&reduced, order)?;
        Ok(Jet::compose(&outer, &inner_jets))
    }
}

/// Which first derivative of a reduced potential to expose as a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedDeriv {
    /// H_ρ
    Rho,
    /// iH_v
    IV,
    /// H_ζ̄
    ZetaBar,
    /// H_q̄
    QBar,
}

/// First-derivative field of a reduced potential; evaluating its order-k jet
/// consumes the base field's order-(k+1) jet.
pub struct DerivField<'a> {
    base: &'a dyn ScalarField,
    deriv: ReducedDeriv,
}

impl<'a> DerivField<'a> {
    pub fn new(base: &'a dyn ScalarField, deriv: ReducedDeriv) -> Self {
        assert_eq!(base.layout().dim(), 6);
        Self { base, deriv }
    }
}

impl ScalarField for DerivField<'_> {
    fn layout(&self) -> &RealCoordsLayout {
        self.base.layout()
    }

    fn eval_jet(&self, point: &[f64], order: u8) -> Result<Jet> {
        use reduced_idx::*;
        if order >= 3 {
            return Err(Error::invalid(
                "derivative fields support jet orders up to 2",
            ));
        }
        let base = self.base.eval_jet(point, order + 1)?;
        Ok(match self.deriv {
            ReducedDeriv::Rho => base.partial(RHO),
            ReducedDeriv::IV => base.partial(V).scale(Complex64::i()),
            ReducedDeriv::ZetaBar => base.wirtinger(Z_RE, Z_IM, true),
            ReducedDeriv::QBar => base.wirtinger(Q_RE, Q_IM, true),
        })
    }
}

/// Deviation from the relation {f,g} = (1/p̄₁){f,g}_original between the two
/// brackets on u,θ-invariant functions: the reduced bracket is evaluated at
/// the projected point, the original bracket on the pullbacks at the full
/// point, and the difference returned.
pub fn remark2_relation_defect(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    at: &FullPoint,
) -> Result<Complex64> {
    if at.p1.norm_sqr() == 0.0 {
        return Err(Error::domain("p1 must be nonzero"));
    }
    let (reduced, _) = full_to_reduced(at)?;
    let lhs = reduced_bracket(f, g, &reduced)?;
    let fp = PullbackField::new(f);
    let gp = PullbackField::new(g);
    let rhs = original_bracket(&fp, &gp, at)? / at.p1.conj();
    Ok(lhs - rhs)
}

/// Random real-coefficient polynomial of total degree ≤ 3 in the six real
/// reduced coordinates. Third derivatives of such fields are constants,
/// which keeps the order-3 jets cheap while exercising every bivector term.
pub fn random_cubic(rng: &mut impl Rng) -> Expr {
    let mut terms: Vec<Expr> = Vec::new();
    let mut exps = [0u32; 6];
    // enumerate all monomials of total degree <= 3 in graded-lex order
    fn enumerate(
        slot: usize,
        remaining: u32,
        exps: &mut [u32; 6],
        out: &mut Vec<[u32; 6]>,
    ) {
        if slot == 6 {
            out.push(*exps);
            return;
        }
        for e in 0..=remaining {
            exps[slot] = e;
            enumerate(slot + 1, remaining - e, exps, out);
        }
        exps[slot] = 0;
    }
    let mut monos = Vec::new();
    enumerate(0, 3, &mut exps, &mut monos);
    for m in monos {
        let coeff: f64 = rng.random_range(-1.0..1.0);
        let mut term = Expr::real(coeff);
        for (var, &e) in m.iter().enumerate() {
            if e > 0 {
                term = term * Expr::Var(var).powi(e);
            }
        }
        terms.push(term);
    }
    terms
        .into_iter()
        .reduce(|a, b| a + b)
        .expect("nonempty monomial list")
}

fn random_reduced_point(rng: &mut impl Rng) -> ReducedPoint {
    let mut x = [0.0; 6];
    for slot in &mut x {
        *slot = rng.random_range(-1.0..1.0);
    }
    ReducedPoint::from_array(&x)
}

fn cubic_field(rng: &mut impl Rng) -> crate::potentials::Potential {
    crate::potentials::Potential::new(
        "random-cubic",
        CoordSystem::Reduced,
        crate::potentials::Domain::All,
        random_cubic(rng),
    )
}

/// Seeded Jacobi-identity suite on random cubic triples; returns the maximum
/// absolute defect over all trials.
pub fn jacobi_suite(trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_defect: f64 = 0.0;
    for _ in 0..trials {
        let f = cubic_field(&mut rng);
        let g = cubic_field(&mut rng);
        let h = cubic_field(&mut rng);
        let at = random_reduced_point(&mut rng);
        let defect = jacobi_defect(&f, &g, &h, &at)?;
        max_defect = max_defect.max(defect.norm());
    }
    Ok(max_defect)
}

/// Seeded suite for the bracket relation on invariant pairs; returns the
/// maximum absolute defect.
pub fn remark2_suite(pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_defect: f64 = 0.0;
    for _ in 0..pairs {
        let f = cubic_field(&mut rng);
        let g = cubic_field(&mut rng);
        let r = random_reduced_point(&mut rng);
        let fiber = crate::coords::FiberPoint::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let at = crate::coords::reduced_to_full(&r, &fiber);
        let defect = remark2_relation_defect(&f, &g, &at)?;
        max_defect = max_defect.max(defect.norm());
    }
    Ok(max_defect)
}
