//! Least-squares collocation search for solutions of the reduced system.
//!
//! Candidate potentials are real polynomial expansions in
//! (Re q, Im q, Re ζ, Im ζ, v, s) with s = e^ρ, so H_ρ = s·H_s by the chain
//! rule and the flat solution ½v² + |q|² + s + s|ζ|² is an exact degree-3
//! member of the search space. The six complex residuals per collocation
//! point are split into twelve reals and minimized by Levenberg-Marquardt
//! with an exact Jacobian: every bracket is bilinear in the derivative jets
//! of its two arguments, which are linear in the coefficients, so each
//! Jacobian entry is a sum of two brackets with a basis element substituted
//! into one slot.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use crate::brackets::reduced_bracket_jets;
use crate::coords::ReducedPoint;
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::potentials::reduced_idx;

/// Monomial exponents over (Re q, Im q, Re ζ, Im ζ, v, s).
pub type Monomial = [u8; 6];

/// Graded-lexicographic monomial list of total degree ≤ degree.
pub fn monomials(degree: u8) -> Vec<Monomial> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut stack = vec![([0u8; 6], 0usize, total)];
        while let Some((exps, slot, remaining)) = stack.pop() {
            if slot == 5 {
                let mut m = exps;
                m[5] = remaining;
                out.push(m);
                continue;
            }
            // push in reverse so the smaller exponent pops first
            for e in (0..=remaining).rev() {
                let mut m = exps;
                m[slot] = e;
                stack.push((m, slot + 1, remaining - e));
            }
        }
    }
    out
}

pub fn basis_len(degree: u8) -> usize {
    // C(6 + d, d)
    let d = degree as usize;
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 1..=d {
        num *= 6 + i;
        den *= i;
    }
    num / den
}

/// A candidate potential as real coefficients over the monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisExpansion {
    pub degree: u8,
    pub coeffs: Vec<f64>,
}

impl BasisExpansion {
    pub fn zeros(degree: u8) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; basis_len(degree)],
        }
    }

    /// Exact coefficients of the flat solution ½v² + |q|² + s + s|ζ|².
    /// Needs degree ≥ 3 (the s|ζ|² terms are cubic).
    pub fn flat(degree: u8) -> Result<Self> {
        if degree < 3 {
            return Err(Error::invalid(
                "the flat solution needs a basis of degree >= 3",
            ));
        }
        let mut c = Self::zeros(degree);
        let monos = monomials(degree);
        let mut set = |target: Monomial, value: f64| {
            let idx = monos
                .iter()
                .position(|m| *m == target)
                .expect("monomial in basis");
            c.coeffs[idx] = value;
        };
        set([0, 0, 0, 0, 2, 0], 0.5); // ½ v²
        set([2, 0, 0, 0, 0, 0], 1.0); // (Re q)²
        set([0, 2, 0, 0, 0, 0], 1.0); // (Im q)²
        set([0, 0, 0, 0, 0, 1], 1.0); // s
        set([0, 0, 2, 0, 0, 1], 1.0); // s (Re ζ)²
        set([0, 0, 0, 2, 0, 1], 1.0); // s (Im ζ)²
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds seeded uniform noise of the given amplitude to every coefficient.
    pub fn with_noise(&self, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c + rng.random_range(-amplitude..amplitude))
            .collect();
        Self {
            degree: self.degree,
            coeffs,
        }
    }
}

/// Sampling box over (Re q, Im q, Re ζ, Im ζ, v, s); s is sampled directly
/// and converted to ρ = ln s.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationBox {
    pub lo: [f64; 6],
    pub hi: [f64; 6],
}

impl CollocationBox {
    /// |Re q|, |Im q|, |Re ζ|, |Im ζ|, |v| ≤ 1 and s ∈ [1/2, 2].
    pub fn default_box() -> Self {
        Self {
            lo: [-1.0, -1.0, -1.0, -1.0, -1.0, 0.5],
            hi: [1.0, 1.0, 1.0, 1.0, 1.0, 2.0],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .all(|(a, b)| a.is_finite() && b.is_finite() && a <= b)
            && self.lo[5] > 0.0
    }
}

/// Deterministic collocation point set.
#[derive(Debug, Clone)]
pub struct CollocationSet {
    pub points: Vec<ReducedPoint>,
    pub bounds: CollocationBox,
    pub seed: u64,
}

pub fn sample_collocation(bounds: &CollocationBox, count: usize, seed: u64) -> Result<CollocationSet> {
    if !bounds.is_valid() {
        return Err(Error::invalid("collocation box is empty or has s <= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = [0.0; 6];
        for (slot, (lo, hi)) in x.iter_mut().zip(bounds.lo.iter().zip(&bounds.hi)) {
            *slot = if lo == hi { *lo } else { rng.random_range(*lo..*hi) };
        }
        let s = x[5];
        points.push(ReducedPoint::from_array(&[
            x[0],
            x[1],
            x[2],
            x[3],
            x[4],
            s.ln(),
        ]));
    }
    Ok(CollocationSet {
        points,
        bounds: bounds.clone(),
        seed,
    })
}

/// The four order-1 derivative jets (H_ρ, iH_v, H_ζ̄, H_q̄) of one basis
/// monomial at one point; residuals and the Jacobian are assembled from
/// these by bilinearity of the bracket.
struct ArgJets {
    tuple: [Jet; 4],
}

/// Per-point cache: basis argument jets plus the reduced coordinates.
struct PointCache {
    x: [f64; 6],
    basis: Vec<ArgJets>,
}

fn build_cache(basis: &[Monomial], points: &[ReducedPoint]) -> Vec<PointCache> {
    use reduced_idx::*;
    points
        .iter()
        .map(|p| {
            let x = p.to_array();
            // variable jets and the s = e^ρ jet at order 2
            let vars: Vec<Jet> = (0..5).map(|k| Jet::variable(6, 2, k, x[k])).collect();
            let s_jet = Jet::variable(6, 2, RHO, x[RHO]).exp();
            // powers of each factor up to the monomial degree
            let max_deg = basis.iter().map(|m| m.iter().max().copied().unwrap_or(0)).max().unwrap_or(0);
            let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(6);
            for k in 0..6 {
                let base = if k < 5 { vars[k].clone() } else { s_jet.clone() };
                let mut row = vec![Jet::constant(6, 2, Complex64::ONE)];
                for e in 1..=max_deg as usize {
                    let prev = row[e - 1].clone();
                    row.push(prev.mul(&base));
                }
                powers.push(row);
            }
            let basis_jets = basis
                .iter()
                .map(|m| {
                    let mut jet = powers[0][m[0] as usize].clone();
                    for k in 1..6 {
                        if m[k] > 0 {
                            jet = jet.mul(&powers[k][m[k] as usize]);
                        }
                    }
                    ArgJets {
                        tuple: [
                            jet.partial(RHO),
                            jet.partial(V).scale(Complex64::i()),
                            jet.wirtinger(Z_RE, Z_IM, true),
                            jet.wirtinger(Q_RE, Q_IM, true),
                        ],
                    }
                })
                .collect();
            PointCache { x, basis: basis_jets }
        })
        .collect()
}

/// The six residual equations as (left slot, right slot, target) over the
/// argument tuple (H_ρ, iH_v, H_ζ̄, H_q̄).
const EQUATIONS: [(usize, usize); 6] = [(0, 1), (2, 3), (0, 3), (1, 2), (0, 2), (1, 3)];

fn equation_target(eq: usize, x: &[f64; 6]) -> Complex64 {
    use reduced_idx::*;
    match eq {
        0 | 1 => Complex64::ONE,
        2 => Complex64::new(x[Z_RE], -x[Z_IM]),
        _ => Complex64::ZERO,
    }
}

fn combine_tuple(cache: &PointCache, coeffs: &[f64]) -> [Jet; 4] {
    let mut out: [Jet; 4] = std::array::from_fn(|_| Jet::constant(6, 1, Complex64::ZERO));
    for (c, arg) in coeffs.iter().zip(&cache.basis) {
        if *c == 0.0 {
            continue;
        }
        let k = Complex64::new(*c, 0.0);
        for slot in 0..4 {
            out[slot] = out[slot].add(&arg.tuple[slot].scale(k));
        }
    }
    out
}

/// Residual vector: per point, the six complex residuals split into
/// (re, im) pairs in equation order.
pub fn residual_vector(c: &BasisExpansion, pts: &CollocationSet) -> Result<DVector<f64>> {
    let basis = monomials(c.degree);
    if basis.len() != c.coeffs.len() {
        return Err(Error::invalid(format!(
            "coefficient count {} does not match basis size {}",
            c.coeffs.len(),
            basis.len()
        )));
    }
    let cache = build_cache(&basis, &pts.points);
    Ok(residuals_from_cache(&cache, &c.coeffs))
}

fn residuals_from_cache(cache: &[PointCache], coeffs: &[f64]) -> DVector<f64> {
    let mut r = DVector::zeros(cache.len() * 12);
    for (pi, pc) in cache.iter().enumerate() {
        let h = combine_tuple(pc, coeffs);
        for (eq, (a, b)) in EQUATIONS.iter().enumerate() {
            let val = reduced_bracket_jets(&h[*a], &h[*b], &pc.x).value()
                - equation_target(eq, &pc.x);
            r[pi * 12 + 2 * eq] = val.re;
            r[pi * 12 + 2 * eq + 1] = val.im;
        }
    }
    r
}

/// Exact Jacobian of the residual vector with respect to the coefficients.
pub fn residual_jacobian(c: &BasisExpansion, pts: &CollocationSet) -> Result<DMatrix<f64>> {
    let basis = monomials(c.degree);
    if basis.len() != c.coeffs.len() {
        return Err(Error::invalid("coefficient count does not match basis"));
    }
    let cache = build_cache(&basis, &pts.points);
    Ok(jacobian_from_cache(&cache, &c.coeffs))
}

fn jacobian_from_cache(cache: &[PointCache], coeffs: &[f64]) -> DMatrix<f64> {
    let n = coeffs.len();
    let mut jac = DMatrix::zeros(cache.len() * 12, n);
    for (pi, pc) in cache.iter().enumerate() {
        let h = combine_tuple(pc, coeffs);
        for (k, arg) in pc.basis.iter().enumerate() {
            for (eq, (a, b)) in EQUATIONS.iter().enumerate() {
                let d = reduced_bracket_jets(&arg.tuple[*a], &h[*b], &pc.x).value()
                    + reduced_bracket_jets(&h[*a], &arg.tuple[*b], &pc.x).value();
                jac[(pi * 12 + 2 * eq, k)] = d.re;
                jac[(pi * 12 + 2 * eq + 1, k)] = d.im;
            }
        }
    }
    jac
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub max_iter: usize,
    /// convergence threshold on the residual sup-norm
    pub tol: f64,
    pub lm_lambda0: f64,
    /// anchor weight toward the start coefficients
    pub tikhonov: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-8,
            lm_lambda0: 1e-3,
            tikhonov: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub sup: f64,
    pub rms: f64,
    pub lambda: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub coeffs: BasisExpansion,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
    pub final_sup: f64,
    pub final_rms: f64,
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn rms(v: &DVector<f64>) -> f64 {
    (v.norm_squared() / v.len() as f64).sqrt()
}

const LAMBDA_MAX: f64 = 1e14;
const LAMBDA_MIN: f64 = 1e-14;

/// Levenberg-Marquardt on ½‖residual‖². The tikhonov weight enters the
/// normal equations as a damping floor (JᵀJ + (tikhonov + λ)I); since the
/// gradient Jᵀr has no component along gauge-null coefficient directions,
/// those directions never move and the iterate stays anchored at the start
/// without biasing the attainable residual. Steps are accepted only when
/// the residual 2-norm does not increase, so the RMS history is
/// non-increasing over accepted steps. Deterministic for a fixed start,
/// point set and config.
pub fn solve(
    start: &BasisExpansion,
    pts: &CollocationSet,
    config: &SolveConfig,
) -> Result<SolveOutcome> {
    if !(config.tol > 0.0 && config.lm_lambda0 > 0.0 && config.tikhonov >= 0.0) {
        return Err(Error::invalid("solver config values must be positive"));
    }
    let basis = monomials(start.degree);
    if basis.len() != start.coeffs.len() {
        return Err(Error::invalid("coefficient count does not match basis"));
    }
    let cache = build_cache(&basis, &pts.points);
    let n = basis.len();

    let mut c = DVector::from_column_slice(&start.coeffs);
    let mut r = residuals_from_cache(&cache, c.as_slice());
    if !r.iter().all(|x| x.is_finite()) {
        return Err(Error::Solver(
            "initial residual is not finite (point escapes numeric range)".into(),
        ));
    }
    let mut lambda = config.lm_lambda0;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = sup_norm(&r) <= config.tol;

    while !converged && iterations < config.max_iter {
        let jac = jacobian_from_cache(&cache, c.as_slice());
        if !jac.iter().all(|x| x.is_finite()) {
            return Err(Error::Solver(
                "jacobian is not finite (point escapes numeric range)".into(),
            ));
        }
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let mut accepted = false;
        while !accepted && lambda <= LAMBDA_MAX {
            let mut m = jtj.clone();
            for k in 0..n {
                m[(k, k)] += config.tikhonov + lambda;
            }
            let step = match m.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let trial = &c + &step;
            let trial_r = residuals_from_cache(&cache, trial.as_slice());
            let finite = trial_r.iter().all(|x| x.is_finite());
            if finite && trial_r.norm() <= r.norm() {
                c = trial;
                r = trial_r;
                lambda = (lambda / 3.0).max(LAMBDA_MIN);
                accepted = true;
            } else {
                lambda *= 4.0;
            }
        }
        iterations += 1;
        history.push(IterationRecord {
            iteration: iterations,
            sup: sup_norm(&r),
            rms: rms(&r),
            lambda,
            accepted,
        });
        converged = sup_norm(&r) <= config.tol;
        if !accepted {
            break; // lambda exhausted: no acceptable step exists
        }
    }

    Ok(SolveOutcome {
        coeffs: BasisExpansion {
            degree: start.degree,
            coeffs: c.as_slice().to_vec(),
        },
        converged,
        iterations,
        final_sup: sup_norm(&r),
        final_rms: rms(&r),
        history,
    })
}

/// The represented potential of an expansion, for re-verification through
/// the residual evaluators.
pub fn expansion_potential(c: &BasisExpansion) -> crate::potentials::Potential {
    use crate::expr::Expr;
    use reduced_idx::*;
    let basis = monomials(c.degree);
    let s = || Expr::Var(RHO).exp();
    let var = |k: usize| -> Expr {
        match k {
            0 => Expr::Var(Q_RE),
            1 => Expr::Var(Q_IM),
            2 => Expr::Var(Z_RE),
            3 => Expr::Var(Z_IM),
            4 => Expr::Var(V),
            _ => s(),
        }
    };
    let mut total = Expr::real(0.0);
    for (coeff, m) in c.coeffs.iter().zip(&basis) {
        if *coeff == 0.0 {
            continue;
        }
        let mut term = Expr::real(*coeff);
        for k in 0..6 {
            if m[k] > 0 {
                term = term * var(k).powi(m[k] as u32);
            }
        }
        total = total + term;
    }
    crate::potentials::Potential::new(
        "basis-expansion",
        crate::potentials::CoordSystem::Reduced,
        crate::potentials::Domain::All,
        total,
    )
}
