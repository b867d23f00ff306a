//! Residual evaluators for the reduced six-equation system and the full
//! symplectic Monge-Ampère system, the lift between them, and the
//! consistency check tying the two together.
//!
//! Reduced system (for H over (q, ζ, v, ρ)):
//!   r1 = {H_ρ, iH_v} − 1        r4 = {iH_v, H_ζ̄}
//!   r2 = {H_ζ̄, H_q̄} − 1        r5 = {H_ρ, H_ζ̄}
//!   r3 = {H_ρ, H_q̄} − ζ̄        r6 = {iH_v, H_q̄}
//!
//! Full system (for Ω over a Darboux chart):
//!   C^i_j = {Ω_p̄ᵢ, Ω_q̄ʲ} − δ^i_j,  A = {Ω_q̄ᵢ, Ω_q̄ʲ},  B = {Ω_p̄ᵢ, Ω_p̄ⱼ},
//! with A, B antisymmetric (only the (1,2) entries are carried).
//!
//! For Ω = π*H the two residual sets determine each other linearly:
//!   C = [[r1 + ζ̄ r4, r3 − ζ̄ r2], [−r4, r2]],  A₁₂ = p̄₁ r6,  B₁₂ = r5 / p̄₁,
//! which yields the two-sided bound with κ = 2(1+|ζ|)·max(1, |p₁|, 1/|p₁|)
//! used by [`reduction_consistency`].

use num_complex::Complex64;

use crate::brackets::{original_bracket_jets, reduced_bracket_jets};
use crate::coords::{full_to_reduced, reduced_from_full_exprs, FullPoint, ReducedPoint};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::ScalarField;
use crate::potentials::{flat_h, reduced_idx, CoordSystem, Domain, Potential};

/// The six complex residuals of the reduced system at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedResiduals {
    pub r: [Complex64; 6],
}

impl ReducedResiduals {
    pub fn sup_norm(&self) -> f64 {
        self.r.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Residuals of the full system at one point. `c` stores C − δ; the raw
/// diagonal {Ω_p̄ᵢ, Ω_q̄ᵢ} is kept alongside for scale detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullResiduals {
    pub c: [[Complex64; 2]; 2],
    pub a12: Complex64,
    pub b12: Complex64,
    pub raw_diag: [Complex64; 2],
}

impl FullResiduals {
    pub fn sup_norm(&self) -> f64 {
        let mut m = self.a12.norm().max(self.b12.norm());
        for row in &self.c {
            for z in row {
                m = m.max(z.norm());
            }
        }
        m
    }

    pub fn entries(&self) -> [Complex64; 6] {
        [
            self.c[0][0], self.c[0][1], self.c[1][0], self.c[1][1], self.a12, self.b12,
        ]
    }
}

/// Evaluates the six reduced equations; consumes only the order-2 jet of H.
pub fn reduced_residuals(
    h: &dyn ScalarField,
    at: &ReducedPoint,
) -> Result<ReducedResiduals> {
    use reduced_idx::*;
    let x = at.to_array();
    let jet = h.eval_jet(&x, 2)?;
    let h_rho = jet.partial(RHO);
    let ih_v = jet.partial(V).scale(Complex64::i());
    let h_zbar = jet.wirtinger(Z_RE, Z_IM, true);
    let h_qbar = jet.wirtinger(Q_RE, Q_IM, true);
    let br = |f: &crate::jets::Jet, g: &crate::jets::Jet| reduced_bracket_jets(f, g, &x).value();
    let zbar = at.zeta.conj();
    Ok(ReducedResiduals {
        r: [
            br(&h_rho, &ih_v) - 1.0,
            br(&h_zbar, &h_qbar) - 1.0,
            br(&h_rho, &h_qbar) - zbar,
            br(&ih_v, &h_zbar),
            br(&h_rho, &h_zbar),
            br(&ih_v, &h_qbar),
        ],
    })
}

/// Evaluates systems C, A, B at a Darboux point given by its 8 real slots
/// (works for the full chart and for the cotangent chart alike).
pub fn full_residuals_at(om: &dyn ScalarField, x: &[f64; 8]) -> Result<FullResiduals> {
    let jet = om.eval_jet(x, 2)?;
    let om_pbar = [jet.wirtinger(4, 5, true), jet.wirtinger(6, 7, true)];
    let om_qbar = [jet.wirtinger(0, 1, true), jet.wirtinger(2, 3, true)];
    let br = |f, g| original_bracket_jets(f, g).value();
    let mut c = [[Complex64::ZERO; 2]; 2];
    let mut raw_diag = [Complex64::ZERO; 2];
    for i in 0..2 {
        for j in 0..2 {
            let raw = br(&om_pbar[i], &om_qbar[j]);
            if i == j {
                raw_diag[i] = raw;
                c[i][j] = raw - 1.0;
            } else {
                c[i][j] = raw;
            }
        }
    }
    Ok(FullResiduals {
        c,
        a12: br(&om_qbar[0], &om_qbar[1]),
        b12: br(&om_pbar[0], &om_pbar[1]),
        raw_diag,
    })
}

pub fn full_residuals(om: &dyn ScalarField, at: &FullPoint) -> Result<FullResiduals> {
    full_residuals_at(om, &at.to_array())
}

/// Pullback π*H as a potential over the full chart:
/// Ω(q¹,q²,p₁,p₂) = H(q², p₂/p₁, i(q̄¹−q¹), ln|p₁|²). Defined for p₁ ≠ 0.
pub fn lift_potential(h: &Potential) -> Potential {
    assert_eq!(
        h.coords(),
        CoordSystem::Reduced,
        "only reduced potentials lift"
    );
    let expr = h.expr().subst(&reduced_from_full_exprs());
    Potential::new(
        format!("lift-{}", h.name()),
        CoordSystem::Full,
        Domain::P1Nonzero,
        expr,
    )
}

/// Outcome of checking the exact correspondence between the reduced
/// residuals of H and the full residuals of π*H at one point.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyReport {
    /// max |full entry − entry predicted from the reduced residuals|
    pub correspondence_dev: f64,
    pub reduced_sup: f64,
    pub full_sup: f64,
    /// two-sided comparison constant 2(1+|ζ|)·max(1, |p₁|, 1/|p₁|)
    pub kappa: f64,
    /// sup-norm(full) ≤ κ·sup-norm(reduced) + tol and conversely
    pub bounds_ok: bool,
}

const CONSISTENCY_BOUND_TOL: f64 = 1e-10;

pub fn reduction_consistency(h: &Potential, at: &FullPoint) -> Result<ConsistencyReport> {
    if at.p1.norm_sqr() == 0.0 {
        return Err(Error::domain("p1 must be nonzero"));
    }
    let (rp, _) = full_to_reduced(at)?;
    let red = reduced_residuals(h, &rp)?;
    let lifted = lift_potential(h);
    let full = full_residuals(&lifted, at)?;

    let [r1, r2, r3, r4, r5, r6] = red.r;
    let zbar = rp.zeta.conj();
    let p1bar = at.p1.conj();
    let predicted = [
        r1 + zbar * r4,
        r3 - zbar * r2,
        -r4,
        r2,
        p1bar * r6,
        r5 / p1bar,
    ];
    let actual = full.entries();
    let correspondence_dev = predicted
        .iter()
        .zip(&actual)
        .map(|(p, a)| (p - a).norm())
        .fold(0.0, f64::max);

    let p1n = at.p1.norm();
    let kappa = 2.0 * (1.0 + rp.zeta.norm()) * p1n.max(1.0 / p1n).max(1.0);
    let reduced_sup = red.sup_norm();
    let full_sup = full.sup_norm();
    let bounds_ok = full_sup <= kappa * reduced_sup + CONSISTENCY_BOUND_TOL
        && reduced_sup <= kappa * full_sup + CONSISTENCY_BOUND_TOL;
    Ok(ConsistencyReport {
        correspondence_dev,
        reduced_sup,
        full_sup,
        kappa,
        bounds_ok,
    })
}

/// Which residual system a report aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Reduced,
    Full,
}

impl SystemKind {
    pub fn equation_names(&self) -> &'static [&'static str; 6] {
        match self {
            SystemKind::Reduced => &["r1", "r2", "r3", "r4", "r5", "r6"],
            SystemKind::Full => &["c11", "c12", "c21", "c22", "a12", "b12"],
        }
    }
}

/// Aggregated residuals of one system over a point set.
///
/// When `detected_scale` is present the system C held with right side s·δ
/// for a single constant s (relative spread < 1e−6); `sup_norm` is then the
/// scale-adjusted sup-norm, so `pass ⇔ sup_norm ≤ tolerance` in every case.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub system: SystemKind,
    pub tolerance: f64,
    /// Residual rows in equation order; raw (unscaled) values.
    pub per_point: Vec<[Complex64; 6]>,
    /// Per equation: (index of the point attaining the max, max abs value).
    pub equation_max: Vec<(usize, f64)>,
    pub sup_norm: f64,
    pub pass: bool,
    pub detected_scale: Option<f64>,
}

const SCALE_SPREAD_TOL: f64 = 1e-6;

fn aggregate(system: SystemKind, rows: Vec<[Complex64; 6]>, tolerance: f64) -> ResidualReport {
    let mut equation_max = vec![(0usize, 0.0f64); 6];
    for (idx, row) in rows.iter().enumerate() {
        for (eq, z) in row.iter().enumerate() {
            let a = z.norm();
            if a > equation_max[eq].1 {
                equation_max[eq] = (idx, a);
            }
        }
    }
    let sup_norm = equation_max.iter().map(|&(_, a)| a).fold(0.0, f64::max);
    ResidualReport {
        system,
        tolerance,
        per_point: rows,
        equation_max,
        sup_norm,
        pass: sup_norm <= tolerance,
        detected_scale: None,
    }
}

/// Aggregates precomputed reduced-residual rows.
pub fn aggregate_reduced(rows: Vec<[Complex64; 6]>, tolerance: f64) -> ResidualReport {
    aggregate(SystemKind::Reduced, rows, tolerance)
}

/// Aggregates precomputed full residuals, detecting a constant scale on
/// system C when the plain check fails.
pub fn aggregate_full(full: &[FullResiduals], tolerance: f64) -> ResidualReport {
    let rows: Vec<[Complex64; 6]> = full.iter().map(|f| f.entries()).collect();
    let mut report = aggregate(SystemKind::Full, rows, tolerance);
    apply_scale_detection(&mut report, full);
    report
}

/// Runs the reduced system over a point set and aggregates.
pub fn report_reduced(
    h: &dyn ScalarField,
    points: &[ReducedPoint],
    tolerance: f64,
) -> Result<ResidualReport> {
    let rows = points
        .iter()
        .map(|p| reduced_residuals(h, p).map(|r| r.r))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(SystemKind::Reduced, rows, tolerance))
}

/// Runs the full system over a point set (8 real slots per point),
/// detecting a constant scale on system C when the plain check fails.
pub fn report_full(
    om: &dyn ScalarField,
    points: &[[f64; 8]],
    tolerance: f64,
) -> Result<ResidualReport> {
    let full: Vec<FullResiduals> = points
        .iter()
        .map(|x| full_residuals_at(om, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate_full(&full, tolerance))
}

fn apply_scale_detection(report: &mut ResidualReport, full: &[FullResiduals]) {
    let tolerance = report.tolerance;
    if !report.pass {
        if let Some(scale) = detect_scale(full, tolerance) {
            // re-judge with C's right side s·δ instead of δ
            let adjusted_sup = full
                .iter()
                .map(|f| {
                    let mut m = f.a12.norm().max(f.b12.norm());
                    m = m.max(f.c[0][1].norm()).max(f.c[1][0].norm());
                    m = m.max((f.raw_diag[0] - scale).norm());
                    m = m.max((f.raw_diag[1] - scale).norm());
                    m
                })
                .fold(0.0, f64::max);
            if adjusted_sup <= tolerance {
                report.sup_norm = adjusted_sup;
                report.pass = true;
                report.detected_scale = Some(scale);
            }
        }
    }
}

/// A single constant s with C_raw ≈ s·I across all points: off-diagonal and
/// A, B entries must already be within tolerance and the raw diagonal must
/// be real with relative spread below 1e−6.
fn detect_scale(full: &[FullResiduals], tolerance: f64) -> Option<f64> {
    if full.is_empty() {
        return None;
    }
    for f in full {
        if f.c[0][1].norm() > tolerance
            || f.c[1][0].norm() > tolerance
            || f.a12.norm() > tolerance
            || f.b12.norm() > tolerance
        {
            return None;
        }
    }
    let diags: Vec<Complex64> = full.iter().flat_map(|f| f.raw_diag).collect();
    let mean: Complex64 = diags.iter().sum::<Complex64>() / diags.len() as f64;
    if mean.norm() < 1e-12 || mean.im.abs() > SCALE_SPREAD_TOL * mean.norm() {
        return None;
    }
    let spread = diags
        .iter()
        .map(|d| (d - mean).norm())
        .fold(0.0, f64::max)
        / mean.norm();
    (spread < SCALE_SPREAD_TOL).then_some(mean.re)
}

/// Named perturbations of the flat reduced potential that violate the six
/// equations; every member fails both the reduced and full systems and the
/// form-algebra oracle on the standard grids.
pub fn violation_suite() -> Vec<Potential> {
    use reduced_idx::*;
    let q = || Expr::complex_var(Q_RE, Q_IM);
    let zeta = || Expr::complex_var(Z_RE, Z_IM);
    let base = || flat_h().expr().clone();
    let make = |name: &str, expr: Expr| {
        Potential::new(name, CoordSystem::Reduced, Domain::All, expr)
    };
    vec![
        make(
            "flat-plus-v-cubed",
            base() + Expr::real(0.1) * Expr::Var(V).powi(3),
        ),
        make(
            "flat-plus-q-quartic",
            base() + Expr::real(0.05) * q().modulus_sq().powi(2),
        ),
        make(
            "flat-plus-exp-rho-v",
            base() + Expr::real(0.1) * Expr::Var(RHO).exp() * Expr::Var(V),
        ),
        make(
            "flat-plus-zeta-quartic",
            base() + Expr::real(0.05) * zeta().modulus_sq().powi(2) * Expr::Var(RHO).exp(),
        ),
        make(
            "flat-plus-v-re-q",
            base() + Expr::real(0.4) * Expr::Var(V) * Expr::Var(Q_RE),
        ),
    ]
}
