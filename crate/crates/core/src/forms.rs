//! Pointwise form-algebra oracle for the hyperkähler property.
//!
//! From a potential Ω the Kähler form ω₁ = (i/2)∂∂̄Ω is assembled as a real
//! 2-form in the 8 real coordinates, alongside the constant Darboux forms
//! ω₂ = Re Σ dqʲ∧dpⱼ and ω₃ = Im Σ dqʲ∧dpⱼ. With the metric candidate
//! g = ω₁(·, I·) and the endomorphisms J = g⁻¹ω₂, K = g⁻¹ω₃, the structure
//! is hyperkähler at the point exactly when the quaternion identities
//! J² = K² = −1, JK = ±I hold; the top-degree wedge identities
//! ω₁⁴ = c·ω₂⁴ = c·ω₃⁴ must hold as well. The sign of JK and the constant c
//! are measured once on the flat potential (where everything is exact) and
//! frozen; this pins the convention factors, in particular the ½ in ω₁,
//! empirically rather than by bookkeeping.
//!
//! The oracle is independent of the Poisson-bracket residual path: it goes
//! through real 2-form matrices and dense 4-form wedge algebra instead of
//! Wirtinger brackets.

use nalgebra::SMatrix;
use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::jets::{ScalarField, WirtingerView};

type Mat8 = SMatrix<f64, 8, 8>;

/// Real 2-form on ℝ⁸; the coefficient matrix is antisymmetric by
/// construction (only the upper triangle is ever written).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm8 {
    m: Mat8,
}

impl TwoForm8 {
    /// Builds from the strict upper triangle; the lower triangle mirrors it
    /// with opposite sign, so antisymmetry is exact.
    pub fn from_upper(f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Mat8::zeros();
        for a in 0..8 {
            for b in (a + 1)..8 {
                let v = f(a, b);
                m[(a, b)] = v;
                m[(b, a)] = -v;
            }
        }
        Self { m }
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        self.m[(a, b)]
    }

    pub fn matrix(&self) -> &Mat8 {
        &self.m
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }
}

const N_QUADS: usize = 70;

fn comb(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Sorted 4-subsets of {0..8} in lexicographic order.
fn quads() -> &'static Vec<[usize; 4]> {
    static QUADS: OnceLock<Vec<[usize; 4]>> = OnceLock::new();
    QUADS.get_or_init(|| {
        let mut out = Vec::with_capacity(N_QUADS);
        for a in 0..8 {
            for b in (a + 1)..8 {
                for c in (b + 1)..8 {
                    for d in (c + 1)..8 {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    })
}

/// Lexicographic rank of a sorted 4-subset: every admissible smaller value
/// at a position contributes the count of completions above it.
fn quad_index(s: &[usize; 4]) -> usize {
    let mut idx = 0;
    let mut prev: isize = -1;
    for (pos, &x) in s.iter().enumerate() {
        for y in (prev + 1) as usize..x {
            idx += comb(8 - y - 1, 3 - pos);
        }
        prev = x as isize;
    }
    idx
}

/// Real 4-form on ℝ⁸, stored densely over the 70 ordered basis elements.
#[derive(Debug, Clone, PartialEq)]
pub struct FourForm8 {
    c: Vec<f64>,
}

impl FourForm8 {
    pub fn zero() -> Self {
        Self {
            c: vec![0.0; N_QUADS],
        }
    }

    pub fn coeff(&self, s: &[usize; 4]) -> f64 {
        self.c[quad_index(s)]
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn sub(&self, rhs: &FourForm8) -> FourForm8 {
        FourForm8 {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> FourForm8 {
        FourForm8 {
            c: self.c.iter().map(|a| a * k).collect(),
        }
    }
}

/// Wedge product of 2-forms, expanded over the (2,2) shuffles.
pub fn wedge(alpha: &TwoForm8, beta: &TwoForm8) -> FourForm8 {
    let mut out = FourForm8::zero();
    for (n, &[i, j, k, l]) in quads().iter().enumerate() {
        let a = |x, y| alpha.coeff(x, y);
        let b = |x, y| beta.coeff(x, y);
        out.c[n] = a(i, j) * b(k, l) - a(i, k) * b(j, l) + a(i, l) * b(j, k)
            + a(k, l) * b(i, j)
            - a(j, l) * b(i, k)
            + a(j, k) * b(i, l);
    }
    out
}

/// Coefficient of the top form dx¹∧…∧dx⁸ in the wedge of two 4-forms.
pub fn top_coeff(x: &FourForm8, y: &FourForm8) -> f64 {
    let mut total = 0.0;
    for (n, s) in quads().iter().enumerate() {
        // complement and the sign of the shuffle (s, s_c)
        let mut in_s = [false; 8];
        for &i in s {
            in_s[i] = true;
        }
        let sc: Vec<usize> = (0..8).filter(|&i| !in_s[i]).collect();
        let perm = [s[0], s[1], s[2], s[3], sc[0], sc[1], sc[2], sc[3]];
        let mut sign = 1.0;
        for a in 0..8 {
            for b in (a + 1)..8 {
                if perm[a] > perm[b] {
                    sign = -sign;
                }
            }
        }
        total += sign * x.c[n] * y.c[quad_index(&[sc[0], sc[1], sc[2], sc[3]])];
    }
    total
}

/// Standard complex structure of the chart in the interleaved real basis
/// (x¹, y¹, …, x⁴, y⁴): I e_x = e_y, I e_y = −e_x.
pub fn standard_complex_structure() -> Mat8 {
    let mut m = Mat8::zeros();
    for k in 0..4 {
        m[(2 * k + 1, 2 * k)] = 1.0;
        m[(2 * k, 2 * k + 1)] = -1.0;
    }
    m
}

/// ω₁ = (i/2)∂∂̄Ω as a real 2-form, from the order-2 jet of Ω.
pub fn omega1_at(om: &dyn ScalarField, x: &[f64; 8]) -> Result<TwoForm8> {
    let jet = om.eval_jet(x, 2)?;
    let view = WirtingerView::new(&jet, om.layout());
    let mut h = [[Complex64::ZERO; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            h[a][b] = view.second(a, false, b, true);
        }
    }
    // expand (i/2) Σ h_ab dz^a ∧ dz̄^b over the real basis
    let mut w = [[Complex64::ZERO; 8]; 8];
    for a in 0..4 {
        for b in 0..4 {
            let coeff = Complex64::new(0.0, 0.5) * h[a][b];
            // dz^a has complex coefficients u, dz̄^b has v
            let u = [(2 * a, Complex64::ONE), (2 * a + 1, Complex64::i())];
            let v = [(2 * b, Complex64::ONE), (2 * b + 1, -Complex64::i())];
            for (c, uc) in u {
                for (d, vd) in v {
                    w[c][d] += coeff * uc * vd;
                    w[d][c] -= coeff * uc * vd;
                }
            }
        }
    }
    // Hermitian h makes the matrix real; reject wildly non-real input
    let mut max_im: f64 = 0.0;
    let mut max_re: f64 = 0.0;
    for row in &w {
        for z in row {
            max_im = max_im.max(z.im.abs());
            max_re = max_re.max(z.re.abs());
        }
    }
    if max_im > 1e-8 * (1.0 + max_re) {
        return Err(Error::invalid(
            "omega1 is not a real form; the potential is not real-valued",
        ));
    }
    Ok(TwoForm8::from_upper(|a, b| w[a][b].re))
}

/// The constant forms ω₂ = Re Σ dqʲ∧dpⱼ and ω₃ = Im Σ dqʲ∧dpⱼ.
pub fn omega_plus() -> (TwoForm8, TwoForm8) {
    let mut re = [[0.0f64; 8]; 8];
    let mut im = [[0.0f64; 8]; 8];
    for j in 0..2 {
        let u = [(2 * j, Complex64::ONE), (2 * j + 1, Complex64::i())];
        let v = [
            (2 * j + 4, Complex64::ONE),
            (2 * j + 5, Complex64::i()),
        ];
        for (c, uc) in u {
            for (d, vd) in v {
                let z = uc * vd;
                re[c][d] += z.re;
                re[d][c] -= z.re;
                im[c][d] += z.im;
                im[d][c] -= z.im;
            }
        }
    }
    (
        TwoForm8::from_upper(|a, b| re[a][b]),
        TwoForm8::from_upper(|a, b| im[a][b]),
    )
}

/// Constants measured once on the flat potential and then frozen.
#[derive(Debug, Clone, Copy)]
pub struct FormsCalibration {
    /// sign s with JK = s·I on flat space
    pub quaternion_sign: f64,
    /// c with ω₁⁴ = c·ω₂⁴ on flat space
    pub volume_ratio: f64,
}

/// One-time calibration on the flat potential at a generic point.
pub fn calibrate_on_flat() -> Result<FormsCalibration> {
    let om = crate::potentials::flat_omega();
    let x = [0.31, -0.62, 0.48, 0.17, 0.93, -0.27, 0.55, 0.71];
    let w1 = omega1_at(&om, &x)?;
    let (w2, _w3) = omega_plus();
    let imat = standard_complex_structure();
    let g = w1.matrix() * imat;
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::domain("flat metric candidate is degenerate"))?;
    let j = ginv * w2.matrix();
    let k = ginv * _w3.matrix();
    let jk = j * k;
    // project onto the complex structure to read off the sign
    let num: f64 = (0..8).map(|a| (0..8).map(|b| jk[(a, b)] * imat[(a, b)]).sum::<f64>()).sum();
    let den: f64 = (0..8).map(|a| (0..8).map(|b| imat[(a, b)] * imat[(a, b)]).sum::<f64>()).sum();
    let quaternion_sign = (num / den).round();
    let w11 = wedge(&w1, &w1);
    let w22 = wedge(&w2, &w2);
    let volume_ratio = top_coeff(&w11, &w11) / top_coeff(&w22, &w22);
    Ok(FormsCalibration {
        quaternion_sign,
        volume_ratio,
    })
}

fn max_abs(m: &Mat8) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Pointwise hyperkähler defect: the maximum violation over the quaternion
/// identities of (g, I, J, K) and the calibrated top-form volume identities.
/// Vanishes exactly where Ω solves the symplectic Monge-Ampère system.
pub fn hyperkahler_algebra_defect(
    om: &dyn ScalarField,
    x: &[f64; 8],
    calib: &FormsCalibration,
) -> Result<f64> {
    let w1 = omega1_at(om, x)?;
    let (w2, w3) = omega_plus();
    let imat = standard_complex_structure();
    let g = w1.matrix() * imat;
    let gsym = max_abs(&(g - g.transpose()));
    let ginv = g.try_inverse().ok_or_else(|| {
        Error::domain("omega1 is degenerate at the point (metric candidate not invertible)")
    })?;
    let j = ginv * w2.matrix();
    let k = ginv * w3.matrix();
    let id = Mat8::identity();
    let d_j = max_abs(&(j * j + id));
    let d_k = max_abs(&(k * k + id));
    let d_jk = max_abs(&(j * k - calib.quaternion_sign * imat));

    let w11 = wedge(&w1, &w1);
    let w22 = wedge(&w2, &w2);
    let w33 = wedge(&w3, &w3);
    let t11 = top_coeff(&w11, &w11);
    let t22 = top_coeff(&w22, &w22);
    let t33 = top_coeff(&w33, &w33);
    let scale = t11.abs().max(1.0);
    let d_v2 = (t11 - calib.volume_ratio * t22).abs() / scale;
    let d_v3 = (t11 - calib.volume_ratio * t33).abs() / scale;

    Ok(gsym.max(d_j).max(d_k).max(d_jk).max(d_v2).max(d_v3))
}
