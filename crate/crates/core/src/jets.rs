//! Forward-mode derivative engine.
//!
//! A [`Jet`] carries the value and the exact first, second and (optionally)
//! third real partial derivatives of a complex-valued scalar field at a
//! point. Derivatives propagate through arithmetic and the closed unary
//! vocabulary (exp, ln, sqrt, reciprocal, conjugation) by the product and
//! chain rules, so there is no truncation error.
//!
//! Hessians and third-derivative tensors are stored in packed symmetric
//! form, which makes symmetry exact by construction rather than a numerical
//! accident.
//!
//! Complex coordinates are pairs of real slots declared in a
//! [`RealCoordsLayout`]; the [`WirtingerView`] assembles Wirtinger
//! derivatives (d_z = ½(∂_x − i∂_y), d_zbar = ½(∂_x + i∂_y)) from the real
//! partials.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ordered real coordinate labels plus the pairs that form complex
/// coordinates (index of the real part, index of the imaginary part).
#[derive(Debug, Clone, PartialEq)]
pub struct RealCoordsLayout {
    names: Vec<String>,
    complex_pairs: Vec<(usize, usize)>,
}

impl RealCoordsLayout {
    pub fn new(names: &[&str], complex_pairs: &[(usize, usize)]) -> Result<Self> {
        let dim = names.len();
        let mut seen = vec![false; dim];
        for &(re, im) in complex_pairs {
            if re >= dim || im >= dim {
                return Err(Error::invalid(format!(
                    "complex pair ({re}, {im}) out of bounds for {dim} coordinates"
                )));
            }
            if seen[re] || seen[im] || re == im {
                return Err(Error::invalid(format!(
                    "complex pair ({re}, {im}) overlaps another pair"
                )));
            }
            seen[re] = true;
            seen[im] = true;
        }
        Ok(Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            complex_pairs: complex_pairs.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn complex_pairs(&self) -> &[(usize, usize)] {
        &self.complex_pairs
    }
}

/// Packed index of the unordered pair (a, b), a <= b, over `dim` slots.
#[inline]
fn idx2(dim: usize, a: usize, b: usize) -> usize {
    debug_assert!(a <= b && b < dim);
    a * (2 * dim - a + 1) / 2 + (b - a)
}

fn len2(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Packed index of the unordered triple (a, b, c), a <= b <= c.
#[inline]
fn idx3(dim: usize, a: usize, b: usize, c: usize) -> usize {
    debug_assert!(a <= b && b <= c && c < dim);
    // triples whose smallest index is < a, then pairs within the tail.
    let mut offset = 0;
    for k in 0..a {
        let m = dim - k;
        offset += m * (m + 1) / 2;
    }
    offset + idx2(dim - a, b - a, c - a)
}

fn len3(dim: usize) -> usize {
    dim * (dim + 1) * (dim + 2) / 6
}

#[inline]
fn sort2(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
fn sort3(a: usize, b: usize, c: usize) -> (usize, usize, usize) {
    let (a, b) = sort2(a, b);
    let (b, c) = sort2(b, c);
    let (a, b) = sort2(a, b);
    (a, b, c)
}

/// Value plus exact partial derivatives of a scalar field at a point.
///
/// `order` is 0..=3; order 0 carries a bare value and appears only as the
/// output of derivative-consuming operations such as brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    order: u8,
    dim: usize,
    value: Complex64,
    grad: Vec<Complex64>,
    hess: Vec<Complex64>,
    third: Vec<Complex64>,
}

impl Jet {
    pub fn constant(dim: usize, order: u8, value: Complex64) -> Self {
        assert!(order <= 3);
        Self {
            order,
            dim,
            value,
            grad: vec![Complex64::ZERO; if order >= 1 { dim } else { 0 }],
            hess: vec![Complex64::ZERO; if order >= 2 { len2(dim) } else { 0 }],
            third: vec![Complex64::ZERO; if order >= 3 { len3(dim) } else { 0 }],
        }
    }

    /// Seed for the coordinate variable `index`.
    pub fn variable(dim: usize, order: u8, index: usize, value: f64) -> Self {
        let mut jet = Self::constant(dim, order, Complex64::new(value, 0.0));
        if order >= 1 {
            jet.grad[index] = Complex64::ONE;
        }
        jet
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn grad(&self, a: usize) -> Complex64 {
        self.grad[a]
    }

    pub fn hess(&self, a: usize, b: usize) -> Complex64 {
        let (a, b) = sort2(a, b);
        self.hess[idx2(self.dim, a, b)]
    }

    pub fn third(&self, a: usize, b: usize, c: usize) -> Complex64 {
        let (a, b, c) = sort3(a, b, c);
        self.third[idx3(self.dim, a, b, c)]
    }

    /// Restriction to a lower order; drops the higher derivative data.
    pub fn truncated(&self, order: u8) -> Jet {
        assert!(order <= self.order);
        Jet {
            order,
            dim: self.dim,
            value: self.value,
            grad: if order >= 1 { self.grad.clone() } else { vec![] },
            hess: if order >= 2 { self.hess.clone() } else { vec![] },
            third: if order >= 3 { self.third.clone() } else { vec![] },
        }
    }

    fn same_shape(&self, rhs: &Jet) -> (u8, usize) {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        assert_eq!(self.order, rhs.order, "jet order mismatch");
        (self.order, self.dim)
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        self.same_shape(rhs);
        let mut out = self.clone();
        out.value += rhs.value;
        for (x, y) in out.grad.iter_mut().zip(&rhs.grad) {
            *x += y;
        }
        for (x, y) in out.hess.iter_mut().zip(&rhs.hess) {
            *x += y;
        }
        for (x, y) in out.third.iter_mut().zip(&rhs.third) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        self.add(&rhs.scale((-1.0).into()))
    }

    pub fn scale(&self, k: Complex64) -> Jet {
        let mut out = self.clone();
        out.value *= k;
        out.grad.iter_mut().for_each(|x| *x *= k);
        out.hess.iter_mut().for_each(|x| *x *= k);
        out.third.iter_mut().for_each(|x| *x *= k);
        out
    }

    /// Leibniz product up to the carried order.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        let (order, dim) = self.same_shape(rhs);
        let mut out = Jet::constant(dim, order, self.value * rhs.value);
        if order >= 1 {
            for a in 0..dim {
                out.grad[a] = self.grad[a] * rhs.value + self.value * rhs.grad[a];
            }
        }
        if order >= 2 {
            for a in 0..dim {
                for b in a..dim {
                    out.hess[idx2(dim, a, b)] = self.hess(a, b) * rhs.value
                        + self.grad[a] * rhs.grad[b]
                        + self.grad[b] * rhs.grad[a]
                        + self.value * rhs.hess(a, b);
                }
            }
        }
        if order >= 3 {
            for a in 0..dim {
                for b in a..dim {
                    for c in b..dim {
                        out.third[idx3(dim, a, b, c)] = self.third(a, b, c) * rhs.value
                            + self.hess(a, b) * rhs.grad[c]
                            + self.hess(a, c) * rhs.grad[b]
                            + self.hess(b, c) * rhs.grad[a]
                            + self.grad[a] * rhs.hess(b, c)
                            + self.grad[b] * rhs.hess(a, c)
                            + self.grad[c] * rhs.hess(a, b)
                            + self.value * rhs.third(a, b, c);
                    }
                }
            }
        }
        out
    }

    /// Chain rule through an analytic map with derivatives d1, d2, d3 at the
    /// jet's value.
    fn chain(&self, value: Complex64, d1: Complex64, d2: Complex64, d3: Complex64) -> Jet {
        let dim = self.dim;
        let order = self.order;
        let mut out = Jet::constant(dim, order, value);
        if order >= 1 {
            for a in 0..dim {
                out.grad[a] = d1 * self.grad[a];
            }
        }
        if order >= 2 {
            for a in 0..dim {
                for b in a..dim {
                    out.hess[idx2(dim, a, b)] =
                        d2 * self.grad[a] * self.grad[b] + d1 * self.hess(a, b);
                }
            }
        }
        if order >= 3 {
            for a in 0..dim {
                for b in a..dim {
                    for c in b..dim {
                        out.third[idx3(dim, a, b, c)] = d3
                            * self.grad[a]
                            * self.grad[b]
                            * self.grad[c]
                            + d2 * (self.hess(a, b) * self.grad[c]
                                + self.hess(a, c) * self.grad[b]
                                + self.hess(b, c) * self.grad[a])
                            + d1 * self.third(a, b, c);
                    }
                }
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e, e)
    }

    /// Principal branch; errors on the branch cut (nonpositive real axis).
    pub fn ln(&self) -> Result<Jet> {
        let z = self.value;
        if z.im == 0.0 && z.re <= 0.0 {
            return Err(Error::domain(format!(
                "log argument must lie off the nonpositive real axis (got {z})"
            )));
        }
        let d1 = z.inv();
        let d2 = -d1 * d1;
        let d3 = 2.0 * d1 * d1 * d1;
        Ok(self.chain(z.ln(), d1, d2, d3))
    }

    /// Principal branch; errors on the cut and at zero (where the derivative
    /// is unbounded).
    pub fn sqrt(&self) -> Result<Jet> {
        let z = self.value;
        if z.im == 0.0 && z.re < 0.0 {
            return Err(Error::domain(format!(
                "sqrt argument must lie off the negative real axis (got {z})"
            )));
        }
        if z.norm_sqr() == 0.0 {
            return Err(Error::domain("sqrt argument must be nonzero".to_string()));
        }
        let s = z.sqrt();
        let d1 = 0.5 / s;
        let d2 = -0.25 / (s * z);
        let d3 = 0.375 / (s * z * z);
        Ok(self.chain(s, d1, d2, d3))
    }

    pub fn recip(&self) -> Result<Jet> {
        let z = self.value;
        if z.norm_sqr() == 0.0 {
            return Err(Error::domain("division by zero".to_string()));
        }
        let d1 = -1.0 / (z * z);
        let d2 = 2.0 / (z * z * z);
        let d3 = -6.0 / (z * z * z * z);
        Ok(self.chain(z.inv(), d1, d2, d3))
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet> {
        Ok(self.mul(&rhs.recip()?))
    }

    /// Complex conjugate. Legitimate because the underlying variables are
    /// real, so conjugation commutes with every real partial derivative.
    pub fn conj(&self) -> Jet {
        let mut out = self.clone();
        out.value = out.value.conj();
        out.grad.iter_mut().for_each(|x| *x = x.conj());
        out.hess.iter_mut().for_each(|x| *x = x.conj());
        out.third.iter_mut().for_each(|x| *x = x.conj());
        out
    }

    /// Squared modulus |f|² = f · conj(f).
    pub fn modulus_sq(&self) -> Jet {
        self.mul(&self.conj())
    }

    /// Real part, taken entrywise (valid over real variables).
    pub fn real_part(&self) -> Jet {
        let mut out = self.clone();
        out.value = Complex64::new(out.value.re, 0.0);
        out.grad.iter_mut().for_each(|x| *x = Complex64::new(x.re, 0.0));
        out.hess.iter_mut().for_each(|x| *x = Complex64::new(x.re, 0.0));
        out.third.iter_mut().for_each(|x| *x = Complex64::new(x.re, 0.0));
        out
    }

    /// The field ∂_a f as a jet of one order lower.
    pub fn partial(&self, a: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let dim = self.dim;
        let order = self.order - 1;
        let mut out = Jet::constant(dim, order, self.grad[a]);
        if order >= 1 {
            for b in 0..dim {
                out.grad[b] = self.hess(a, b);
            }
        }
        if order >= 2 {
            for b in 0..dim {
                for c in b..dim {
                    out.hess[idx2(dim, b, c)] = self.third(a, b, c);
                }
            }
        }
        out
    }

    /// Wirtinger derivative ∂_z (or ∂_zbar) for the complex coordinate with
    /// real slots (re_idx, im_idx), as a jet of one order lower.
    pub fn wirtinger(&self, re_idx: usize, im_idx: usize, conjugated: bool) -> Jet {
        let dx = self.partial(re_idx);
        let dy = self.partial(im_idx);
        let s = if conjugated {
            Complex64::new(0.0, 0.5)
        } else {
            Complex64::new(0.0, -0.5)
        };
        dx.scale(0.5.into()).add(&dy.scale(s))
    }

    /// Multivariate chain rule: `outer` is a jet in m variables evaluated at
    /// the image point, `inner[i]` the jet of the i-th intermediate variable
    /// over the final coordinates. All inner jets must share dim and order
    /// with the result; `outer.order` must match as well.
    pub fn compose(outer: &Jet, inner: &[Jet]) -> Jet {
        let m = outer.dim;
        assert_eq!(m, inner.len(), "inner jet count must match outer dim");
        let dim = inner[0].dim;
        let order = outer.order;
        for g in inner {
            assert_eq!(g.dim, dim);
            assert!(g.order >= order);
        }
        let mut out = Jet::constant(dim, order, outer.value);
        if order >= 1 {
            for a in 0..dim {
                let mut s = Complex64::ZERO;
                for i in 0..m {
                    s += outer.grad[i] * inner[i].grad[a];
                }
                out.grad[a] = s;
            }
        }
        if order >= 2 {
            for a in 0..dim {
                for b in a..dim {
                    let mut s = Complex64::ZERO;
                    for i in 0..m {
                        for j in 0..m {
                            s += outer.hess(i, j) * inner[i].grad[a] * inner[j].grad[b];
                        }
                        s += outer.grad[i] * inner[i].hess(a, b);
                    }
                    out.hess[idx2(dim, a, b)] = s;
                }
            }
        }
        if order >= 3 {
            for a in 0..dim {
                for b in a..dim {
                    for c in b..dim {
                        let mut s = Complex64::ZERO;
                        for i in 0..m {
                            for j in 0..m {
                                for k in 0..m {
                                    s += outer.third(i, j, k)
                                        * inner[i].grad[a]
                                        * inner[j].grad[b]
                                        * inner[k].grad[c];
                                }
                                s += outer.hess(i, j)
                                    * (inner[i].hess(a, b) * inner[j].grad[c]
                                        + inner[i].hess(a, c) * inner[j].grad[b]
                                        + inner[i].hess(b, c) * inner[j].grad[a]);
                            }
                            s += outer.grad[i] * inner[i].third(a, b, c);
                        }
                        out.third[idx3(dim, a, b, c)] = s;
                    }
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        let ok = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        ok(&self.value)
            && self.grad.iter().all(ok)
            && self.hess.iter().all(ok)
            && self.third.iter().all(ok)
    }
}

/// A scalar field that can report exact derivatives of itself at a point.
pub trait ScalarField {
    fn layout(&self) -> &RealCoordsLayout;

    fn eval_jet(&self, point: &[f64], order: u8) -> Result<Jet>;

    fn eval_value(&self, point: &[f64]) -> Result<Complex64> {
        Ok(self.eval_jet(point, 0)?.value())
    }
}

/// Independent derivative oracle: compares the order-2 jet against central
/// finite differences and returns the maximum absolute deviation over all
/// first and second partials.
///
/// First partials are differenced from field values; second partials are
/// differenced from first-derivative jets at the shifted points, which keeps
/// the roundoff floor at O(eps/step) instead of O(eps/step²).
pub fn finite_difference_check(
    field: &dyn ScalarField,
    point: &[f64],
    step: f64,
) -> Result<f64> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::invalid(format!("step must be positive (got {step})")));
    }
    let dim = point.len();
    let jet = field.eval_jet(point, 2)?;
    let mut shifted = Vec::with_capacity(2 * dim);
    for a in 0..dim {
        for sign in [1.0, -1.0] {
            let mut x = point.to_vec();
            x[a] += sign * step;
            shifted.push(field.eval_jet(&x, 1)?);
        }
    }
    let mut dev: f64 = 0.0;
    for a in 0..dim {
        let plus = &shifted[2 * a];
        let minus = &shifted[2 * a + 1];
        let fd_grad = (plus.value() - minus.value()) / (2.0 * step);
        dev = dev.max((jet.grad(a) - fd_grad).norm());
        for b in 0..dim {
            let fd_hess = (plus.grad(b) - minus.grad(b)) / (2.0 * step);
            dev = dev.max((jet.hess(a, b) - fd_hess).norm());
        }
    }
    Ok(dev)
}

/// Wirtinger derivatives of a jet with respect to the complex coordinates
/// declared in a layout.
pub struct WirtingerView<'a> {
    jet: &'a Jet,
    layout: &'a RealCoordsLayout,
}

impl<'a> WirtingerView<'a> {
    pub fn new(jet: &'a Jet, layout: &'a RealCoordsLayout) -> Self {
        assert_eq!(jet.dim(), layout.dim(), "jet does not match layout");
        Self { jet, layout }
    }

    fn pair(&self, k: usize) -> (usize, usize) {
        self.layout.complex_pairs()[k]
    }

    /// d_z f = ½(f_x − i f_y) for the k-th declared complex coordinate.
    pub fn d_z(&self, k: usize) -> Complex64 {
        let (x, y) = self.pair(k);
        0.5 * (self.jet.grad(x) - Complex64::i() * self.jet.grad(y))
    }

    /// d_zbar f = ½(f_x + i f_y).
    pub fn d_zbar(&self, k: usize) -> Complex64 {
        let (x, y) = self.pair(k);
        0.5 * (self.jet.grad(x) + Complex64::i() * self.jet.grad(y))
    }

    /// Mixed second Wirtinger derivative between the complex coordinates k
    /// and l, each optionally conjugated.
    pub fn second(&self, k: usize, k_bar: bool, l: usize, l_bar: bool) -> Complex64 {
        let (kx, ky) = self.pair(k);
        let (lx, ly) = self.pair(l);
        let sk = if k_bar { Complex64::i() } else { -Complex64::i() };
        let sl = if l_bar { Complex64::i() } else { -Complex64::i() };
        0.25 * (self.jet.hess(kx, lx)
            + sl * self.jet.hess(kx, ly)
            + sk * self.jet.hess(ky, lx)
            + sk * sl * self.jet.hess(ky, ly))
    }
}
