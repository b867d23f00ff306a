//! Closed expression vocabulary for scalar fields.
//!
//! Fields are composed from arithmetic, exp, log, sqrt, squared modulus and
//! conjugation over real coordinate variables, so every built-in potential
//! evaluates to an exact [`Jet`] at any supported order.

use num_complex::Complex64;

use crate::error::Result;
use crate::jets::Jet;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    /// Real coordinate variable by layout index.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sqrt(Box<Expr>),
    Conj(Box<Expr>),
    /// |·|², i.e. the argument times its conjugate.
    ModSq(Box<Expr>),
}

impl Expr {
    pub fn real(x: f64) -> Expr {
        Expr::Const(Complex64::new(x, 0.0))
    }

    pub fn imag_unit() -> Expr {
        Expr::Const(Complex64::i())
    }

    /// The complex coordinate with real slots (re, im) as Var(re) + i·Var(im).
    pub fn complex_var(re: usize, im: usize) -> Expr {
        Expr::Var(re) + Expr::imag_unit() * Expr::Var(im)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn conj(self) -> Expr {
        Expr::Conj(Box::new(self))
    }

    pub fn modulus_sq(self) -> Expr {
        Expr::ModSq(Box::new(self))
    }

    /// Small nonnegative integer power by repeated multiplication.
    pub fn powi(self, n: u32) -> Expr {
        match n {
            0 => Expr::real(1.0),
            _ => {
                let mut out = self.clone();
                for _ in 1..n {
                    out = out * self.clone();
                }
                out
            }
        }
    }

    /// Evaluate to a jet of the requested order at a real coordinate point.
    pub fn eval(&self, point: &[f64], order: u8) -> Result<Jet> {
        let dim = point.len();
        Ok(match self {
            Expr::Const(z) => Jet::constant(dim, order, *z),
            Expr::Var(i) => Jet::variable(dim, order, *i, point[*i]),
            Expr::Add(a, b) => a.eval(point, order)?.add(&b.eval(point, order)?),
            Expr::Sub(a, b) => a.eval(point, order)?.sub(&b.eval(point, order)?),
            Expr::Mul(a, b) => a.eval(point, order)?.mul(&b.eval(point, order)?),
            Expr::Div(a, b) => a.eval(point, order)?.div(&b.eval(point, order)?)?,
            Expr::Neg(a) => a.eval(point, order)?.scale((-1.0).into()),
            Expr::Exp(a) => a.eval(point, order)?.exp(),
            Expr::Ln(a) => a.eval(point, order)?.ln()?,
            Expr::Sqrt(a) => a.eval(point, order)?.sqrt()?,
            Expr::Conj(a) => a.eval(point, order)?.conj(),
            Expr::ModSq(a) => a.eval(point, order)?.modulus_sq(),
        })
    }

    /// Replace every Var(i) with args[i]; ordinary function composition.
    pub fn subst(&self, args: &[Expr]) -> Expr {
        let rec = |e: &Expr| Box::new(e.subst(args));
        match self {
            Expr::Const(z) => Expr::Const(*z),
            Expr::Var(i) => args[*i].clone(),
            Expr::Add(a, b) => Expr::Add(rec(a), rec(b)),
            Expr::Sub(a, b) => Expr::Sub(rec(a), rec(b)),
            Expr::Mul(a, b) => Expr::Mul(rec(a), rec(b)),
            Expr::Div(a, b) => Expr::Div(rec(a), rec(b)),
            Expr::Neg(a) => Expr::Neg(rec(a)),
            Expr::Exp(a) => Expr::Exp(rec(a)),
            Expr::Ln(a) => Expr::Ln(rec(a)),
            Expr::Sqrt(a) => Expr::Sqrt(rec(a)),
            Expr::Conj(a) => Expr::Conj(rec(a)),
            Expr::ModSq(a) => Expr::ModSq(rec(a)),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
