//! Sparse polynomials in the four unknowns `(Tx, Ty, Tz, t)` and the
//! degree reverse lexicographic order used by the elimination.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Number of unknowns.
pub const NVARS: usize = 4;

/// Variable names in precedence order.
pub const VAR_NAMES: [&str; NVARS] = ["Tx", "Ty", "Tz", "t"];

/// Exponent vector over `(Tx, Ty, Tz, t)`.
///
/// The derived `Ord` is plain lexicographic on exponents and only serves
/// map storage; use [`drl_compare`] for the term order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub [u8; NVARS]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0, 0, 0, 0]);
    pub const TX: Monomial = Monomial([1, 0, 0, 0]);
    pub const TY: Monomial = Monomial([0, 1, 0, 0]);
    pub const TZ: Monomial = Monomial([0, 0, 1, 0]);
    pub const T: Monomial = Monomial([0, 0, 0, 1]);

    pub const fn new(tx: u8, ty: u8, tz: u8, t: u8) -> Self {
        Monomial([tx, ty, tz, t])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exponent(&self, var: usize) -> u8 {
        self.0[var]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
        Monomial(e)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Value at `x = (Tx, Ty, Tz, t)`.
    pub fn eval(&self, x: &[f64; NVARS]) -> f64 {
        self.0
            .iter()
            .zip(x.iter())
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }

    /// All monomials of total degree at most `max_degree`, in ascending DRL order.
    pub fn all_up_to(max_degree: u32) -> Vec<Monomial> {
        let d = max_degree as u8;
        let mut out = Vec::new();
        for a in 0..=d {
            for b in 0..=d - a {
                for c in 0..=d - a - b {
                    for e in 0..=d - a - b - c {
                        out.push(Monomial([a, b, c, e]));
                    }
                }
            }
        }
        out.sort_by(drl_compare);
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Monomial::ONE {
            return write!(f, "1");
        }
        let mut first = true;
        for (name, &e) in VAR_NAMES.iter().zip(self.0.iter()) {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Degree reverse lexicographic order with precedence `Tx > Ty > Tz > t`.
///
/// `a ≺ b` iff the last nonzero entry of
/// `(deg₁(b) − deg₁(a), …, deg₄(b) − deg₄(a), deg(a) − deg(b))` is negative.
pub fn drl_compare(a: &Monomial, b: &Monomial) -> Ordering {
    let mut diffs = [0i32; NVARS + 1];
    for i in 0..NVARS {
        diffs[i] = b.0[i] as i32 - a.0[i] as i32;
    }
    diffs[NVARS] = a.degree() as i32 - b.degree() as i32;
    match diffs.iter().rev().find(|&&d| d != 0) {
        None => Ordering::Equal,
        Some(&d) if d < 0 => Ordering::Less,
        Some(_) => Ordering::Greater,
    }
}

/// Zero-sized handle for the DRL order, for APIs that take an order value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DrlOrder;

impl DrlOrder {
    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        drl_compare(a, b)
    }
}

/// Sparse real polynomial in `(Tx, Ty, Tz, t)`. Zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly4 {
    terms: BTreeMap<Monomial, f64>,
}

impl Poly4 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, f64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &f64)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest monomial under DRL.
    pub fn leading_monomial(&self) -> Option<Monomial> {
        self.terms.keys().copied().max_by(drl_compare)
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly4 {
        Poly4 {
            terms: self.terms.iter().map(|(k, &c)| (k.mul(m), c)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Poly4 {
        Poly4::from_terms(self.terms.iter().map(|(&m, &c)| (m, c * s)))
    }

    pub fn add(&self, other: &Poly4) -> Poly4 {
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn mul(&self, other: &Poly4) -> Poly4 {
        let mut out = Poly4::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        out
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Poly4 {
        match self.leading_monomial() {
            Some(lm) => self.scale(1.0 / self.coeff(&lm)),
            None => self.clone(),
        }
    }

    pub fn eval(&self, x: &[f64; NVARS]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(x)).sum()
    }

    /// Partial derivatives at `x`.
    pub fn gradient(&self, x: &[f64; NVARS]) -> [f64; NVARS] {
        let mut g = [0.0; NVARS];
        for (m, &c) in &self.terms {
            for (var, gv) in g.iter_mut().enumerate() {
                let e = m.0[var];
                if e == 0 {
                    continue;
                }
                let mut d = m.0;
                d[var] -= 1;
                *gv += c * e as f64 * Monomial(d).eval(x);
            }
        }
        g
    }
}

impl fmt::Display for Poly4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ms: Vec<_> = self.terms.iter().collect();
        ms.sort_by(|a, b| drl_compare(b.0, a.0));
        for (i, (m, c)) in ms.into_iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{m}")?;
        }
        Ok(())
    }
}
