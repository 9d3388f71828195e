//! Quotient-ring bases, normal forms and multiplication (action) matrices.

use nalgebra::DMatrix;

use super::elimination::GroebnerBasis;
use crate::error::{Error, Result};
use crate::poly::{drl_compare, Monomial, Poly4};

/// Coefficients this far below the working polynomial's scale are dropped
/// when they have no reducer.
pub const ESCAPE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientBasis {
    monomials: Vec<Monomial>,
}

impl QuotientBasis {
    pub fn new(monomials: Vec<Monomial>) -> Self {
        Self { monomials }
    }

    /// `{Tx, Ty, Tz, Tz·t}`: the standard monomials of odd total degree in
    /// the translation. Multiplication by `t` keeps this subspace closed
    /// because every polynomial is homogeneous in `T` of a fixed parity.
    pub fn odd() -> Self {
        Self::new(vec![
            Monomial::TX,
            Monomial::TY,
            Monomial::TZ,
            Monomial::new(0, 0, 1, 1),
        ])
    }

    /// `{1, t, Tz², t²}`: the even counterpart of [`QuotientBasis::odd`].
    pub fn even() -> Self {
        Self::new(vec![
            Monomial::ONE,
            Monomial::T,
            Monomial::new(0, 0, 2, 0),
            Monomial::new(0, 0, 0, 2),
        ])
    }

    /// Monomials not divisible by any of `leading`, searched up to
    /// `max_degree`. Returns `None` when some monomial of degree
    /// `max_degree` is still standard, i.e. the quotient looks infinite at
    /// that bound.
    pub fn standard_monomials(leading: &[Monomial], max_degree: u32) -> Option<Self> {
        let mut out: Vec<Monomial> = Monomial::all_up_to(max_degree)
            .into_iter()
            .filter(|m| !leading.iter().any(|l| l.divides(m)))
            .collect();
        if out.iter().any(|m| m.degree() == max_degree) {
            return None;
        }
        out.sort_by(|a, b| drl_compare(b, a));
        Some(Self::new(out))
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.monomials.iter().position(|b| b == m)
    }
}

/// Coordinates of the normal form of `p` in `basis`.
///
/// Repeatedly cancels the DRL-largest term outside the basis with the
/// reducer carrying that leading monomial.
pub fn normal_form(gb: &GroebnerBasis, basis: &QuotientBasis, p: &Poly4) -> Result<Vec<f64>> {
    let mut work = p.clone();
    let mut coords = vec![0.0; basis.len()];
    loop {
        let scale = work.terms().fold(0.0f64, |a, (_, c)| a.max(c.abs()));
        let next = work
            .terms()
            .filter(|(m, _)| basis.index_of(m).is_none())
            .map(|(m, c)| (*m, *c))
            .max_by(|a, b| drl_compare(&a.0, &b.0));
        let Some((mono, c)) = next else { break };
        match gb.reducer(&mono) {
            Some(r) => work = work.add(&r.scale(-c)),
            None if c.abs() <= ESCAPE_TOLERANCE * scale => {
                work = work.add(&Poly4::from_terms([(mono, -c)]));
            }
            None => return Err(Error::ReductionEscape { monomial: mono }),
        }
    }
    for (m, c) in work.terms() {
        coords[basis.index_of(m).expect("only basis terms remain")] = *c;
    }
    Ok(coords)
}

/// Matrix of multiplication by `form` on the quotient subspace spanned by
/// `basis`: column `j` holds the coordinates of `NF(form · b_j)`.
#[derive(Debug, Clone)]
pub struct ActionMatrix {
    pub matrix: DMatrix<f64>,
    pub basis: QuotientBasis,
}

pub fn action_matrix(
    gb: &GroebnerBasis,
    basis: &QuotientBasis,
    form: &Poly4,
) -> Result<ActionMatrix> {
    if form.degree() > 1 {
        return Err(Error::InvalidConfig(format!(
            "action form must be linear, got degree {}",
            form.degree()
        )));
    }
    let n = basis.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (j, b) in basis.monomials().iter().enumerate() {
        let image = form.mul_monomial(b);
        let nf = normal_form(gb, basis, &image)?;
        for (i, v) in nf.into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    Ok(ActionMatrix {
        matrix,
        basis: basis.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_monomial_enumeration() {
        let lead = [
            Monomial::new(2, 0, 0, 0),
            Monomial::new(1, 1, 0, 0),
            Monomial::new(0, 2, 0, 0),
            Monomial::new(1, 0, 1, 0),
            Monomial::new(0, 1, 1, 0),
            Monomial::new(1, 0, 0, 1),
            Monomial::new(0, 1, 0, 1),
            Monomial::new(0, 0, 3, 0),
            Monomial::new(0, 0, 2, 1),
            Monomial::new(0, 0, 1, 2),
            Monomial::new(0, 0, 0, 3),
        ];
        let b = QuotientBasis::standard_monomials(&lead, 6).unwrap();
        assert_eq!(b.len(), 8);
        for m in QuotientBasis::odd()
            .monomials()
            .iter()
            .chain(QuotientBasis::even().monomials())
        {
            assert!(b.index_of(m).is_some(), "{m}");
        }
        // dropping t³ leaves every pure power of t standard
        assert!(QuotientBasis::standard_monomials(&lead[..10], 6).is_none());
    }
}
