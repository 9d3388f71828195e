//! Elimination templates: which monomial multiples of `f1..f4` become rows
//! of the Macaulay matrix, and the column layout those rows induce.

use std::collections::{BTreeSet, HashMap};

use crate::coplanarity::{coplanarity_poly, normality_poly, Correspondence};
use crate::geometry::BearingVector;
use crate::poly::{drl_compare, Monomial, Poly4};

/// One template row: `multiplier · f_(poly+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemplateRow {
    pub multiplier: Monomial,
    /// Zero-based polynomial index: 0 is the normality constraint `f1`.
    pub poly: usize,
}

#[derive(Debug, Clone)]
pub struct MacaulayTemplate {
    rows: Vec<TemplateRow>,
    columns: Vec<Monomial>,
    column_index: HashMap<Monomial, usize>,
    supports: [Vec<Monomial>; 4],
}

const fn m(tx: u8, ty: u8, tz: u8, t: u8) -> Monomial {
    Monomial::new(tx, ty, tz, t)
}

/// Multipliers of `f4`, ascending in DRL.
const F4_MULTIPLIERS: [Monomial; 18] = [
    m(0, 0, 0, 0),
    m(0, 0, 0, 1),
    m(0, 0, 1, 0),
    m(0, 1, 0, 0),
    m(1, 0, 0, 0),
    m(0, 0, 1, 1),
    m(0, 1, 0, 1),
    m(1, 0, 0, 1),
    m(0, 1, 1, 0),
    m(1, 0, 1, 0),
    m(0, 2, 0, 0),
    m(1, 1, 0, 0),
    m(2, 0, 0, 0),
    m(0, 1, 1, 1),
    m(1, 0, 1, 1),
    m(0, 2, 0, 1),
    m(1, 1, 0, 1),
    m(2, 0, 0, 1),
];

/// Multipliers of `f1`, ascending in DRL.
const F1_MULTIPLIERS: [Monomial; 13] = [
    m(0, 0, 0, 0),
    m(0, 0, 0, 1),
    m(0, 0, 1, 0),
    m(0, 1, 0, 0),
    m(1, 0, 0, 0),
    m(0, 0, 0, 2),
    m(0, 1, 0, 1),
    m(1, 0, 0, 1),
    m(0, 0, 0, 3),
    m(0, 1, 0, 2),
    m(1, 0, 0, 2),
    m(0, 1, 0, 3),
    m(1, 0, 0, 3),
];

/// Monomial supports of the four polynomials for a generic instance.
fn generic_supports() -> [Vec<Monomial>; 4] {
    let generic = Correspondence::new(
        BearingVector::new(0.31, -0.27, 1.13),
        BearingVector::new(-0.19, 0.43, 0.97),
    );
    let f1: Vec<Monomial> = normality_poly().monomials().copied().collect();
    let fk: Vec<Monomial> = coplanarity_poly(&generic).monomials().copied().collect();
    [f1, fk.clone(), fk.clone(), fk]
}

impl MacaulayTemplate {
    /// The compact 65-row template: 18 multiples of `f4`, 17 each of `f3`
    /// and `f2`, and 13 of `f1`, listed in that block order. Its 77 columns
    /// reach total degree 6.
    pub fn compact() -> Self {
        let tz_ty_t = m(0, 1, 1, 1);
        let mut rows = Vec::with_capacity(65);
        rows.extend(F4_MULTIPLIERS.iter().map(|&mu| TemplateRow {
            multiplier: mu,
            poly: 3,
        }));
        for poly in [2, 1] {
            rows.extend(
                F4_MULTIPLIERS
                    .iter()
                    .filter(|&&mu| mu != tz_ty_t)
                    .map(|&mu| TemplateRow {
                        multiplier: mu,
                        poly,
                    }),
            );
        }
        rows.extend(F1_MULTIPLIERS.iter().map(|&mu| TemplateRow {
            multiplier: mu,
            poly: 0,
        }));
        Self::from_rows(rows)
    }

    /// Every multiple `mu · f_i` with total degree at most `max_degree`,
    /// in the same block order as [`MacaulayTemplate::compact`].
    pub fn full(max_degree: u32) -> Self {
        let supports = generic_supports();
        let mut rows = Vec::new();
        for poly in [3, 2, 1, 0] {
            let deg = supports[poly]
                .iter()
                .map(Monomial::degree)
                .max()
                .unwrap_or(0);
            if deg > max_degree {
                continue;
            }
            rows.extend(
                Monomial::all_up_to(max_degree - deg)
                    .into_iter()
                    .map(|mu| TemplateRow {
                        multiplier: mu,
                        poly,
                    }),
            );
        }
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<TemplateRow>) -> Self {
        let supports = generic_supports();
        let mut set = BTreeSet::new();
        for row in &rows {
            for s in &supports[row.poly] {
                set.insert(s.mul(&row.multiplier));
            }
        }
        let mut columns: Vec<Monomial> = set.into_iter().collect();
        columns.sort_by(|a, b| drl_compare(b, a));
        let column_index = columns.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Self {
            rows,
            columns,
            column_index,
            supports,
        }
    }

    pub fn rows(&self) -> &[TemplateRow] {
        &self.rows
    }

    /// Column monomials, DRL-descending.
    pub fn columns(&self) -> &[Monomial] {
        &self.columns
    }

    pub fn column_of(&self, mono: &Monomial) -> Option<usize> {
        self.column_index.get(mono).copied()
    }

    /// `(rows, columns)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.columns.len())
    }

    pub fn max_degree(&self) -> u32 {
        self.columns.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Generic support of polynomial `poly`.
    pub fn support(&self, poly: usize) -> &[Monomial] {
        &self.supports[poly]
    }

    /// Template row as a polynomial, for an instance's `f1..f4`.
    pub fn row_poly(&self, row: usize, polys: &[Poly4; 4]) -> Poly4 {
        let r = self.rows[row];
        polys[r.poly].mul_monomial(&r.multiplier)
    }
}
