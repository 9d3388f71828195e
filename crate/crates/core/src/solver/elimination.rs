//! Gauss-Jordan elimination of a Macaulay matrix and extraction of the
//! reduced rows that act as Gröbner basis elements.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::macaulay::MacaulayMatrix;
use crate::error::{Error, Result};
use crate::poly::{drl_compare, Monomial, Poly4};

/// Entries below this fraction of a row's max-norm are treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Leading monomials the solver's reducers must have.
pub const REQUIRED_LEADING: [Monomial; 3] = [
    Monomial::new(1, 0, 0, 1),
    Monomial::new(0, 1, 0, 1),
    Monomial::new(0, 0, 1, 2),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pivoting {
    /// Rows are processed in template order and never swapped; each row is
    /// reduced by the pivots found so far. A row that reduces to almost
    /// nothing is dropped. Without row exchanges cancellation noise often
    /// survives the zero threshold and creates spurious pivots, so this
    /// mode is kept for inspection rather than solving.
    TemplateOrder,
    /// Column-wise Gauss-Jordan with the largest remaining entry as pivot.
    #[default]
    Partial,
}

/// Reduced row echelon form of the template, viewed as polynomials.
#[derive(Debug, Clone)]
pub struct GroebnerBasis {
    /// Monic, fully reduced rows whose leading monomials minimally
    /// generate the leading-monomial ideal of the row space.
    pub elements: Vec<Poly4>,
    /// Leading monomial of every pivot row.
    pub leading: Vec<Monomial>,
    /// With [`Pivoting::TemplateOrder`]: the rows whose leading monomial
    /// changed during elimination, monic. Empty otherwise.
    pub changed_rows: Vec<Poly4>,
    pub rank: usize,
    reducers: HashMap<Monomial, Poly4>,
}

impl GroebnerBasis {
    /// Fully reduced monic row with leading monomial `lm`, if any.
    pub fn reducer(&self, lm: &Monomial) -> Option<&Poly4> {
        self.reducers.get(lm)
    }

    pub fn reducers(&self) -> impl Iterator<Item = (&Monomial, &Poly4)> {
        self.reducers.iter()
    }
}

/// Eliminates with the default pivoting and checks that the reducers the
/// solver needs are present.
pub fn eliminate_to_groebner(m: &MacaulayMatrix) -> Result<GroebnerBasis> {
    eliminate_with(m, Pivoting::default())
}

pub fn eliminate_with(m: &MacaulayMatrix, pivoting: Pivoting) -> Result<GroebnerBasis> {
    let (rows, pivot_cols, changed) = match pivoting {
        Pivoting::TemplateOrder => template_order(&m.matrix, ZERO_THRESHOLD),
        Pivoting::Partial => partial(&m.matrix),
    };
    let to_poly = |row: &[f64]| {
        Poly4::from_terms(
            row.iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, &c)| (m.columns[j], c)),
        )
    };
    let leading: Vec<Monomial> = pivot_cols.iter().map(|&c| m.columns[c]).collect();
    let mut reducers = HashMap::with_capacity(rows.len());
    for (row, lm) in rows.iter().zip(&leading) {
        reducers.insert(*lm, to_poly(row));
    }

    let missing: Vec<Monomial> = REQUIRED_LEADING
        .iter()
        .filter(|lm| !reducers.contains_key(lm))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(Error::DegenerateElimination {
            rank: rows.len(),
            missing,
        });
    }

    let mut minimal: Vec<Monomial> = leading
        .iter()
        .filter(|a| !leading.iter().any(|b| b != *a && b.divides(a)))
        .copied()
        .collect();
    minimal.sort_by(|a, b| drl_compare(b, a));
    let elements = minimal.iter().map(|lm| reducers[lm].clone()).collect();
    let changed_rows = changed.iter().map(|&i| to_poly(&rows[i])).collect();

    Ok(GroebnerBasis {
        elements,
        leading,
        changed_rows,
        rank: rows.len(),
        reducers,
    })
}

fn row_scale(row: &[f64]) -> f64 {
    row.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

/// Back substitution: clears every pivot column from all other pivot rows.
/// Rows are normalized to 1 at their pivot.
fn back_substitute(rows: &mut [Vec<f64>], pivot_cols: &[usize]) {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(pivot_cols[i]));
    for &p in &order {
        let c = pivot_cols[p];
        let pivot_row = rows[p].clone();
        for (q, row) in rows.iter_mut().enumerate() {
            if q == p || pivot_cols[q] > c {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
    }
}

/// Returns (pivot rows, their pivot columns, indices of rows whose leading
/// column moved).
fn template_order(a: &DMatrix<f64>, threshold: f64) -> (Vec<Vec<f64>>, Vec<usize>, Vec<usize>) {
    let (nr, nc) = a.shape();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; nc];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut pivot_cols = Vec::new();
    let mut changed = Vec::new();
    for r in 0..nr {
        let mut v: Vec<f64> = (0..nc).map(|j| a[(r, j)]).collect();
        let scale = row_scale(&v);
        if scale == 0.0 {
            continue;
        }
        let original = v.iter().position(|&x| x != 0.0);
        let mut found = None;
        for j in 0..nc {
            if v[j].abs() <= threshold * scale {
                v[j] = 0.0;
                continue;
            }
            match pivot_of_col[j] {
                Some(p) => {
                    let f = v[j];
                    let prow: &Vec<f64> = &rows[p];
                    for k in j..nc {
                        v[k] -= f * prow[k];
                    }
                    v[j] = 0.0;
                }
                None => {
                    found = Some(j);
                    break;
                }
            }
        }
        if let Some(j) = found {
            let d = v[j];
            for x in v.iter_mut() {
                *x /= d;
            }
            v[j] = 1.0;
            pivot_of_col[j] = Some(rows.len());
            if original != Some(j) {
                changed.push(rows.len());
            }
            rows.push(v);
            pivot_cols.push(j);
        }
    }
    back_substitute(&mut rows, &pivot_cols);
    (rows, pivot_cols, changed)
}

fn partial(a: &DMatrix<f64>) -> (Vec<Vec<f64>>, Vec<usize>, Vec<usize>) {
    let (nr, nc) = a.shape();
    let mut m: Vec<Vec<f64>> = (0..nr)
        .map(|i| (0..nc).map(|j| a[(i, j)]).collect())
        .collect();
    // equilibrate rows so the pivot choice compares like with like
    for row in m.iter_mut() {
        let s = row_scale(row);
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        }
    }
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for j in 0..nc {
        if r == nr {
            break;
        }
        let (best, val) = (r..nr)
            .map(|i| (i, m[i][j].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= ZERO_THRESHOLD {
            for row in m[r..].iter_mut() {
                row[j] = 0.0;
            }
            continue;
        }
        m.swap(r, best);
        let d = m[r][j];
        for x in m[r][j..].iter_mut() {
            *x /= d;
        }
        m[r][j] = 1.0;
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate().skip(r + 1) {
            debug_assert!(i > r);
            let f = row[j];
            if f != 0.0 {
                for (x, y) in row[j..].iter_mut().zip(&pivot_row[j..]) {
                    *x -= f * y;
                }
                row[j] = 0.0;
            }
        }
        pivot_cols.push(j);
        r += 1;
    }
    m.truncate(r);
    back_substitute(&mut m, &pivot_cols);
    (m, pivot_cols, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coplanarity::{build_system, Correspondence};
    use crate::geometry::BearingVector;
    use crate::solver::macaulay::build_macaulay;
    use crate::solver::template::MacaulayTemplate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(rng: &mut ChaCha8Rng) -> crate::coplanarity::CoplanaritySystem {
        let mut ray = || {
            BearingVector::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                1.0,
            )
        };
        let c = [
            Correspondence::new(ray(), ray()),
            Correspondence::new(ray(), ray()),
            Correspondence::new(ray(), ray()),
        ];
        build_system(&c)
    }

    #[test]
    fn small_rref() {
        let cols = vec![Monomial::new(0, 0, 0, 2), Monomial::T, Monomial::ONE];
        let mac = MacaulayMatrix {
            matrix: DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 5.0, 7.0]),
            columns: cols,
            rows: Vec::new(),
        };
        for piv in [Pivoting::TemplateOrder, Pivoting::Partial] {
            let (rows, pc, _) = match piv {
                Pivoting::TemplateOrder => template_order(&mac.matrix, ZERO_THRESHOLD),
                Pivoting::Partial => partial(&mac.matrix),
            };
            assert_eq!(pc, vec![0, 1]);
            assert!((rows[0][2] - 1.0).abs() < 1e-14 && rows[0][1] == 0.0);
            assert!((rows[1][2] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_pivoting_finds_required_reducers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tpl = MacaulayTemplate::compact();
        for _ in 0..20 {
            let sys = random_system(&mut rng);
            let mac = build_macaulay(&sys, &tpl).unwrap();
            let gb = eliminate_to_groebner(&mac).unwrap();
            assert_eq!(gb.rank, 65);
            for lm in REQUIRED_LEADING {
                let p = gb.reducer(&lm).unwrap();
                assert_eq!(p.leading_monomial(), Some(lm));
            }
        }
    }

    #[test]
    fn reducers_vanish_on_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let tpl = MacaulayTemplate::compact();
        let sys = random_system(&mut rng);
        let sols = crate::coplanarity::solve_det_oracle(&sys).unwrap();
        let mac = build_macaulay(&sys, &tpl).unwrap();
        let gb = eliminate_to_groebner(&mac).unwrap();
        for s in &sols {
            for lm in REQUIRED_LEADING {
                assert!(gb.reducer(&lm).unwrap().eval(s).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let mac = MacaulayMatrix {
            matrix: DMatrix::zeros(3, 3),
            columns: vec![Monomial::TX, Monomial::TY, Monomial::ONE],
            rows: Vec::new(),
        };
        match eliminate_to_groebner(&mac) {
            Err(Error::DegenerateElimination { rank, missing }) => {
                assert_eq!(rank, 0);
                assert_eq!(missing.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
