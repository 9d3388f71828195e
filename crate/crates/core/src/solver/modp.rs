//! Exact structural analysis of the system over the prime field `Z_p`.
//!
//! A random instance with coefficients in `Z_p` has, with overwhelming
//! probability, the same leading-monomial ideal as a generic real
//! instance, and exact arithmetic removes any doubt about numerical rank.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::template::{MacaulayTemplate, TemplateRow};
use crate::poly::{drl_compare, Monomial};
use crate::solver::quotient::QuotientBasis;

pub const PRIME: u64 = 2_147_483_647;

fn add(a: u64, b: u64) -> u64 {
    (a + b) % PRIME
}

fn mul(a: u64, b: u64) -> u64 {
    (a * b) % PRIME
}

fn neg(a: u64) -> u64 {
    (PRIME - a) % PRIME
}

fn from_i64(x: i64) -> u64 {
    x.rem_euclid(PRIME as i64) as u64
}

fn inv(a: u64) -> u64 {
    // Fermat: a^(p-2)
    let mut base = a % PRIME;
    let mut e = PRIME - 2;
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    acc
}

/// Sparse polynomial over `Z_p`.
type PolyP = Vec<(Monomial, u64)>;

/// The four polynomials for random rays with entries in `Z_p`.
pub fn random_system(seed: u64) -> [PolyP; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ray = || -> [u64; 3] { [0; 3].map(|_| rng.random_range(1..PRIME)) };
    let f1: PolyP = vec![
        (Monomial::new(2, 0, 0, 0), 1),
        (Monomial::new(0, 2, 0, 0), 1),
        (Monomial::new(0, 0, 2, 0), 1),
        (Monomial::ONE, neg(1)),
    ];
    // (1 + t²) R(t) = Q0 + Q1 t + Q2 t²
    let q: [[[i64; 3]; 3]; 3] = [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 0, -2], [0, 0, 0], [2, 0, 0]],
        [[-1, 0, 0], [0, 1, 0], [0, 0, -1]],
    ];
    // S(e_v) for v = x, y, z in the coplanarity layout
    let s: [[[i64; 3]; 3]; 3] = [
        [[0, 0, 0], [0, 0, 1], [0, -1, 0]],
        [[0, 0, -1], [0, 0, 0], [1, 0, 0]],
        [[0, 1, 0], [-1, 0, 0], [0, 0, 0]],
    ];
    let mut coplanar = || -> PolyP {
        let m1 = ray();
        let m2 = ray();
        let mut out = Vec::new();
        for v in 0..3 {
            for p in 0..3 {
                let mut c = 0;
                for i in 0..3 {
                    for j in 0..3 {
                        let mut qm = 0;
                        for k in 0..3 {
                            qm = add(qm, mul(from_i64(q[p][j][k]), m1[k]));
                        }
                        c = add(c, mul(mul(m2[i], from_i64(s[v][i][j])), qm));
                    }
                }
                let mut e = [0u8; 4];
                e[v] = 1;
                e[3] = p as u8;
                out.push((Monomial(e), c));
            }
        }
        out
    };
    [f1, coplanar(), coplanar(), coplanar()]
}

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub max_degree: u32,
    pub shape: (usize, usize),
    pub rank: usize,
    /// Minimal generators of the leading-monomial ideal found up to
    /// `max_degree`, DRL-descending.
    pub leading_generators: Vec<Monomial>,
    /// Standard monomials, or `None` if the quotient is still infinite at
    /// this degree bound.
    pub standard_monomials: Option<QuotientBasis>,
}

impl StructureReport {
    pub fn quotient_dimension(&self) -> Option<usize> {
        self.standard_monomials.as_ref().map(QuotientBasis::len)
    }
}

/// Exact row reduction of the full template of degree `max_degree`.
pub fn analyze(max_degree: u32, seed: u64) -> StructureReport {
    analyze_template(&MacaulayTemplate::full(max_degree), seed)
}

/// Exact row reduction of an arbitrary template.
pub fn analyze_template(tpl: &MacaulayTemplate, seed: u64) -> StructureReport {
    let polys = random_system(seed);
    let (nr, nc) = tpl.shape();
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(nr);
    for row in tpl.rows() {
        let mut v = vec![0u64; nc];
        for (m, c) in &polys[row.poly] {
            let col = tpl
                .column_of(&m.mul(&row.multiplier))
                .expect("template columns cover the generic support");
            v[col] = add(v[col], *c);
        }
        rows.push(v);
    }

    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for j in 0..nc {
        let Some(p) = (r..nr).find(|&i| rows[i][j] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let d = inv(rows[r][j]);
        for x in rows[r][j..].iter_mut() {
            *x = mul(*x, d);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[j] == 0 {
                continue;
            }
            let f = row[j];
            for (x, y) in row[j..].iter_mut().zip(&pivot_row[j..]) {
                *x = add(*x, neg(mul(f, *y)));
            }
        }
        pivots.push(j);
        r += 1;
        if r == nr {
            break;
        }
    }

    let leading: Vec<Monomial> = pivots.iter().map(|&j| tpl.columns()[j]).collect();
    let mut generators: Vec<Monomial> = leading
        .iter()
        .filter(|a| !leading.iter().any(|b| b != *a && b.divides(a)))
        .copied()
        .collect();
    generators.sort_by(|a, b| drl_compare(b, a));
    let max_degree = tpl.max_degree();
    let standard_monomials = QuotientBasis::standard_monomials(&generators, max_degree);
    StructureReport {
        max_degree,
        shape: (nr, nc),
        rank: r,
        leading_generators: generators,
        standard_monomials,
    }
}

/// Rows of `tpl` that are linearly independent of the rows before them,
/// for a random instance. Dropping the rest leaves a template of full row
/// rank, which keeps cancellation noise from posing as extra pivots.
pub fn independent_rows(tpl: &MacaulayTemplate, seed: u64) -> Vec<TemplateRow> {
    let polys = random_system(seed);
    let nc = tpl.shape().1;
    let mut pivot_rows: Vec<Option<Vec<u64>>> = vec![None; nc];
    let mut keep = Vec::new();
    for row in tpl.rows() {
        let mut v = vec![0u64; nc];
        for (m, c) in &polys[row.poly] {
            let col = tpl
                .column_of(&m.mul(&row.multiplier))
                .expect("template columns cover the generic support");
            v[col] = add(v[col], *c);
        }
        for j in 0..nc {
            if v[j] == 0 {
                continue;
            }
            match &pivot_rows[j] {
                Some(p) => {
                    let f = v[j];
                    for (x, y) in v[j..].iter_mut().zip(&p[j..]) {
                        *x = add(*x, neg(mul(f, *y)));
                    }
                }
                None => {
                    let d = inv(v[j]);
                    v.iter_mut().for_each(|x| *x = mul(*x, d));
                    pivot_rows[j] = Some(v);
                    keep.push(*row);
                    break;
                }
            }
        }
    }
    keep
}
