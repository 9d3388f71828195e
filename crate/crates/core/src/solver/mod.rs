//! Algebraic minimal solver: Macaulay template, elimination, action matrix
//! and eigen read-off of the translation and yaw parameter.

pub mod eigen;
pub mod elimination;
pub mod macaulay;
pub mod modp;
pub mod quotient;
pub mod selftest;
pub mod template;

use std::sync::OnceLock;

use nalgebra::{Matrix4, Vector4};

use crate::coplanarity::{CoplanaritySystem, Solution};
use crate::error::Result;
use crate::poly::{Monomial, Poly4};

pub use elimination::{eliminate_to_groebner, eliminate_with, GroebnerBasis, Pivoting};
pub use macaulay::{build_macaulay, MacaulayMatrix};
pub use quotient::{action_matrix, normal_form, ActionMatrix, QuotientBasis};
pub use template::{MacaulayTemplate, TemplateRow};

/// Eigenvalues with `|Im| <= IMAG_ACCEPT (1 + |Re|)` are taken as real.
pub const IMAG_ACCEPT: f64 = 1e-6;
/// Eigenvalues between the two bounds are kept only if polishing drives
/// their residual below [`BORDERLINE_RESIDUAL`].
pub const IMAG_BORDERLINE: f64 = 1e-4;
pub const BORDERLINE_RESIDUAL: f64 = 1e-10;
/// Candidates whose polished residual exceeds this are discarded.
pub const MAX_RESIDUAL: f64 = 1e-6;

/// Seed of the random instance used to find the dependent rows of the
/// full template.
pub const FULL_TEMPLATE_SEED: u64 = 0xf011;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TemplateKind {
    /// The 65 × 77 template.
    #[default]
    Compact,
    /// All multiples up to degree 6: 175 products, of which the 155
    /// linearly independent ones are kept.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub template: TemplateKind,
    pub pivoting: Pivoting,
    /// Newton steps on `f1..f4` applied to every candidate.
    pub polish_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            template: TemplateKind::Compact,
            pivoting: Pivoting::default(),
            polish_steps: 2,
        }
    }
}

pub fn template(kind: TemplateKind) -> &'static MacaulayTemplate {
    static COMPACT: OnceLock<MacaulayTemplate> = OnceLock::new();
    static FULL: OnceLock<MacaulayTemplate> = OnceLock::new();
    match kind {
        TemplateKind::Compact => COMPACT.get_or_init(MacaulayTemplate::compact),
        TemplateKind::Full => FULL.get_or_init(|| {
            let full = MacaulayTemplate::full(6);
            MacaulayTemplate::from_rows(modp::independent_rows(&full, FULL_TEMPLATE_SEED))
        }),
    }
}

/// All real solutions `(Tx, Ty, Tz, t)` of `f1 = … = f4 = 0`, in sign pairs.
pub fn solve_system(sys: &CoplanaritySystem) -> Result<Vec<Solution>> {
    solve_system_with(sys, &SolverOptions::default())
}

pub fn solve_system_with(sys: &CoplanaritySystem, opts: &SolverOptions) -> Result<Vec<Solution>> {
    let mac = build_macaulay(sys, template(opts.template))?;
    let gb = eliminate_with(&mac, opts.pivoting)?;
    let basis = QuotientBasis::odd();
    let action = action_matrix(&gb, &basis, &Poly4::from_terms([(Monomial::T, 1.0)]))?;
    // Eigenvectors of Aᵀ evaluate the basis monomials at the roots.
    let at = action.matrix.transpose();

    let mut out: Vec<Solution> = Vec::new();
    for lambda in eigen::eigenvalues(&at) {
        let bound = 1.0 + lambda.re.abs();
        let borderline = lambda.im.abs() > IMAG_ACCEPT * bound;
        if lambda.im.abs() > IMAG_BORDERLINE * bound {
            continue;
        }
        let t = lambda.re;
        let v = eigen::real_eigenvector(&at, t);
        let mut tr = [v[0], v[1], v[2]];
        let norm = (tr[0] * tr[0] + tr[1] * tr[1] + tr[2] * tr[2]).sqrt();
        if norm < 1e-8 * v.norm() || !norm.is_finite() {
            match null_direction(sys, t) {
                Some(n) => tr = n,
                None => continue,
            }
        } else {
            tr = tr.map(|x| x / norm);
        }
        let mut x = [tr[0], tr[1], tr[2], t];
        let steps = opts.polish_steps + if borderline { 2 } else { 0 };
        for _ in 0..steps {
            x = newton_step(sys, &x).unwrap_or(x);
        }
        let res = sys.max_residual(&x);
        let limit = if borderline {
            BORDERLINE_RESIDUAL
        } else {
            MAX_RESIDUAL
        };
        if !(res <= limit) {
            continue;
        }
        let duplicate = out.iter().any(|s| {
            (s[3] - x[3]).abs() < 1e-9 * (1.0 + x[3].abs())
                && (0..3).all(|i| (s[i] - x[i]).abs() < 1e-9)
        });
        if !duplicate {
            out.push(x);
            out.push([-x[0], -x[1], -x[2], x[3]]);
        }
    }
    Ok(out)
}

/// One Newton step on the square system `f1..f4`.
pub fn newton_step(sys: &CoplanaritySystem, x: &Solution) -> Option<Solution> {
    let f = Vector4::from_fn(|i, _| sys.polys[i].eval(x));
    let j = Matrix4::from_fn(|i, k| sys.polys[i].gradient(x)[k]);
    let dx = j.lu().solve(&f)?;
    let next = [x[0] - dx[0], x[1] - dx[1], x[2] - dx[2], x[3] - dx[3]];
    next.iter().all(|v| v.is_finite()).then_some(next)
}

/// Unit vector spanning the null space of the 3 × 3 linear system in `T`
/// at yaw parameter `t`: the best-conditioned cross product of two rows.
fn null_direction(sys: &CoplanaritySystem, t: f64) -> Option<[f64; 3]> {
    let rows: Vec<nalgebra::Vector3<f64>> = (1..4)
        .map(|k| {
            let p = &sys.polys[k];
            nalgebra::Vector3::from_fn(|v, _| {
                let mut c = 0.0;
                for pw in 0..3u8 {
                    let mut e = [0u8; 4];
                    e[v] = 1;
                    e[3] = pw;
                    c += p.coeff(&Monomial(e)) * t.powi(pw as i32);
                }
                c
            })
        })
        .collect();
    let best = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(a, b)| rows[a].cross(&rows[b]))
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())?;
    let n = best.norm();
    (n > 0.0 && n.is_finite()).then(|| [best.x / n, best.y / n, best.z / n])
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::coplanarity::{build_system, solve_det_oracle, Correspondence};
    use crate::geometry::BearingVector;
    use proptest::prelude::*;

    fn ray() -> impl Strategy<Value = BearingVector> {
        (-0.6..0.6f64, -0.5..0.5f64).prop_map(|(x, y)| BearingVector::new(x, y, 1.0))
    }

    fn system() -> impl Strategy<Value = CoplanaritySystem> {
        proptest::array::uniform3((ray(), ray()))
            .prop_map(|pairs| build_system(&pairs.map(|(a, b)| Correspondence::new(a, b))))
    }

    fn same_set(a: &[Solution], b: &[Solution], tol: f64) -> bool {
        a.len() == b.len()
            && b.iter().all(|y| {
                a.iter()
                    .any(|x| x.iter().zip(y).all(|(p, q)| (p - q).abs() < tol))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn unit_baseline_and_small_residual(sys in system()) {
            for s in solve_system(&sys).unwrap() {
                let n = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
                prop_assert!((n - 1.0).abs() < 1e-9, "norm {n}");
                prop_assert!(sys.max_residual(&s) < MAX_RESIDUAL);
            }
        }

        #[test]
        fn solutions_come_in_sign_pairs(sys in system()) {
            let sols = solve_system(&sys).unwrap();
            prop_assert!(sols.len().is_multiple_of(2));
            for s in &sols {
                let flipped = [-s[0], -s[1], -s[2], s[3]];
                prop_assert!(sols.contains(&flipped));
            }
        }

        #[test]
        fn invariant_under_equation_scaling(sys in system()) {
            let a = solve_system(&sys).unwrap();
            let b = solve_system(&sys.scaled(7.0)).unwrap();
            prop_assert!(same_set(&a, &b, 1e-8), "{a:?} vs {b:?}");
        }

        #[test]
        fn deterministic(sys in system()) {
            prop_assert_eq!(solve_system(&sys).unwrap(), solve_system(&sys).unwrap());
        }

        #[test]
        fn agrees_with_determinant_route(sys in system()) {
            let a = solve_system(&sys).unwrap();
            let o = solve_det_oracle(&sys).unwrap();
            prop_assert!(same_set(&a, &o, 1e-8), "{a:?} vs {o:?}");
        }
    }
}
