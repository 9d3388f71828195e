//! The polynomial system `{f1, f2, f3, f4}` in `(Tx, Ty, Tz, t)` built from
//! three gravity-aligned correspondences, and a determinant-based solver
//! used as an independent check on the algebraic one.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{coplanarity_skew, BearingVector};
use crate::poly::{Monomial, Poly4};

/// A solution `(Tx, Ty, Tz, t)`.
pub type Solution = [f64; 4];

/// Pair of corresponding rays, view 1 and view 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub m1: BearingVector,
    pub m2: BearingVector,
}

impl Correspondence {
    pub fn new(m1: BearingVector, m2: BearingVector) -> Self {
        Self { m1, m2 }
    }
}

/// `f1 = Tx² + Ty² + Tz² − 1` plus one coplanarity polynomial per correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct CoplanaritySystem {
    pub polys: [Poly4; 4],
}

impl CoplanaritySystem {
    pub fn f1(&self) -> &Poly4 {
        &self.polys[0]
    }

    /// Largest constraint violation at `x`: `|f1|`, and `|fk| / (1 + t²)`
    /// for the coplanarity rows, which is the constraint written with the
    /// rotation itself and stays bounded as the yaw approaches a half turn.
    pub fn max_residual(&self, x: &Solution) -> f64 {
        let w = 1.0 + x[3] * x[3];
        self.polys
            .iter()
            .enumerate()
            .map(|(k, p)| {
                if k == 0 {
                    p.eval(x).abs()
                } else {
                    p.eval(x).abs() / w
                }
            })
            .fold(0.0, f64::max)
    }

    /// Multiplies every polynomial by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            polys: [
                self.polys[0].scale(s),
                self.polys[1].scale(s),
                self.polys[2].scale(s),
                self.polys[3].scale(s),
            ],
        }
    }
}

pub fn normality_poly() -> Poly4 {
    Poly4::from_terms([
        (Monomial::new(2, 0, 0, 0), 1.0),
        (Monomial::new(0, 2, 0, 0), 1.0),
        (Monomial::new(0, 0, 2, 0), 1.0),
        (Monomial::ONE, -1.0),
    ])
}

/// `(1 + t²) R_φ(t) = Q0 + Q1 t + Q2 t²` with `cos φ = (1−t²)/(1+t²)`,
/// `sin φ = 2t/(1+t²)` and `R_φ = [[c, 0, −s], [0, 1, 0], [s, 0, c]]`.
fn scaled_yaw_coefficients() -> [Matrix3<f64>; 3] {
    [
        Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0),
        Matrix3::new(0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0),
        Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0),
    ]
}

/// `(1 + t²) · m2ᵀ S(T) R_φ(t) m1` expanded over `{Tx, Ty, Tz} × {1, t, t²}`.
///
/// `S(T)` is linear in `T`, so each coefficient is `m2ᵀ S(e_v) Q_p m1`
/// with `e_v` the v-th unit baseline and `Q_p` the `t^p` coefficient of
/// the scaled yaw matrix.
pub fn coplanarity_poly(c: &Correspondence) -> Poly4 {
    let q = scaled_yaw_coefficients();
    let mut p = Poly4::zero();
    for v in 0..3 {
        let s = coplanarity_skew(&Vector3::ith(v, 1.0));
        for (pow, qp) in q.iter().enumerate() {
            let coef = c.m2.0.dot(&(s * qp * c.m1.0));
            let mut e = [0u8; 4];
            e[v] = 1;
            e[3] = pow as u8;
            p.add_term(Monomial(e), coef);
        }
    }
    p
}

pub fn build_system(samples: &[Correspondence; 3]) -> CoplanaritySystem {
    CoplanaritySystem {
        polys: [
            normality_poly(),
            coplanarity_poly(&samples[0]),
            coplanarity_poly(&samples[1]),
            coplanarity_poly(&samples[2]),
        ],
    }
}

/// Coefficients of `(f2, f3, f4) = A(t) (Tx, Ty, Tz)ᵀ`, indexed
/// `[row][component][power of t]`.
pub fn linear_coefficients(sys: &CoplanaritySystem) -> [[[f64; 3]; 3]; 3] {
    let mut a = [[[0.0; 3]; 3]; 3];
    for (row, poly) in sys.polys[1..].iter().enumerate() {
        for (v, comp) in a[row].iter_mut().enumerate() {
            for (pow, coef) in comp.iter_mut().enumerate() {
                let mut e = [0u8; 4];
                e[v] = 1;
                e[3] = pow as u8;
                *coef = poly.coeff(&Monomial(e));
            }
        }
    }
    a
}

// ---------------------------------------------------------------------------
// determinant oracle

/// Imaginary-part threshold, relative to `1 + |re|`, for accepting a root as real.
pub const ORACLE_IMAG_TOLERANCE: f64 = 1e-8;

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &k)| i as f64 * k)
        .collect()
}

/// Ascending coefficients of `det A(t)`, degree at most six.
pub fn determinant_polynomial(sys: &CoplanaritySystem) -> Vec<f64> {
    let a = linear_coefficients(sys);
    let entry = |r: usize, c: usize| a[r][c].to_vec();
    let mut det = vec![0.0; 7];
    // Leibniz expansion over the six permutations of three columns
    let perms: [([usize; 3], f64); 6] = [
        ([0, 1, 2], 1.0),
        ([1, 2, 0], 1.0),
        ([2, 0, 1], 1.0),
        ([0, 2, 1], -1.0),
        ([2, 1, 0], -1.0),
        ([1, 0, 2], -1.0),
    ];
    for (p, sign) in perms {
        let term = poly_mul(&poly_mul(&entry(0, p[0]), &entry(1, p[1])), &entry(2, p[2]));
        for (d, t) in det.iter_mut().zip(term) {
            *d += sign * t;
        }
    }
    det
}

/// Real roots of the polynomial with ascending coefficients `c`, via the
/// eigenvalues of its companion matrix.
pub fn real_roots(c: &[f64], imag_tol: f64) -> Vec<f64> {
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    let d = poly_deriv(&c[..=deg]);
    let mut roots: Vec<f64> = comp
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= imag_tol * (1.0 + z.re.abs()))
        .map(|z| {
            // a few Newton steps on the univariate polynomial
            let mut x = z.re;
            for _ in 0..3 {
                let dv = poly_eval(&d, x);
                if dv == 0.0 {
                    break;
                }
                let step = poly_eval(&c[..=deg], x) / dv;
                if !step.is_finite() {
                    break;
                }
                x -= step;
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

fn a_matrix(a: &[[[f64; 3]; 3]; 3], t: f64) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| a[r][c][0] + t * (a[r][c][1] + t * a[r][c][2]))
}

/// Solves the system by expanding `det A(t)`, taking its real roots and the
/// null vector of `A(t*)` for each. Both baseline signs are returned.
pub fn solve_det_oracle(sys: &CoplanaritySystem) -> Result<Vec<Solution>> {
    let a = linear_coefficients(sys);
    let det = determinant_polynomial(sys);
    let row_scale: f64 = a
        .iter()
        .map(|row| row.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())))
        .product();
    let det_scale = det.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if row_scale == 0.0 || det_scale <= 1e-12 * row_scale {
        return Err(Error::Degenerate(
            "determinant of the coplanarity matrix vanishes identically".into(),
        ));
    }
    let mut out = Vec::new();
    for t in real_roots(&det, ORACLE_IMAG_TOLERANCE) {
        let m = a_matrix(&a, t);
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .unwrap();
        let n = v_t.row(imin).transpose().normalize();
        out.push([n.x, n.y, n.z, t]);
        out.push([-n.x, -n.y, -n.z, t]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::coplanarity_skew;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ray(rng: &mut impl Rng) -> BearingVector {
        BearingVector::new(
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(0.8..1.2),
        )
    }

    fn yaw(t: f64) -> Matrix3<f64> {
        let c = (1.0 - t * t) / (1.0 + t * t);
        let s = 2.0 * t / (1.0 + t * t);
        Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
    }

    /// Exact correspondences for `X2 = R_φ(t) X1 + T` from random points.
    fn exact_samples(rng: &mut impl Rng, t: f64, tv: Vector3<f64>) -> [Correspondence; 3] {
        std::array::from_fn(|_| {
            let x1 = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(2.0..4.0),
            );
            let x2 = yaw(t) * x1 + tv;
            Correspondence::new(BearingVector(x1), BearingVector(x2 / x2.z))
        })
    }

    #[test]
    fn identical_forward_rays() {
        let z = BearingVector::new(0.0, 0.0, 1.0);
        let p = coplanarity_poly(&Correspondence::new(z, z));
        assert_eq!(p, Poly4::from_terms([(Monomial::new(0, 1, 0, 1), -2.0)]));
        for tv in [[1.0, 2.0, 3.0, 0.0], [-0.3, 0.1, 0.7, 0.0]] {
            assert_eq!(p.eval(&tv), 0.0);
        }
    }

    #[test]
    fn matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let c = Correspondence::new(ray(&mut rng), ray(&mut rng));
            let p = coplanarity_poly(&c);
            assert!(p
                .monomials()
                .all(|m| m.0[..3].iter().sum::<u8>() == 1 && m.0[3] <= 2));
            let tv = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let t: f64 = rng.random_range(-3.0..3.0);
            let direct = (1.0 + t * t) * c.m2.0.dot(&(coplanarity_skew(&tv) * yaw(t) * c.m1.0));
            assert_abs_diff_eq!(p.eval(&[tv.x, tv.y, tv.z, t]), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn ground_truth_is_a_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t = rng.random_range(-0.5..0.5);
            let tv = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
            .normalize();
            let sys = build_system(&exact_samples(&mut rng, t, tv));
            assert!(sys.max_residual(&[tv.x, tv.y, tv.z, t]) < 1e-12);
        }
    }

    #[test]
    fn system_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = exact_samples(&mut rng, 0.0, Vector3::x());
        let sys = build_system(&s);
        assert_eq!(*sys.f1(), normality_poly());
        assert_eq!(sys.f1().len(), 4);
        for x in [[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]] {
            assert!(sys.max_residual(&x) < 1e-14);
        }
        let dup = build_system(&[s[0], s[0], s[1]]);
        assert_eq!(dup.polys[1], dup.polys[2]);
    }

    #[test]
    fn determinant_has_imaginary_unit_factor() {
        // (1 + t²) divides det A(t): at t = ±i the scaled yaw matrix has rank one
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sys = build_system(&std::array::from_fn(|_| {
            Correspondence::new(ray(&mut rng), ray(&mut rng))
        }));
        let d = determinant_polynomial(&sys);
        // p(i) = Σ c_k i^k
        let re = d[0] - d[2] + d[4] - d[6];
        let im = d[1] - d[3] + d[5];
        let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(re.abs() < 1e-12 * scale && im.abs() < 1e-12 * scale);
    }

    #[test]
    fn oracle_recovers_identity_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sys = build_system(&exact_samples(&mut rng, 0.0, Vector3::x()));
        let sols = solve_det_oracle(&sys).unwrap();
        assert!(sols.len() <= 12 && sols.len().is_multiple_of(2));
        for target in [[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]] {
            assert!(sols.iter().any(|s| s
                .iter()
                .zip(target.iter())
                .all(|(a, b)| (a - b).abs() < 1e-9)));
        }
        for s in &sols {
            assert!(sys.max_residual(s) < 1e-8);
        }
    }

    #[test]
    fn oracle_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let sys = build_system(&std::array::from_fn(|_| {
                Correspondence::new(ray(&mut rng), ray(&mut rng))
            }));
            let sols = solve_det_oracle(&sys).unwrap();
            assert!(sols.len() <= 12);
            for pair in sols.chunks(2) {
                assert_eq!(pair[0][3], pair[1][3]);
                assert_eq!(pair[0][0], -pair[1][0]);
            }
            for s in &sols {
                assert!(sys.max_residual(s) < 1e-8, "{:?}", s);
            }
        }
    }

    #[test]
    fn oracle_rejects_identical_samples() {
        let c = Correspondence::new(
            BearingVector::new(0.1, 0.2, 1.0),
            BearingVector::new(0.15, 0.18, 1.0),
        );
        let sys = build_system(&[c, c, c]);
        assert!(matches!(solve_det_oracle(&sys), Err(Error::Degenerate(_))));
    }

    #[test]
    fn companion_roots() {
        // (t - 1)(t + 2)(t² + 1)
        let c = poly_mul(&poly_mul(&[-1.0, 1.0], &[2.0, 1.0]), &[1.0, 0.0, 1.0]);
        let r = real_roots(&c, 1e-8);
        assert_eq!(r.len(), 2);
        assert_abs_diff_eq!(r[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 1.0, epsilon = 1e-12);
    }
}
