//! Dense eigen-decomposition of small real nonsymmetric matrices:
//! Householder reduction to Hessenberg form followed by Francis
//! double-shift QR, with eigenvectors from inverse iteration.

use nalgebra::{Complex, DMatrix, DVector};

/// Eigenvalues of `a`, in the order deflation produces them.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    assert!(a.is_square(), "eigenvalues of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hqr(&mut h)
}

/// Parlett-Reinsch balancing with powers of two (exact in floating point).
fn balance(a: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let alpha: f64 = (k + 1..n)
            .map(|i| a[(i, k)] * a[(i, k)])
            .sum::<f64>()
            .sqrt();
        if alpha == 0.0 {
            continue;
        }
        let sign = if a[(k + 1, k)] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = vec![0.0; n];
        v[k + 1] = a[(k + 1, k)] + sign * alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- H A H with H = I - 2 v vᵀ / (vᵀ v)
        for j in 0..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k + 1..n {
                a[(i, j)] -= s * v[i];
            }
        }
        for i in 0..n {
            let s: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum::<f64>() * 2.0 / vnorm2;
            for j in k + 1..n {
                a[(i, j)] -= s * v[j];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroys `a`).
fn hqr(a: &mut DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = a.nrows() as isize;
    let mut wr = vec![0.0; n as usize];
    let mut wi = vec![0.0; n as usize];
    let at = |a: &DMatrix<f64>, i: isize, j: isize| a[(i as usize, j as usize)];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at(a, i, j).abs();
        }
    }
    let mut nn = n - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 1 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() + s == s {
                    a[(l as usize, (l - 1) as usize)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at(a, nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = at(a, nn - 1, nn - 1);
            let mut w = at(a, nn, nn - 1) * at(a, nn - 1, nn);
            if l == nn - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                let (i0, i1) = ((nn - 1) as usize, nn as usize);
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[i0] = x + z;
                    wr[i1] = wr[i0];
                    if z != 0.0 {
                        wr[i1] = x - w / z;
                    }
                    wi[i0] = 0.0;
                    wi[i1] = 0.0;
                } else {
                    wr[i0] = x + p;
                    wr[i1] = x + p;
                    wi[i0] = -z;
                    wi[i1] = z;
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                // no convergence: report the current diagonal
                for i in 0..=nn {
                    wr[i as usize] = at(a, i, i) + t;
                    wi[i as usize] = 0.0;
                }
                return wr
                    .into_iter()
                    .zip(wi)
                    .map(|(re, im)| Complex::new(re, im))
                    .collect();
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                t += x;
                for i in 0..=nn {
                    a[(i as usize, i as usize)] -= x;
                }
                let s = at(a, nn, nn - 1).abs() + at(a, nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            while m >= l {
                let z = at(a, m, m);
                r = x - z;
                let s = y - z;
                p = (r * s - w) / at(a, m + 1, m) + at(a, m, m + 1);
                q = at(a, m + 1, m + 1) - z - r - s;
                r = at(a, m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[(i as usize, (i - 2) as usize)] = 0.0;
                if i != m + 2 {
                    a[(i as usize, (i - 3) as usize)] = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = at(a, k, k - 1);
                    q = at(a, k + 1, k - 1);
                    r = 0.0;
                    if k != nn - 1 {
                        r = at(a, k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k as usize, (k - 1) as usize)] = -at(a, k, k - 1);
                        }
                    } else {
                        a[(k as usize, (k - 1) as usize)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let (ku, ju) = (k as usize, j as usize);
                        p = a[(ku, ju)] + q * a[(ku + 1, ju)];
                        if k != nn - 1 {
                            p += r * a[(ku + 2, ju)];
                            a[(ku + 2, ju)] -= p * z;
                        }
                        a[(ku + 1, ju)] -= p * y;
                        a[(ku, ju)] -= p * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let (iu, ku) = (i as usize, k as usize);
                        p = x * a[(iu, ku)] + y * a[(iu, ku + 1)];
                        if k != nn - 1 {
                            p += z * a[(iu, ku + 2)];
                            a[(iu, ku + 2)] -= p * r;
                        }
                        a[(iu, ku + 1)] -= p * q;
                        a[(iu, ku)] -= p;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    wr.into_iter()
        .zip(wi)
        .map(|(re, im)| Complex::new(re, im))
        .collect()
}

/// Unit eigenvector of `a` for the real eigenvalue `lambda`, by inverse
/// iteration on `a - lambda I` with a tiny shift to keep the LU nonsingular.
pub fn real_eigenvector(a: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let n = a.nrows();
    let scale = a.amax().max(1.0);
    let shift = lambda + 1e-13 * scale * (1.0 + lambda.abs());
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    let lu = m.lu();
    let mut v = DVector::from_fn(n, |i, _| 1.0 / ((i + 1) as f64).sqrt());
    for _ in 0..3 {
        let next = match lu.solve(&v) {
            Some(x) if x.iter().all(|c| c.is_finite()) => x,
            _ => break,
        };
        let norm = next.norm();
        if norm == 0.0 {
            break;
        }
        v = next / norm;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    #[test]
    fn triangular_and_rotation_blocks() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 4.0, 0.0, -1.0, 3.0, 0.0, 0.0, 5.0]);
        let ev = sorted(eigenvalues(&a));
        let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        assert!(
            (re[0] + 1.0).abs() < 1e-12
                && (re[1] - 2.0).abs() < 1e-12
                && (re[2] - 5.0).abs() < 1e-12
        );

        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = sorted(eigenvalues(&rot));
        assert!(ev[0].re.abs() < 1e-15 && (ev[0].im + 1.0).abs() < 1e-15);
        assert!((ev[1].im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_nalgebra_schur() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in [1usize, 2, 3, 4, 6, 8, 12] {
            for _ in 0..50 {
                let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                let mine = sorted(eigenvalues(&a));
                let theirs = sorted(a.complex_eigenvalues().iter().copied().collect());
                // match greedily: sorting can disagree on near-equal real parts
                let mut used = vec![false; n];
                for z in &mine {
                    let (j, d) = theirs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| !used[*j])
                        .map(|(j, w)| (j, (z - w).norm()))
                        .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                        .unwrap();
                    used[j] = true;
                    assert!(d < 1e-9, "n={n} {z} distance {d}");
                }
            }
        }
    }

    #[test]
    fn inverse_iteration_eigenvector() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        for z in eigenvalues(&a) {
            let v = real_eigenvector(&a, z.re);
            let r = &a * &v - &v * z.re;
            assert!(r.norm() < 1e-10, "{}", r.norm());
        }
    }
}
