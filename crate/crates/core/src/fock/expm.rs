//! Dense matrix exponential (scaling and squaring with diagonal Padé
//! approximants) and the action of a matrix exponential on a vector
//! (scaled truncated Taylor series).
//!
//! The Padé path follows Higham's 2005 selection of orders 3, 5, 7, 9 and 13
//! with the double-precision thresholds below; the Taylor path is used for
//! the banded generators of the oracle, where forming the full exponential
//! would cost O(N³).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Maximum column sum.
pub fn one_norm(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

/// Low-order Padé numerator/denominator pieces `(U, V)` for the odd/even split.
fn pade_low(a: &Array2<C64>, b: &[f64]) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let a2 = a.dot(a);
    // powers A^0, A^2, A^4, ...
    let mut even_powers = vec![identity(n)];
    while 2 * even_powers.len() < b.len() {
        let next = even_powers.last().unwrap().dot(&a2);
        even_powers.push(next);
    }
    let mut u_inner = Array2::<C64>::zeros((n, n));
    let mut v = Array2::<C64>::zeros((n, n));
    for (j, p) in even_powers.iter().enumerate() {
        if 2 * j + 1 < b.len() {
            u_inner.scaled_add(C64::new(b[2 * j + 1], 0.0), p);
        }
        v.scaled_add(C64::new(b[2 * j], 0.0), p);
    }
    (a.dot(&u_inner), v)
}

fn pade_13(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let b = |i: usize| C64::new(B13[i], 0.0);
    let ident = identity(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let mut inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let mut u = a6.dot(&inner);
    u = u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1);
    let u = a.dot(&u);

    inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let mut v = a6.dot(&inner);
    v = v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);
    (u, v)
}

/// Solve `A X = B` by LU decomposition with partial pivoting. `A` is consumed.
pub fn solve(mut a: Array2<C64>, mut b: Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.nrows());
    let m = b.ncols();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[[i, col]].norm().total_cmp(&a[[j, col]].norm()))
            .unwrap();
        if pivot != col {
            for j in 0..n {
                a.swap([col, j], [pivot, j]);
            }
            for j in 0..m {
                b.swap([col, j], [pivot, j]);
            }
        }
        let d = a[[col, col]];
        for row in col + 1..n {
            let f = a[[row, col]] / d;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let x = a[[col, j]];
                a[[row, j]] -= f * x;
            }
            for j in 0..m {
                let x = b[[col, j]];
                b[[row, j]] -= f * x;
            }
        }
    }
    for row in (0..n).rev() {
        let d = a[[row, row]];
        for j in 0..m {
            let mut s = b[[row, j]];
            for k in row + 1..n {
                s -= a[[row, k]] * b[[k, j]];
            }
            b[[row, j]] = s / d;
        }
    }
    b
}

/// exp(A) for a dense complex matrix.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);

    let (u, v, squarings) = if norm <= THETA_3 {
        let (u, v) = pade_low(a, &B3);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let (u, v) = pade_low(a, &B5);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let (u, v) = pade_low(a, &B7);
        (u, v, 0)
    } else if norm <= THETA_9 {
        let (u, v) = pade_low(a, &B9);
        (u, v, 0)
    } else {
        let s = ((norm / THETA_13).log2().ceil()).max(0.0) as i32;
        let scaled = a * C64::new(2f64.powi(-s), 0.0);
        let (u, v) = pade_13(&scaled);
        (u, v, s)
    };

    let mut x = solve(&v - &u, &v + &u);
    for _ in 0..squarings {
        x = x.dot(&x);
    }
    x
}

/// Largest step norm handed to a single Taylor expansion.
const TAYLOR_STEP_NORM: f64 = 4.0;
const TAYLOR_MAX_TERMS: usize = 120;

/// exp(scale·A)·v using a matrix-vector product `apply` and an upper bound
/// `norm` on ‖A‖. The interval is cut into steps of norm at most
/// [`TAYLOR_STEP_NORM`] and each step sums the Taylor series until two
/// consecutive terms fall below machine precision relative to the sum.
pub fn expm_apply<F>(apply: F, norm: f64, scale: C64, v: &Array1<C64>) -> Array1<C64>
where
    F: Fn(&Array1<C64>, &mut Array1<C64>),
{
    let total = norm * scale.norm();
    if total == 0.0 {
        return v.clone();
    }
    let steps = (total / TAYLOR_STEP_NORM).ceil().max(1.0) as usize;
    let h = scale / steps as f64;

    let mut acc = v.clone();
    let mut term = Array1::<C64>::zeros(v.len());
    let mut next = Array1::<C64>::zeros(v.len());
    for _ in 0..steps {
        term.assign(&acc);
        let mut small_run = 0;
        for j in 1..=TAYLOR_MAX_TERMS {
            apply(&term, &mut next);
            let f = h / j as f64;
            next.mapv_inplace(|z| z * f);
            std::mem::swap(&mut term, &mut next);
            acc += &term;
            let tn = term.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let an = acc.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if tn <= (f64::EPSILON * f64::EPSILON) * an {
                small_run += 1;
                if small_run == 2 {
                    break;
                }
            } else {
                small_run = 0;
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let z = Array2::<C64>::zeros((5, 5));
        assert!(max_diff(&expm(&z), &identity(5)) < 1e-15);
    }

    #[test]
    fn diagonal_matches_scalar_exponentials() {
        for scale in [0.001, 0.1, 1.0, 3.0, 40.0] {
            let d: Vec<C64> = (0..6)
                .map(|i| C64::new(-0.3 * i as f64, 0.7 * i as f64) * scale)
                .collect();
            let a = Array2::from_diag(&Array1::from(d.clone()));
            let e = expm(&a);
            for i in 0..6 {
                let rel = (e[[i, i]] - d[i].exp()).norm() / d[i].exp().norm();
                assert!(rel < 1e-12, "scale {scale} entry {i}: rel {rel}");
            }
        }
    }

    #[test]
    fn nilpotent_jordan_block() {
        // exp([[0,1],[0,0]]·x) = [[1,x],[0,1]]
        let mut a = Array2::<C64>::zeros((2, 2));
        a[[0, 1]] = C64::new(2.5, 0.0);
        let e = expm(&a);
        assert!((e[[0, 1]] - C64::new(2.5, 0.0)).norm() < 1e-14);
        assert!((e[[0, 0]] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rotation_generator() {
        // exp(t [[0,-1],[1,0]]) is a rotation by t
        for t in [0.2, 1.3, 7.0] {
            let mut a = Array2::<C64>::zeros((2, 2));
            a[[0, 1]] = C64::new(-t, 0.0);
            a[[1, 0]] = C64::new(t, 0.0);
            let e = expm(&a);
            assert!((e[[0, 0]].re - t.cos()).abs() < 1e-13);
            assert!((e[[1, 0]].re - t.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = Array2::from_shape_fn((4, 4), |(i, j)| {
            C64::new((i * 4 + j) as f64 % 7.0 + if i == j { 5.0 } else { 0.0 }, (i as f64) - (j as f64))
        });
        let x = Array2::from_shape_fn((4, 2), |(i, j)| C64::new(i as f64 + 1.0, j as f64));
        let b = a.dot(&x);
        let got = solve(a, b);
        assert!(max_diff(&got, &x) < 1e-12);
    }

    #[test]
    fn taylor_action_agrees_with_pade() {
        let n = 12;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            let d = i as f64 - j as f64;
            C64::new((0.3 * d).sin(), 0.1 * (i + j) as f64) * 0.8
        });
        let v = Array1::from_shape_fn(n, |i| C64::new(1.0 / (i + 1) as f64, 0.0));
        let scale = C64::new(0.0, -2.0);
        let dense = expm(&(&a * scale)).dot(&v);
        let norm = one_norm(&a);
        let via_action = expm_apply(|x, out| out.assign(&a.dot(x)), norm, scale, &v);
        let err = dense
            .iter()
            .zip(via_action.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let scale_ref = dense.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-11 * scale_ref, "err {err} of {scale_ref}");
    }
}
