//! Dense complex matrix exponential (scaling-and-squaring with a degree-13
//! Padé approximant) and a partial-pivot LU solver. Sized for the small
//! (≤ 11×11) generators here; used as the independent reference propagator
//! for constant-rate schedules and for steady-state solves.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// LU factorization with partial pivoting; solves A·x = b in place.
pub fn lu_solve(a: &Array2<Complex64>, b: &Array1<Complex64>) -> Result<Array1<Complex64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.len(), n);
    let mut lu = a.clone();
    let mut x = b.clone();
    let mut piv: Vec<usize> = (0..n).collect();

    for col in 0..n {
        // pivot: largest magnitude on or below the diagonal
        let mut p = col;
        let mut best = lu[[col, col]].norm_sqr();
        for r in col + 1..n {
            let v = lu[[r, col]].norm_sqr();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularMatrix("lu_solve"));
        }
        if p != col {
            for c in 0..n {
                let tmp = lu[[col, c]];
                lu[[col, c]] = lu[[p, c]];
                lu[[p, c]] = tmp;
            }
            piv.swap(col, p);
            let tmp = x[col];
            x[col] = x[p];
            x[p] = tmp;
        }
        let d = lu[[col, col]];
        for r in col + 1..n {
            let f = lu[[r, col]] / d;
            lu[[r, col]] = f;
            for c in col + 1..n {
                let sub = f * lu[[col, c]];
                lu[[r, c]] -= sub;
            }
            let sub = f * x[col];
            x[r] -= sub;
        }
    }
    // back substitution
    for r in (0..n).rev() {
        let mut acc = x[r];
        for c in r + 1..n {
            acc -= lu[[r, c]] * x[c];
        }
        x[r] = acc / lu[[r, r]];
    }
    Ok(x)
}

fn one_norm(a: &Array2<Complex64>) -> f64 {
    let mut best = 0.0f64;
    for c in 0..a.ncols() {
        let s: f64 = (0..a.nrows()).map(|r| a[[r, c]].norm()).sum();
        best = best.max(s);
    }
    best
}

fn solve_matrix(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    let mut out = Array2::zeros((n, n));
    for c in 0..n {
        let col = lu_solve(a, &b.column(c).to_owned())?;
        for r in 0..n {
            out[[r, c]] = col[r];
        }
    }
    Ok(out)
}

/// exp(A) by scaling-and-squaring with the degree-13 Padé approximant.
pub fn expm(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    const THETA_13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
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
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.mapv(|v| v / 2f64.powi(s));

    let eye = Array2::<Complex64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = a6.mapv(|v| v * B[13]) + a4.mapv(|v| v * B[11]) + a2.mapv(|v| v * B[9]);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + a6.mapv(|v| v * B[7])
            + a4.mapv(|v| v * B[5])
            + a2.mapv(|v| v * B[3])
            + eye.mapv(|v| v * B[1])),
    );
    let v_inner = a6.mapv(|v| v * B[12]) + a4.mapv(|v| v * B[10]) + a2.mapv(|v| v * B[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|v| v * B[6])
        + a4.mapv(|v| v * B[4])
        + a2.mapv(|v| v * B[2])
        + eye.mapv(|v| v * B[0]);

    let mut r = solve_matrix(&(&v - &u), &(&u + &v))?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}
