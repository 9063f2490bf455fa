//! Angular-momentum coupling coefficients: Wigner 3j and 6j symbols and
//! Clebsch–Gordan coefficients via the Racah closed-form sums.
//!
//! All arguments are doubled (`two_j = 2j`) so half-integer momenta stay
//! exact integers. Intended for the small momenta of atomic hyperfine
//! structure; accuracy degrades for very large j as the factorial sums grow.

/// n! as f64 (exact for n ≤ 18, then correctly rounded).
fn fact(n: i32) -> f64 {
    debug_assert!(n >= 0, "factorial of negative number");
    let mut f = 1.0;
    for k in 2..=n {
        f *= k as f64;
    }
    f
}

/// Triangle condition on doubled momenta, including parity (a+b+c integral).
pub fn triangle_valid(two_a: i32, two_b: i32, two_c: i32) -> bool {
    two_a >= 0
        && two_b >= 0
        && two_c >= 0
        && (two_a + two_b + two_c) % 2 == 0
        && two_c >= (two_a - two_b).abs()
        && two_c <= two_a + two_b
}

/// √ of the triangle coefficient Δ(abc).
fn sqrt_delta(two_a: i32, two_b: i32, two_c: i32) -> f64 {
    let h = |x: i32| fact(x / 2);
    (h(two_a + two_b - two_c) * h(two_a - two_b + two_c) * h(-two_a + two_b + two_c)
        / h(two_a + two_b + two_c + 2))
    .sqrt()
}

fn phase(k: i32) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3), doubled arguments.
pub fn wigner_3j(
    two_j1: i32,
    two_j2: i32,
    two_j3: i32,
    two_m1: i32,
    two_m2: i32,
    two_m3: i32,
) -> f64 {
    if two_m1 + two_m2 + two_m3 != 0
        || !triangle_valid(two_j1, two_j2, two_j3)
        || two_m1.abs() > two_j1
        || two_m2.abs() > two_j2
        || two_m3.abs() > two_j3
        || (two_j1 + two_m1) % 2 != 0
        || (two_j2 + two_m2) % 2 != 0
        || (two_j3 + two_m3) % 2 != 0
    {
        return 0.0;
    }
    let h = |x: i32| x / 2;
    // summation bounds of the Racah single-sum form
    let t_min = 0
        .max(h(two_j2 - two_j3 - two_m1))
        .max(h(two_j1 - two_j3 + two_m2));
    let t_max = h(two_j1 + two_j2 - two_j3)
        .min(h(two_j1 - two_m1))
        .min(h(two_j2 + two_m2));
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let denom = fact(t)
            * fact(h(two_j3 - two_j2 + two_m1) + t)
            * fact(h(two_j3 - two_j1 - two_m2) + t)
            * fact(h(two_j1 + two_j2 - two_j3) - t)
            * fact(h(two_j1 - two_m1) - t)
            * fact(h(two_j2 + two_m2) - t);
        sum += phase(t) / denom;
    }
    let norm = sqrt_delta(two_j1, two_j2, two_j3)
        * (fact(h(two_j1 + two_m1))
            * fact(h(two_j1 - two_m1))
            * fact(h(two_j2 + two_m2))
            * fact(h(two_j2 - two_m2))
            * fact(h(two_j3 + two_m3))
            * fact(h(two_j3 - two_m3)))
        .sqrt();
    phase(h(two_j1 - two_j2 - two_m3)) * norm * sum
}

/// Clebsch–Gordan coefficient ⟨j1 m1; j2 m2 | j m⟩, doubled arguments.
pub fn clebsch_gordan(
    two_j1: i32,
    two_m1: i32,
    two_j2: i32,
    two_m2: i32,
    two_j: i32,
    two_m: i32,
) -> f64 {
    if two_m1 + two_m2 != two_m {
        return 0.0;
    }
    phase((two_j1 - two_j2 + two_m) / 2)
        * ((two_j + 1) as f64).sqrt()
        * wigner_3j(two_j1, two_j2, two_j, two_m1, two_m2, -two_m)
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}, doubled arguments.
pub fn wigner_6j(
    two_j1: i32,
    two_j2: i32,
    two_j3: i32,
    two_j4: i32,
    two_j5: i32,
    two_j6: i32,
) -> f64 {
    if !(triangle_valid(two_j1, two_j2, two_j3)
        && triangle_valid(two_j1, two_j5, two_j6)
        && triangle_valid(two_j4, two_j2, two_j6)
        && triangle_valid(two_j4, two_j5, two_j3))
    {
        return 0.0;
    }
    let h = |x: i32| x / 2;
    let t1 = h(two_j1 + two_j2 + two_j3);
    let t2 = h(two_j1 + two_j5 + two_j6);
    let t3 = h(two_j4 + two_j2 + two_j6);
    let t4 = h(two_j4 + two_j5 + two_j3);
    let q1 = h(two_j1 + two_j2 + two_j4 + two_j5);
    let q2 = h(two_j2 + two_j3 + two_j5 + two_j6);
    let q3 = h(two_j3 + two_j1 + two_j6 + two_j4);
    let t_min = t1.max(t2).max(t3).max(t4);
    let t_max = q1.min(q2).min(q3);
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let denom = fact(t - t1)
            * fact(t - t2)
            * fact(t - t3)
            * fact(t - t4)
            * fact(q1 - t)
            * fact(q2 - t)
            * fact(q3 - t);
        sum += phase(t) * fact(t + 1) / denom;
    }
    sqrt_delta(two_j1, two_j2, two_j3)
        * sqrt_delta(two_j1, two_j5, two_j6)
        * sqrt_delta(two_j4, two_j2, two_j6)
        * sqrt_delta(two_j4, two_j5, two_j3)
        * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_j_reference_values() {
        assert_relative_eq!(
            wigner_3j(2, 2, 4, 2, -2, 0),
            30f64.sqrt() / 30.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            wigner_3j(3, 2, 1, 1, 0, -1),
            6f64.sqrt() / 6.0,
            max_relative = 1e-14
        );
        // parity: (1 1 1; 0 0 0) has odd j1+j2+j3 and vanishes
        assert_eq!(wigner_3j(2, 2, 2, 0, 0, 0), 0.0);
        // m out of range
        assert_eq!(wigner_3j(2, 2, 4, 4, -2, -2), 0.0);
    }

    #[test]
    fn clebsch_gordan_reference_values() {
        // ⟨½ ½; ½ −½ | 0 0⟩ = 1/√2
        assert_relative_eq!(
            clebsch_gordan(1, 1, 1, -1, 0, 0),
            0.5f64.sqrt(),
            max_relative = 1e-14
        );
        // ⟨1 1; 1 −1 | 0 0⟩ = 1/√3
        assert_relative_eq!(
            clebsch_gordan(2, 2, 2, -2, 0, 0),
            (1f64 / 3.0).sqrt(),
            max_relative = 1e-14
        );
        // ⟨1 0; 1 0 | 2 0⟩ = √(2/3)
        assert_relative_eq!(
            clebsch_gordan(2, 0, 2, 0, 4, 0),
            (2f64 / 3.0).sqrt(),
            max_relative = 1e-14
        );
        // stretched state couples with coefficient 1
        assert_relative_eq!(clebsch_gordan(1, 1, 1, 1, 2, 2), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn six_j_reference_values() {
        assert_relative_eq!(wigner_6j(2, 2, 2, 2, 2, 2), 1.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(
            wigner_6j(4, 4, 4, 4, 4, 4),
            -3.0 / 70.0,
            max_relative = 1e-13
        );
        // hyperfine recoupling values for a J=1/2 → J'=3/2 line with I=3/2
        assert_relative_eq!(
            wigner_6j(1, 3, 2, 2, 2, 3),
            10f64.sqrt() / 12.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            wigner_6j(1, 3, 2, 4, 2, 3),
            -6f64.sqrt() / 12.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            wigner_6j(1, 3, 2, 0, 2, 3),
            -3f64.sqrt() / 6.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn clebsch_gordan_orthogonality() {
        // Σ_{m1,m2} ⟨j1 m1 j2 m2|J M⟩⟨j1 m1 j2 m2|J' M'⟩ = δ_JJ' δ_MM'
        let (two_j1, two_j2): (i32, i32) = (3, 2);
        for two_j in (two_j1 - two_j2).abs()..=(two_j1 + two_j2) {
            if (two_j + two_j1 + two_j2) % 2 != 0 {
                continue;
            }
            for two_jp in (two_j1 - two_j2).abs()..=(two_j1 + two_j2) {
                if (two_jp + two_j1 + two_j2) % 2 != 0 {
                    continue;
                }
                let two_m = two_j.min(two_jp) % 2; // a valid shared M parity
                let mut sum = 0.0;
                let mut m1 = -two_j1;
                while m1 <= two_j1 {
                    let m2 = two_m - m1;
                    if m2.abs() <= two_j2 {
                        sum += clebsch_gordan(two_j1, m1, two_j2, m2, two_j, two_m)
                            * clebsch_gordan(two_j1, m1, two_j2, m2, two_jp, two_m);
                    }
                    m1 += 2;
                }
                let want = if two_j == two_jp { 1.0 } else { 0.0 };
                assert!(
                    (sum - want).abs() < 1e-13,
                    "orthogonality broken for 2J={two_j}, 2J'={two_jp}"
                );
            }
        }
    }

    #[test]
    fn six_j_orthogonality() {
        // Σ_x (2x+1) {a b x; c d p}{a b x; c d q} = δ_pq/(2p+1)
        let (a, b, c, d) = (2, 4, 2, 4); // doubled: j=1, 2, 1, 2
        for p in 0..=8 {
            for q in 0..=8 {
                if !triangle_valid(a, d, p) || !triangle_valid(a, d, q) {
                    continue;
                }
                let mut sum = 0.0;
                for x in 0..=12 {
                    sum += (x as f64 + 1.0)
                        * wigner_6j(a, b, x, c, d, p)
                        * wigner_6j(a, b, x, c, d, q);
                }
                let want = if p == q { 1.0 / (p as f64 + 1.0) } else { 0.0 };
                assert!(
                    (sum - want).abs() < 1e-13,
                    "6j orthogonality broken for 2p={p}, 2q={q}"
                );
            }
        }
    }

    #[test]
    fn three_j_column_swap_symmetry() {
        // swapping two columns multiplies by (−1)^{j1+j2+j3}; here j-sum = 3
        let v = wigner_3j(2, 2, 2, 2, 0, -2);
        let w = wigner_3j(2, 2, 2, 0, 2, -2);
        assert_relative_eq!(v, -(1f64 / 6.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(w, -v, max_relative = 1e-14);
    }
}
