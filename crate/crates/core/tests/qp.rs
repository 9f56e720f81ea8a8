use lumbar_core::qp::{least_squares_terms, solve, QpSettings};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Projected gradient descent on a box, used as an independent reference.
fn projected_gradient(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
) -> DVector<f64> {
    let step = 1.0 / h.symmetric_eigenvalues().max();
    let mut x = DVector::zeros(g.len());
    for _ in 0..200_000 {
        let grad = h * &x + g;
        let next = (&x - grad * step).zip_zip_map(lo, hi, |v, l, u| v.max(l).min(u));
        if (&next - &x).amax() < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

fn objective(h: &DMatrix<f64>, g: &DVector<f64>, x: &DVector<f64>) -> f64 {
    0.5 * x.dot(&(h * x)) + g.dot(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn box_qp_matches_projected_gradient(
        jac in prop::collection::vec(-2.0f64..2.0, 12),
        target in prop::collection::vec(-3.0f64..3.0, 3),
        bound in 0.05f64..2.0,
    ) {
        let j = DMatrix::from_row_slice(3, 4, &jac);
        let v = DVector::from_vec(target);
        let (h, g) = least_squares_terms(&j, &v, 1e-2);
        let lo = DVector::from_element(4, -bound);
        let hi = DVector::from_element(4, bound);
        let sol = solve(&h, &g, None, &lo, &hi, &DVector::zeros(4), &QpSettings::default()).unwrap();
        let reference = projected_gradient(&h, &g, &lo, &hi);
        prop_assert!(sol.x.iter().zip(lo.iter().zip(hi.iter())).all(|(x, (l, u))| x >= l && x <= u));
        prop_assert!(objective(&h, &g, &sol.x) <= objective(&h, &g, &reference) + 1e-9);
        prop_assert!((&sol.x - &reference).amax() < 1e-5);
    }

    #[test]
    fn equality_constrained_solution_keeps_constraint(
        jac in prop::collection::vec(-2.0f64..2.0, 15),
        eq in prop::collection::vec(-1.0f64..1.0, 5),
        target in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let j = DMatrix::from_row_slice(3, 5, &jac);
        let e = DMatrix::from_row_slice(1, 5, &eq);
        let start = DVector::from_vec(vec![0.1, -0.1, 0.05, 0.0, 0.02]);
        let rhs = &e * &start;
        let (h, g) = least_squares_terms(&j, &DVector::from_vec(target), 1e-6);
        let lo = DVector::from_element(5, -0.5);
        let hi = DVector::from_element(5, 0.5);
        let sol = solve(&h, &g, Some((&e, &rhs)), &lo, &hi, &start, &QpSettings::default()).unwrap();
        prop_assert!(((&e * &sol.x) - &rhs).amax() < 1e-12);
        prop_assert!(objective(&h, &g, &sol.x) <= objective(&h, &g, &start) + 1e-12);
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let j = DMatrix::from_fn(6, 10, |r, c| ((r * 7 + c * 3) as f64).sin());
    let v = DVector::from_fn(6, |r, _| 5.0 * (r as f64).cos());
    let (h, g) = least_squares_terms(&j, &v, 1e-6);
    let lo = DVector::from_element(10, -0.3);
    let hi = DVector::from_element(10, 0.3);
    let a = solve(&h, &g, None, &lo, &hi, &DVector::zeros(10), &QpSettings::default()).unwrap();
    let b = solve(&h, &g, None, &lo, &hi, &DVector::zeros(10), &QpSettings::default()).unwrap();
    assert_eq!(a, b);
    assert!(!a.active.is_empty());
}

/// Global optimum by enumerating every assignment of {free, lower, upper}
/// and solving the resulting equality-constrained KKT system.
fn enumerate_optimum(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    e: &DMatrix<f64>,
    rhs: &DVector<f64>,
    lo: f64,
    hi: f64,
) -> Option<(DVector<f64>, f64)> {
    let n = g.len();
    let m = e.nrows();
    let mut best: Option<(DVector<f64>, f64)> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let fixed: Vec<usize> = (0..n).filter(|&i| state[i] != 0).collect();
        let dim = n + m + fixed.len();
        let mut kkt = DMatrix::zeros(dim, dim);
        let mut b = DVector::zeros(dim);
        kkt.view_mut((0, 0), (n, n)).copy_from(h);
        kkt.view_mut((0, n), (n, m)).copy_from(&e.transpose());
        kkt.view_mut((n, 0), (m, n)).copy_from(e);
        b.rows_mut(0, n).copy_from(&(-g));
        b.rows_mut(n, m).copy_from(rhs);
        for (k, &i) in fixed.iter().enumerate() {
            kkt[(i, n + m + k)] = 1.0;
            kkt[(n + m + k, i)] = 1.0;
            b[n + m + k] = if state[i] == 1 { lo } else { hi };
        }
        let Some(sol) = kkt.clone().svd(true, true).solve(&b, 1e-12).ok() else { continue };
        if (&kkt * &sol - &b).amax() > 1e-9 {
            continue;
        }
        let x = sol.rows(0, n).into_owned();
        if x.iter().any(|&v| v < lo - 1e-12 || v > hi + 1e-12) {
            continue;
        }
        let f = objective(h, g, &x);
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((x, f));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn degenerate_equality_qp_reaches_global_optimum(
        jac in prop::collection::vec(-2.0f64..2.0, 20),
        eq in prop::collection::vec(-1.0f64..1.0, 10),
        target in prop::collection::vec(-20.0f64..20.0, 4),
    ) {
        let j = DMatrix::from_row_slice(4, 5, &jac);
        let e = DMatrix::from_row_slice(2, 5, &eq);
        let start = DVector::from_vec(vec![0.02, -0.01, 0.03, 0.0, -0.02]);
        let rhs = &e * &start;
        let (h, g) = least_squares_terms(&j, &DVector::from_vec(target), 1e-6);
        let bound = 0.05;
        let lo = DVector::from_element(5, -bound);
        let hi = DVector::from_element(5, bound);
        let sol = solve(&h, &g, Some((&e, &rhs)), &lo, &hi, &start, &QpSettings::default()).unwrap();
        let (_, best) = enumerate_optimum(&h, &g, &e, &rhs, -bound, bound).unwrap();
        let f = objective(&h, &g, &sol.x);
        prop_assert!(f <= best + 1e-9 * (1.0 + best.abs()), "active-set {f} vs enumerated {best}");
    }
}
