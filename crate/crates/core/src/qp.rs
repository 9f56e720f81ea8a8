//! Dense primal active-set solver for strictly convex quadratic programs
//!
//! ```text
//! min ½ xᵀHx + gᵀx   s.t.   Ex = e,   lower ≤ x ≤ upper
//! ```
//!
//! The equality block is optional. Bounds enter the working set one at a time
//! with ties broken by smallest index, so results are bit-reproducible.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("bound {index} is empty: lower {lower} > upper {upper}")]
    InfeasibleBounds { index: usize, lower: f64, upper: f64 },
    #[error("starting point is infeasible: {0}")]
    InfeasibleStart(String),
    #[error("no convergence after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// Coordinates held at a bound in the final working set, ascending.
    pub active: Vec<(usize, BoundSide)>,
}

/// Hessian `JᵀJ + εI` and gradient `−Jᵀv` of `½‖Jx − v‖² + ½ε‖x‖²`.
pub fn least_squares_terms(
    jacobian: &DMatrix<f64>,
    target: &DVector<f64>,
    epsilon: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = jacobian.ncols();
    let mut h = jacobian.transpose() * jacobian;
    for i in 0..n {
        h[(i, i)] += epsilon;
    }
    let g = -(jacobian.transpose() * target);
    (h, g)
}

/// Checks that every bound interval is non-empty and finite where needed.
pub fn check_bounds(lower: &DVector<f64>, upper: &DVector<f64>) -> Result<(), QpError> {
    if lower.len() != upper.len() {
        return Err(QpError::Dimension(format!(
            "{} lower vs {} upper bounds",
            lower.len(),
            upper.len()
        )));
    }
    for i in 0..lower.len() {
        let (lo, hi) = (lower[i], upper[i]);
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(QpError::InfeasibleBounds {
                index: i,
                lower: lo,
                upper: hi,
            });
        }
    }
    Ok(())
}

pub fn clamp(x: &DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| x[i].max(lower[i]).min(upper[i])),
    )
}

struct NullSpace {
    /// Orthonormal basis of the null space of the free equality columns.
    basis: DMatrix<f64>,
    /// Minimum-norm multipliers for `E_Fᵀλ = b` as a linear map of `b`.
    pseudo_inverse_t: Option<DMatrix<f64>>,
}

fn null_space(ef: &DMatrix<f64>, tolerance: f64) -> Result<NullSpace, QpError> {
    let (m, nf) = ef.shape();
    if nf == 0 {
        return Ok(NullSpace {
            basis: DMatrix::zeros(0, 0),
            pseudo_inverse_t: None,
        });
    }
    // pad to at least nf rows so the decomposition yields a full right basis
    let rows = m.max(nf);
    let mut padded = DMatrix::zeros(rows, nf);
    padded.view_mut((0, 0), (m, nf)).copy_from(ef);
    let svd = padded.svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| QpError::Numerical("SVD without U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| QpError::Numerical("SVD without Vᵀ".into()))?;
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = tolerance.max(f64::EPSILON * rows as f64) * sigma_max.max(1.0);

    let null: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= cutoff).collect();
    let mut basis = DMatrix::zeros(nf, null.len());
    for (c, &i) in null.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }

    // Pᵀ = V Σ Uᵀ, so the minimum-norm solution of Pᵀμ = b is U Σ⁺ Vᵀ b.
    let mut pinv = DMatrix::zeros(m, nf);
    for i in 0..sigma.len() {
        if sigma[i] > cutoff {
            let ui = u.column(i).rows(0, m).into_owned();
            let vi = v_t.row(i);
            pinv += (ui * vi) / sigma[i];
        }
    }
    Ok(NullSpace {
        basis,
        pseudo_inverse_t: Some(pinv),
    })
}

/// Solves the QP from a feasible `start`.
///
/// `H` must be symmetric positive definite. `start` has to satisfy the bounds
/// and, when present, the equality constraints.
pub fn solve(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    equality: Option<(&DMatrix<f64>, &DVector<f64>)>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    start: &DVector<f64>,
    settings: &QpSettings,
) -> Result<QpSolution, QpError> {
    let n = g.len();
    if h.shape() != (n, n) || start.len() != n || lower.len() != n {
        return Err(QpError::Dimension(format!(
            "H {:?}, g {}, start {}, bounds {}",
            h.shape(),
            n,
            start.len(),
            lower.len()
        )));
    }
    check_bounds(lower, upper)?;
    if let Some((e, rhs)) = equality {
        if e.ncols() != n || e.nrows() != rhs.len() {
            return Err(QpError::Dimension(format!(
                "equality {:?} with rhs {}",
                e.shape(),
                rhs.len()
            )));
        }
    }

    let mut x = start.clone();
    for i in 0..n {
        if x[i] < lower[i] || x[i] > upper[i] || !x[i].is_finite() {
            return Err(QpError::InfeasibleStart(format!(
                "coordinate {i} = {} outside [{}, {}]",
                x[i], lower[i], upper[i]
            )));
        }
    }
    if let Some((e, rhs)) = equality {
        let residual = (e * &x - rhs).amax();
        let scale = 1.0 + rhs.amax() + e.amax() * x.amax();
        if residual > 1e-9 * scale {
            return Err(QpError::InfeasibleStart(format!(
                "equality residual {residual}"
            )));
        }
    }

    let mut working: Vec<Option<BoundSide>> = (0..n)
        .map(|i| {
            if lower[i] == upper[i] || x[i] == lower[i] {
                Some(BoundSide::Lower)
            } else if x[i] == upper[i] {
                Some(BoundSide::Upper)
            } else {
                None
            }
        })
        .collect();

    let h_scale = h.amax().max(1.0);
    let mut at_minimizer = false;
    let mut iterations = 0;

    loop {
        if iterations >= settings.max_iterations {
            return Err(QpError::NotConverged { iterations });
        }
        iterations += 1;

        let free: Vec<usize> = (0..n).filter(|&i| working[i].is_none()).collect();
        let grad = h * &x + g;
        let ef = equality.map(|(e, _)| e.select_columns(free.iter()));
        let ns = match &ef {
            Some(ef) => Some(null_space(ef, settings.tolerance)?),
            None => None,
        };

        if !at_minimizer {
            let p_free = subspace_step(h, &grad, &free, ns.as_ref())?;
            let step_norm = p_free.amax();
            if step_norm > settings.tolerance * (1.0 + x.amax()) {
                // longest feasible step along p, ties resolved towards the smallest index
                let mut alpha = 1.0;
                let mut blocking: Option<(usize, BoundSide)> = None;
                for (k, &i) in free.iter().enumerate() {
                    let p = p_free[k];
                    let (ratio, side) = if p < 0.0 {
                        ((lower[i] - x[i]) / p, BoundSide::Lower)
                    } else if p > 0.0 {
                        ((upper[i] - x[i]) / p, BoundSide::Upper)
                    } else {
                        continue;
                    };
                    let ratio = ratio.max(0.0);
                    if ratio < alpha {
                        alpha = ratio;
                        blocking = Some((i, side));
                    }
                }
                for (k, &i) in free.iter().enumerate() {
                    x[i] += alpha * p_free[k];
                }
                match blocking {
                    Some((i, side)) => {
                        x[i] = match side {
                            BoundSide::Lower => lower[i],
                            BoundSide::Upper => upper[i],
                        };
                        working[i] = Some(side);
                        at_minimizer = false;
                    }
                    None => at_minimizer = true,
                }
                continue;
            }
        }

        // multipliers of the working bounds at the current subspace minimizer
        let mut lambda_term = DVector::zeros(n);
        if let (Some((e, _)), Some(ns)) = (equality, ns.as_ref()) {
            if let Some(pinv_t) = &ns.pseudo_inverse_t {
                let b = -DVector::from_iterator(free.len(), free.iter().map(|&i| grad[i]));
                let lambda = pinv_t * b;
                lambda_term = e.transpose() * lambda;
            }
        }
        let threshold = settings.tolerance * (1.0 + h_scale * x.amax() + g.amax());
        let mut candidates: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            let Some(side) = working[i] else { continue };
            if lower[i] == upper[i] {
                continue;
            }
            let r = grad[i] + lambda_term[i];
            let mu = match side {
                BoundSide::Lower => r,
                BoundSide::Upper => -r,
            };
            if mu < -threshold {
                candidates.push((i, mu));
            }
        }
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

        // With more active bounds than the equality block can absorb, the
        // multipliers are not unique and a negative one need not mean the bound
        // can be left. Only release a bound whose trial step moves it inward.
        let inward = settings.tolerance.sqrt() * (1.0 + x.amax());
        let mut released = None;
        for &(i, _) in &candidates {
            if equality.is_none() {
                released = Some(i);
                break;
            }
            let side = working[i].expect("candidate is a working bound");
            working[i] = None;
            let trial_free: Vec<usize> = (0..n).filter(|&j| working[j].is_none()).collect();
            let ef = equality.map(|(e, _)| e.select_columns(trial_free.iter()));
            let trial_ns = match &ef {
                Some(ef) => Some(null_space(ef, settings.tolerance)?),
                None => None,
            };
            let p = subspace_step(h, &grad, &trial_free, trial_ns.as_ref())?;
            working[i] = Some(side);
            let k = trial_free.binary_search(&i).expect("released index is free");
            let moves_inward = match side {
                BoundSide::Lower => p[k] > inward,
                BoundSide::Upper => p[k] < -inward,
            };
            if moves_inward {
                released = Some(i);
                break;
            }
        }
        match released {
            None => {
                let x = clamp(&x, lower, upper);
                let active = (0..n)
                    .filter_map(|i| working[i].map(|s| (i, s)))
                    .collect();
                return Ok(QpSolution {
                    x,
                    iterations,
                    active,
                });
            }
            Some(i) => {
                working[i] = None;
                at_minimizer = false;
            }
        }
    }
}

/// Newton step restricted to the free coordinates and the equality null space.
fn subspace_step(
    h: &DMatrix<f64>,
    grad: &DVector<f64>,
    free: &[usize],
    ns: Option<&NullSpace>,
) -> Result<DVector<f64>, QpError> {
    let nf = free.len();
    if nf == 0 {
        return Ok(DVector::zeros(0));
    }
    let h_ff = h.select_rows(free.iter()).select_columns(free.iter());
    let g_f = DVector::from_iterator(nf, free.iter().map(|&i| grad[i]));
    match ns {
        None => {
            let chol = h_ff
                .cholesky()
                .ok_or_else(|| QpError::Numerical("Hessian is not positive definite".into()))?;
            Ok(-chol.solve(&g_f))
        }
        Some(ns) => {
            let z = &ns.basis;
            if z.ncols() == 0 {
                return Ok(DVector::zeros(nf));
            }
            let reduced = z.transpose() * &h_ff * z;
            let chol = reduced.cholesky().ok_or_else(|| {
                QpError::Numerical("reduced Hessian is not positive definite".into())
            })?;
            let y = chol.solve(&(-(z.transpose() * g_f)));
            Ok(z * y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bounds(n: usize, b: f64) -> (DVector<f64>, DVector<f64>) {
        (DVector::from_element(n, -b), DVector::from_element(n, b))
    }

    #[test]
    fn unconstrained_matches_normal_equations() {
        let j = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, -1.0]);
        let v = DVector::from_vec(vec![0.3, -0.2]);
        let (h, g) = least_squares_terms(&j, &v, 1e-6);
        let (lo, hi) = bounds(3, 10.0);
        let sol = solve(&h, &g, None, &lo, &hi, &DVector::zeros(3), &QpSettings::default())
            .unwrap();
        let expected = h.clone().cholesky().unwrap().solve(&(-g));
        assert_abs_diff_eq!(sol.x, expected, epsilon = 1e-12);
        assert!(sol.active.is_empty());
    }

    #[test]
    fn bounds_saturate_and_are_reported() {
        let h = DMatrix::identity(3, 3);
        let g = DVector::from_vec(vec![-5.0, 0.5, 3.0]);
        let (lo, hi) = bounds(3, 1.0);
        let sol = solve(&h, &g, None, &lo, &hi, &DVector::zeros(3), &QpSettings::default())
            .unwrap();
        assert_eq!(sol.x, DVector::from_vec(vec![1.0, -0.5, -1.0]));
        assert_eq!(
            sol.active,
            vec![(0, BoundSide::Upper), (2, BoundSide::Lower)]
        );
    }

    #[test]
    fn equality_is_preserved() {
        // minimise ‖x − c‖² on x0 + x1 + x2 = 1 with x2 ≤ 0.1
        let h = DMatrix::identity(3, 3);
        let c = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let g = -c;
        let e = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let rhs = DVector::from_vec(vec![1.0]);
        let lo = DVector::from_element(3, -10.0);
        let hi = DVector::from_vec(vec![10.0, 10.0, 0.1]);
        let start = DVector::from_vec(vec![0.5, 0.5, 0.0]);
        let sol = solve(&h, &g, Some((&e, &rhs)), &lo, &hi, &start, &QpSettings::default())
            .unwrap();
        assert_abs_diff_eq!(sol.x, DVector::from_vec(vec![0.45, 0.45, 0.1]), epsilon = 1e-12);
        assert_abs_diff_eq!((e * &sol.x)[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn releases_bounds_with_wrong_sign_multipliers() {
        let h = DMatrix::identity(2, 2);
        let g = DVector::from_vec(vec![-0.5, 0.2]);
        let (lo, hi) = bounds(2, 1.0);
        // start on the upper bound of coordinate 1, which the optimum leaves
        let start = DVector::from_vec(vec![0.0, 1.0]);
        let sol = solve(&h, &g, None, &lo, &hi, &start, &QpSettings::default()).unwrap();
        assert_abs_diff_eq!(sol.x, DVector::from_vec(vec![0.5, -0.2]), epsilon = 1e-14);
        assert!(sol.active.is_empty());
    }

    #[test]
    fn empty_interval_is_reported() {
        let h = DMatrix::identity(2, 2);
        let g = DVector::zeros(2);
        let lo = DVector::from_vec(vec![0.0, 1.0]);
        let hi = DVector::from_vec(vec![1.0, 0.0]);
        let err = solve(&h, &g, None, &lo, &hi, &DVector::zeros(2), &QpSettings::default())
            .unwrap_err();
        assert!(matches!(err, QpError::InfeasibleBounds { index: 1, .. }));
    }

    #[test]
    fn iteration_cap_is_enforced() {
        let h = DMatrix::identity(3, 3);
        let g = DVector::from_vec(vec![-5.0, 5.0, -5.0]);
        let (lo, hi) = bounds(3, 1.0);
        let settings = QpSettings {
            max_iterations: 1,
            tolerance: 1e-12,
        };
        let err = solve(&h, &g, None, &lo, &hi, &DVector::zeros(3), &settings).unwrap_err();
        assert_eq!(err, QpError::NotConverged { iterations: 1 });
    }
}
