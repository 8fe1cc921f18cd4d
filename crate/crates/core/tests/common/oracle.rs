//! Brute-force reference solutions, written without reference to the
//! library's algorithms.

use nalgebra::{DMatrix, DVector};

/// Weighted isotonic regression by trying every split of `0..n` into
/// contiguous blocks: each block takes its weighted mean, and the feasible
/// (non-decreasing) candidate with the smallest weighted SSE wins.
pub fn isotonic_exhaustive(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = values.len();
    assert!((1..=16).contains(&n));
    let mut best: Option<(f64, Vec<f64>)> = None;
    for cuts in 0u32..(1 << (n - 1)) {
        let mut fitted = Vec::with_capacity(n);
        let mut start = 0;
        for end in 1..=n {
            if end == n || cuts & (1 << (end - 1)) != 0 {
                let w: f64 = weights[start..end].iter().sum();
                let s: f64 = (start..end).map(|i| weights[i] * values[i]).sum();
                fitted.extend(std::iter::repeat_n(s / w, end - start));
                start = end;
            }
        }
        if fitted.windows(2).any(|p| p[1] < p[0]) {
            continue;
        }
        let sse: f64 = (0..n)
            .map(|i| weights[i] * (values[i] - fitted[i]).powi(2))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b) {
            best = Some((sse, fitted));
        }
    }
    best.expect("the single pooled block is always feasible").1
}

/// Lawson–Hanson non-negative least squares: `argmin_{x ≥ 0} |Ax - b|`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = a.ncols();
    let mut x = DVector::zeros(m);
    let mut passive = vec![false; m];
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())) * b.amax().max(1.0);
    let tol = 1e-13 * scale * m as f64;
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(&idx);
        let z = sub.svd(true, true).solve(b, 1e-14).expect("svd solve");
        let mut full = DVector::zeros(m);
        for (k, &j) in idx.iter().enumerate() {
            full[j] = z[k];
        }
        full
    };
    // with dependent columns an index can re-enter only to be dropped again;
    // it is skipped until some other index enters for good
    let mut banned = vec![false; m];
    for _ in 0..(10 * m + 10) {
        let grad = a.transpose() * (b - a * &x);
        let cand = (0..m)
            .filter(|&j| !passive[j] && !banned[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let entering = match cand {
            Some(j) if grad[j] > tol => j,
            _ => return x,
        };
        passive[entering] = true;
        loop {
            let z = solve_passive(&passive);
            let bad: Vec<usize> = (0..m).filter(|&j| passive[j] && z[j] <= 0.0).collect();
            if bad.is_empty() {
                x = z;
                break;
            }
            let alpha = bad
                .iter()
                .map(|&j| x[j] / (x[j] - z[j]))
                .fold(f64::INFINITY, f64::min);
            x = &x + (z - &x) * alpha;
            for j in 0..m {
                if passive[j] && x[j] <= 1e-15 * scale {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
        if passive[entering] {
            banned.fill(false);
        } else {
            banned[entering] = true;
        }
    }
    panic!("nnls did not terminate");
}

/// Pairs `(i, j)` of row-major indices that are neighbours along some axis,
/// with `j` the larger coordinate.
pub fn adjacent_pairs(shape: &[usize]) -> Vec<(usize, usize)> {
    let total: usize = shape.iter().product();
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    let mut pairs = Vec::new();
    for i in 0..total {
        for k in 0..shape.len() {
            if (i / strides[k]) % shape[k] + 1 < shape[k] {
                pairs.push((i, i + strides[k]));
            }
        }
    }
    pairs
}

/// Weighted projection of row-major `values` onto the coordinatewise
/// non-decreasing arrays: the primal `min Σ w (v - g)²` subject to
/// `g_j - g_i ≥ 0` for every adjacent pair, solved through its dual.
///
/// With `A` the constraint matrix the optimum is `g = v + W⁻¹Aᵀμ`, where
/// `μ ≥ 0` minimises `|W^{-1/2}Aᵀμ + W^{1/2}v|²`. On grids with cycles the
/// dual is degenerate and the result is accurate to about 1e-7 relative.
pub fn monotone_qp(values: &[f64], shape: &[usize], weights: &[f64]) -> Vec<f64> {
    let pairs = adjacent_pairs(shape);
    let n = values.len();
    // column c of Aᵀ is the gradient of constraint c: +1 at j, -1 at i
    let mut at = DMatrix::zeros(n, pairs.len());
    for (c, &(i, j)) in pairs.iter().enumerate() {
        at[(i, c)] = -1.0;
        at[(j, c)] = 1.0;
    }
    let m = DMatrix::from_fn(n, pairs.len(), |r, c| at[(r, c)] / weights[r].sqrt());
    let b = DVector::from_fn(n, |r, _| -weights[r].sqrt() * values[r]);
    let mu = nnls(&m, &b);
    let shift = &at * &mu;
    let g: Vec<f64> = (0..n).map(|r| values[r] + shift[r] / weights[r]).collect();
    // certificate: μ ≥ 0 and stationarity hold by construction, so check
    // primal feasibility and complementary slackness
    let range = values
        .iter()
        .fold(0.0f64, |s, v| s.max(v.abs()))
        .max(1e-300);
    let slack: Vec<f64> = pairs.iter().map(|&(i, j)| g[j] - g[i]).collect();
    let infeasible = slack.iter().fold(0.0f64, |s, d| s.max(-d));
    let gap: f64 = slack.iter().zip(mu.iter()).map(|(d, u)| d * u).sum();
    assert!(
        infeasible <= 1e-6 * range && gap.abs() <= 1e-8 * range * range,
        "qp oracle: infeasibility {infeasible:e}, gap {gap:e}"
    );
    g
}

/// Weighted isotonic regression on an `a × b` grid (row-major) by the
/// max–min formula `g(x) = max_{U ∋ x} min_{L ∋ x} Av(U ∩ L)` over upper
/// sets `U` and lower sets `L` of the product order. Exact, no iteration.
pub fn isotonic_minimax_2d(values: &[f64], shape: [usize; 2], weights: &[f64]) -> Vec<f64> {
    let [a, b] = shape;
    // a lower set keeps the first `c_r` cells of row r, c_0 ≥ c_1 ≥ … ≥ c_{a-1}
    let mut lower: Vec<Vec<bool>> = Vec::new();
    let mut counts = vec![0usize; a];
    fn extend(r: usize, cap: usize, counts: &mut Vec<usize>, b: usize, out: &mut Vec<Vec<bool>>) {
        if r == counts.len() {
            out.push(
                (0..counts.len() * b)
                    .map(|k| k % b < counts[k / b])
                    .collect(),
            );
            return;
        }
        for c in 0..=cap {
            counts[r] = c;
            extend(r + 1, c, counts, b, out);
        }
    }
    extend(0, b, &mut counts, b, &mut lower);
    let upper: Vec<Vec<bool>> = lower
        .iter()
        .map(|l| l.iter().map(|x| !x).collect())
        .collect();
    let n = a * b;
    (0..n)
        .map(|x| {
            upper
                .iter()
                .filter(|u| u[x])
                .map(|u| {
                    lower
                        .iter()
                        .filter(|l| l[x])
                        .map(|l| {
                            let (mut sw, mut swv) = (0.0, 0.0);
                            for k in (0..n).filter(|&k| u[k] && l[k]) {
                                sw += weights[k];
                                swv += weights[k] * values[k];
                            }
                            swv / sw
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Value of the spline with coefficients `coef` at `x`, by de Boor's
/// triangular scheme (not the basis recursion). Valid on
/// `[t_{order-1}, t_n]`; at `right_end` the left limit is taken.
pub fn de_boor(knots: &[f64], coef: &[f64], order: usize, x: f64, right_end: f64) -> f64 {
    let n = coef.len();
    assert_eq!(knots.len(), n + order);
    if x < knots[order - 1] || x > knots[n] {
        return 0.0;
    }
    let mut mu = order - 1;
    while mu + 1 < n && (knots[mu + 1] < x || (knots[mu + 1] == x && x < right_end)) {
        mu += 1;
    }
    let mut d: Vec<f64> = (0..order).map(|r| coef[mu + 1 - order + r]).collect();
    for r in 1..order {
        for s in (r..order).rev() {
            let i = mu + 1 - order + s;
            let den = knots[i + order - r] - knots[i];
            let alpha = if den > 0.0 { (x - knots[i]) / den } else { 0.0 };
            d[s] = (1.0 - alpha) * d[s - 1] + alpha * d[s];
        }
    }
    d[order - 1]
}

/// Knots, coefficients and order of the derivative spline.
pub fn differentiate(knots: &[f64], coef: &[f64], order: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let k = order as f64 - 1.0;
    let d = (0..coef.len() - 1)
        .map(|i| {
            let den = knots[i + order] - knots[i + 1];
            if den > 0.0 {
                k * (coef[i + 1] - coef[i]) / den
            } else {
                0.0
            }
        })
        .collect();
    (knots[1..knots.len() - 1].to_vec(), d, order - 1)
}

/// `d`-th derivative of basis function `j`. The knot vector is padded by
/// `order - 1` knots on each side so that every original basis function
/// lies where de Boor's scheme is valid.
pub fn basis_derivative(knots: &[f64], order: usize, j: usize, d: usize, x: f64) -> f64 {
    let (lo, hi) = (knots[0], knots[knots.len() - 1]);
    if x < lo || x > hi {
        return 0.0;
    }
    let pad = order - 1;
    let mut t: Vec<f64> = (0..pad).rev().map(|i| lo - 1.0 - i as f64).collect();
    t.extend_from_slice(knots);
    t.extend((0..pad).map(|i| hi + 1.0 + i as f64));
    let n = t.len() - order;
    let mut coef: Vec<f64> = (0..n)
        .map(|i| if i == j + pad { 1.0 } else { 0.0 })
        .collect();
    let mut k = order;
    for _ in 0..d {
        let (t2, c2, k2) = differentiate(&t, &coef, k);
        t = t2;
        coef = c2;
        k = k2;
    }
    de_boor(&t, &coef, k, x, hi)
}

/// 5-point Gauss–Legendre nodes and weights on `[-1, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Quadrature nodes and weights over the knot range, exact for polynomial
/// pieces of degree ≤ 9 between knots.
pub fn knot_quadrature(knots: &[f64]) -> Vec<(f64, f64)> {
    let mut q = Vec::new();
    for w in knots.windows(2).filter(|w| w[1] > w[0]) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        q.extend(GL5.iter().map(|(x, wt)| (mid + half * x, wt * half)));
    }
    q
}

/// Maps knots and points onto the unit interval of the knot range.
pub fn to_unit(knots: &[f64], xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = (knots[0], knots[knots.len() - 1]);
    let u = |x: &f64| (x - lo) / (hi - lo);
    (knots.iter().map(u).collect(), xs.iter().map(u).collect())
}

/// Dense penalised cubic spline fit in unit coordinates: forms the normal
/// equations `(λB'B + (1-λ)Ω) c = λB'y` with `Ω` integrated by quadrature
/// and solves them by LU. Returns the coefficients and the objective.
pub fn spline_1d(knots: &[f64], xs: &[f64], ys: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let (t, u) = to_unit(knots, xs);
    let nb = t.len() - 4;
    let b = DMatrix::from_fn(u.len(), nb, |r, j| basis_derivative(&t, 4, j, 0, u[r]));
    let mut omega = DMatrix::zeros(nb, nb);
    for (x, w) in knot_quadrature(&t) {
        let d2: Vec<f64> = (0..nb).map(|j| basis_derivative(&t, 4, j, 2, x)).collect();
        for i in 0..nb {
            for j in 0..nb {
                omega[(i, j)] += w * d2[i] * d2[j];
            }
        }
    }
    solve_normal(&b, &omega, ys, lambda)
}

/// Design and penalty of the tensor-product problem in unit coordinates,
/// with penalty `∫∫ F_ss² + 2F_st² + F_tt²` integrated pointwise on the
/// unit square. Coefficients are ordered with the second axis fastest.
fn tensor_system(ks: &[f64], kt: &[f64], xs: &[(f64, f64)]) -> (DMatrix<f64>, DMatrix<f64>) {
    let s_pts: Vec<f64> = xs.iter().map(|p| p.0).collect();
    let t_pts: Vec<f64> = xs.iter().map(|p| p.1).collect();
    let (s, us) = to_unit(ks, &s_pts);
    let (t, ut) = to_unit(kt, &t_pts);
    let (ns, nt) = (s.len() - 4, t.len() - 4);
    let m = ns * nt;
    let b = DMatrix::from_fn(xs.len(), m, |r, c| {
        basis_derivative(&s, 4, c / nt, 0, us[r]) * basis_derivative(&t, 4, c % nt, 0, ut[r])
    });
    let mut omega = DMatrix::zeros(m, m);
    for (x, wx) in knot_quadrature(&s) {
        for (y, wy) in knot_quadrature(&t) {
            let d = |c: usize, a: usize, bb: usize| {
                basis_derivative(&s, 4, c / nt, a, x) * basis_derivative(&t, 4, c % nt, bb, y)
            };
            let fss: Vec<f64> = (0..m).map(|c| d(c, 2, 0)).collect();
            let fst: Vec<f64> = (0..m).map(|c| d(c, 1, 1)).collect();
            let ftt: Vec<f64> = (0..m).map(|c| d(c, 0, 2)).collect();
            let w = wx * wy;
            for i in 0..m {
                for j in 0..m {
                    omega[(i, j)] +=
                        w * (fss[i] * fss[j] + 2.0 * fst[i] * fst[j] + ftt[i] * ftt[j]);
                }
            }
        }
    }
    (b, omega)
}

/// Tensor-product analogue of [`spline_1d`].
pub fn spline_2d(
    ks: &[f64],
    kt: &[f64],
    xs: &[(f64, f64)],
    ys: &[f64],
    lambda: f64,
) -> (Vec<f64>, f64) {
    let (b, omega) = tensor_system(ks, kt, xs);
    solve_normal(&b, &omega, ys, lambda)
}

/// Objective of arbitrary coefficients under the oracle's tensor quadratic form.
pub fn spline_2d_objective(
    ks: &[f64],
    kt: &[f64],
    xs: &[(f64, f64)],
    ys: &[f64],
    lambda: f64,
    coef: &[f64],
) -> f64 {
    let (b, omega) = tensor_system(ks, kt, xs);
    objective(
        &b,
        &omega,
        &DVector::from_column_slice(ys),
        &DVector::from_column_slice(coef),
        lambda,
    )
}

fn solve_normal(
    b: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    ys: &[f64],
    lambda: f64,
) -> (Vec<f64>, f64) {
    let y = DVector::from_column_slice(ys);
    let lhs = b.transpose() * b * lambda + omega * (1.0 - lambda);
    let rhs = b.transpose() * &y * lambda;
    let c = lhs
        .lu()
        .solve(&rhs)
        .expect("normal equations are non-singular");
    let obj = objective(b, omega, &y, &c, lambda);
    (c.iter().copied().collect(), obj)
}

fn objective(
    b: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    y: &DVector<f64>,
    c: &DVector<f64>,
    lambda: f64,
) -> f64 {
    lambda * (b * c - y).norm_squared() + (1.0 - lambda) * c.dot(&(omega * c))
}

/// Objective of arbitrary coefficients under the oracle's 1-D quadratic form.
pub fn spline_1d_objective(
    knots: &[f64],
    xs: &[f64],
    ys: &[f64],
    lambda: f64,
    coef: &[f64],
) -> f64 {
    let (t, u) = to_unit(knots, xs);
    let nb = t.len() - 4;
    let c = DVector::from_column_slice(coef);
    let fitted: Vec<f64> = u
        .iter()
        .map(|x| {
            (0..nb)
                .map(|j| c[j] * basis_derivative(&t, 4, j, 0, *x))
                .sum()
        })
        .collect();
    let sse: f64 = fitted.iter().zip(ys).map(|(f, y)| (f - y).powi(2)).sum();
    let pen: f64 = knot_quadrature(&t)
        .into_iter()
        .map(|(x, w)| {
            let f2: f64 = (0..nb)
                .map(|j| c[j] * basis_derivative(&t, 4, j, 2, x))
                .sum();
            w * f2 * f2
        })
        .sum();
    lambda * sse + (1.0 - lambda) * pen
}
