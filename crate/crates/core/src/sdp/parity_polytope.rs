//! The parity polytope `PP_d = conv{x in {0,1}^d : |x| even}`, which is
//! exactly the set cut out by a check's forbidden-set rows plus the box.

/// Euclidean projection of `v` onto `PP_d`, written into `out`.
///
/// The box-clipped point can violate at most one forbidden-set row, the one
/// whose odd set holds the coordinates above 1/2 (parity fixed by toggling the
/// coordinate nearest 1/2). When it does, the projection lies on that facet,
/// and is found by a one-dimensional search on the facet multiplier.
pub fn project(v: &[f64], out: &mut [f64]) {
    let d = v.len();
    debug_assert_eq!(out.len(), d);
    let mut count = 0;
    let mut nearest = 0;
    let mut nearest_gap = f64::INFINITY;
    let mut in_set = [false; 64];
    for i in 0..d {
        out[i] = v[i].clamp(0.0, 1.0);
        in_set[i] = out[i] > 0.5;
        count += usize::from(in_set[i]);
        let gap = (out[i] - 0.5).abs();
        if gap < nearest_gap {
            nearest_gap = gap;
            nearest = i;
        }
    }
    if count % 2 == 0 {
        in_set[nearest] = !in_set[nearest];
        count = if in_set[nearest] { count + 1 } else { count - 1 };
    }
    let rhs = count as f64 - 1.0;
    let sign = |i: usize| if in_set[i] { 1.0 } else { -1.0 };
    let facet = |beta: f64| -> f64 { (0..d).map(|i| sign(i) * (v[i] - beta * sign(i)).clamp(0.0, 1.0)).sum() };
    if (0..d).map(|i| sign(i) * out[i]).sum::<f64>() <= rhs {
        return;
    }

    // facet(beta) is continuous, piecewise linear and nonincreasing; its kinks
    // sit where some coordinate enters or leaves the box.
    let mut breaks: Vec<f64> = (0..d)
        .flat_map(|i| {
            let s = sign(i);
            [s * v[i], s * (v[i] - 1.0)]
        })
        .filter(|&b| b > 0.0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    let (mut lo, mut lo_val) = (0.0, facet(0.0));
    let mut beta = lo;
    for &b in &breaks {
        let val = facet(b);
        if val <= rhs {
            beta = if lo_val - val > 0.0 { lo + (lo_val - rhs) * (b - lo) / (lo_val - val) } else { b };
            break;
        }
        lo = b;
        lo_val = val;
        beta = b;
    }
    for i in 0..d {
        out[i] = (v[i] - beta * sign(i)).clamp(0.0, 1.0);
    }
}

/// `min_{x in PP_d} c^T x`, attained at an even-weight vertex.
pub fn min_linear(c: &[f64]) -> f64 {
    let mut value = 0.0;
    let mut count = 0;
    let mut weakest = f64::INFINITY;
    for &ci in c {
        if ci < 0.0 {
            value += ci;
            count += 1;
        }
        weakest = weakest.min(ci.abs());
    }
    if count % 2 == 1 {
        value += weakest;
    }
    value
}
