//! Upper convex hull via Andrew's monotone chain.

/// Turns whose sine is within this of zero count as collinear.
pub const CROSS_TOL: f64 = 1e-12;

#[inline]
fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Cross product scaled by the lengths of both legs, so the tolerance is
/// independent of how far apart the points are.
#[inline]
fn turn(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let la = (a.0 - o.0).hypot(a.1 - o.1);
    let lb = (b.0 - o.0).hypot(b.1 - o.1);
    if la == 0.0 || lb == 0.0 {
        return 0.0;
    }
    cross(o, a, b) / (la * lb)
}

/// Indices of the upper hull of `points`, ordered by increasing x.
///
/// Collinear points are dropped. Non-finite points are ignored.
pub fn upper_hull(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len())
        .filter(|&i| points[i].0.is_finite() && points[i].1.is_finite())
        .collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i], points[j]);
        a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)).then(i.cmp(&j))
    });
    let mut hull: Vec<usize> = Vec::with_capacity(order.len());
    for &i in &order {
        let p = points[i];
        if let Some(&last) = hull.last() {
            if points[last].0 == p.0 {
                // same x, lower or equal y: cannot be on the upper hull
                continue;
            }
        }
        while hull.len() >= 2 {
            let a = points[hull[hull.len() - 2]];
            let b = points[hull[hull.len() - 1]];
            if turn(a, b, p) >= -CROSS_TOL {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Indices of the upper-right (Pareto) part of the upper hull: from the
/// highest point down to the rightmost one, ordered by increasing x.
pub fn pareto_hull(points: &[(f64, f64)]) -> Vec<usize> {
    let hull = upper_hull(points);
    let Some(top) = hull
        .iter()
        .enumerate()
        .max_by(|(_, &i), (_, &j)| points[i].1.total_cmp(&points[j].1).then(points[j].0.total_cmp(&points[i].0)))
        .map(|(k, _)| k)
    else {
        return hull;
    };
    hull[top..].to_vec()
}

/// True when the polyline through `points` (ordered by x) turns clockwise at
/// every interior vertex.
pub fn is_concave_chain(points: &[(f64, f64)]) -> bool {
    points.windows(3).all(|w| turn(w[0], w[1], w[2]) <= CROSS_TOL)
        && points.windows(2).all(|w| w[0].0 <= w[1].0)
}
