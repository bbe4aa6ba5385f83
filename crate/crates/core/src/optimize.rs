//! Derivative-free maximizers: golden-section line search, 1-D grid plus
//! refinement, and cyclic coordinate refinement over a box.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Best point found by a maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum1d {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Exact for unimodal `f` up to `x_tol`. The endpoints are evaluated as
/// well, so maxima sitting on the boundary are returned exactly.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, x_tol: f64) -> Maximum1d {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = Maximum1d { x: mid, value: f(mid) };
    for (x, v) in [(c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))] {
        if v > best.value {
            best = Maximum1d { x, value: v };
        }
    }
    best
}

/// Maximizes `f` on `[lo, hi]` by scanning `cells` uniform cells and then
/// golden-section refining around the best grid point.
///
/// Never returns a value below the best grid value.
pub fn grid_golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cells: usize, x_tol: f64) -> Maximum1d {
    let cells = cells.max(2);
    let h = (hi - lo) / cells as f64;
    let mut best = Maximum1d { x: lo, value: f(lo) };
    let mut best_i = 0;
    for i in 1..=cells {
        let x = if i == cells { hi } else { lo + h * i as f64 };
        let v = f(x);
        if v > best.value {
            best = Maximum1d { x, value: v };
            best_i = i;
        }
    }
    let a = (lo + h * (best_i as f64 - 1.0)).max(lo);
    let b = (lo + h * (best_i as f64 + 1.0)).min(hi);
    let refined = golden_max(&f, a, b, x_tol);
    if refined.value > best.value {
        refined
    } else {
        best
    }
}

/// Result of [`coordinate_refine`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoxMaximum {
    pub x: Vec<f64>,
    pub value: f64,
    pub sweeps: usize,
}

/// Cyclic coordinate ascent with golden-section line searches.
///
/// `bounds(i, x)` returns the admissible interval of coordinate `i` with the
/// other coordinates held at `x`, which lets callers express simplex
/// constraints. A coordinate move is only accepted when it strictly improves
/// the objective, so the returned value is never below `f(start)`.
pub fn coordinate_refine<F, B>(f: F, bounds: B, start: &[f64], x_tol: f64, max_sweeps: usize) -> BoxMaximum
where
    F: Fn(&[f64]) -> f64,
    B: Fn(usize, &[f64]) -> (f64, f64),
{
    let mut x = start.to_vec();
    let mut value = f(&x);
    let mut sweeps = 0;
    let mut scratch = x.clone();
    while sweeps < max_sweeps {
        sweeps += 1;
        let before = value;
        for i in 0..x.len() {
            let (lo, hi) = bounds(i, &x);
            if hi <= lo {
                continue;
            }
            scratch.copy_from_slice(&x);
            let line = |t: f64| {
                let mut y = scratch.clone();
                y[i] = t;
                f(&y)
            };
            let m = golden_max(line, lo, hi, x_tol);
            if m.value > value {
                x[i] = m.x;
                value = m.value;
            }
        }
        if value - before <= 1e-15 * value.abs().max(1.0) {
            break;
        }
    }
    BoxMaximum { x, value, sweeps }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_max() {
        let m = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((m.x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn golden_finds_boundary_max() {
        let m = golden_max(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!(m.x, 1.0);
        assert_eq!(m.value, 1.0);
    }

    #[test]
    fn grid_golden_escapes_local_max() {
        // two bumps, the right one higher
        let f = |x: f64| (-(x - 0.2).powi(2) * 200.0).exp() + 1.5 * (-(x - 0.8).powi(2) * 200.0).exp();
        let m = grid_golden_max(f, 0.0, 1.0, 100, 1e-12);
        assert!((m.x - 0.8).abs() < 1e-6);
    }

    #[test]
    fn coordinate_refine_quadratic() {
        let f = |x: &[f64]| -((x[0] - 0.25).powi(2) + 2.0 * (x[1] - 0.75).powi(2) + 0.5 * (x[0] - 0.25) * (x[1] - 0.75));
        let m = coordinate_refine(f, |_, _| (0.0, 1.0), &[0.9, 0.1], 1e-12, 500);
        assert!((m.x[0] - 0.25).abs() < 1e-6);
        assert!((m.x[1] - 0.75).abs() < 1e-6);
        assert!(m.value >= f(&[0.9, 0.1]));
    }
}
