// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scalar and small-system root finders.

use nalgebra::{Matrix2, Vector2, Vector3};

/// Brent's method on a bracket with `f(a)·f(b) ≤ 0`.
pub fn brent(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Some(b)
}

/// Gauss-Newton on a 3-residual in 2 unknowns, with a forward-difference Jacobian and
/// step halving whenever the residual grows. Returns the point once `|r| ≤ tol`.
pub fn gauss_newton_2d(
    r: impl Fn(Vector2<f64>) -> Vector3<f64>,
    start: Vector2<f64>,
    tol: f64,
    max_iter: usize,
) -> Option<Vector2<f64>> {
    let mut x = start;
    let mut rx = r(x);
    for _ in 0..max_iter {
        if rx.norm() <= tol {
            return Some(x);
        }
        let h = 1e-7;
        let j0 = (r(x + Vector2::new(h, 0.0)) - rx) / h;
        let j1 = (r(x + Vector2::new(0.0, h)) - rx) / h;
        let jtj = Matrix2::new(j0.dot(&j0), j0.dot(&j1), j0.dot(&j1), j1.dot(&j1));
        let jtr = Vector2::new(j0.dot(&rx), j1.dot(&rx));
        let step = jtj.try_inverse()? * (-jtr);
        let mut lambda = 1.0;
        loop {
            let trial = x + step * lambda;
            let rt = r(trial);
            if rt.norm() < rx.norm() {
                x = trial;
                rx = rt;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return (rx.norm() <= tol).then_some(x);
            }
        }
    }
    (rx.norm() <= tol).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let x = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn gauss_newton_consistent_system() {
        let r = |p: Vector2<f64>| Vector3::new(p.x - 1.0, p.y + 2.0, (p.x - 1.0) * (p.y + 2.0));
        let x = gauss_newton_2d(r, Vector2::new(0.3, 0.1), 1e-13, 50).unwrap();
        assert!((x - Vector2::new(1.0, -2.0)).norm() < 1e-12);
    }
}
