//! Three-dimensional vector helpers, radial truncation and the deflection frame.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn vec3(x: &[f64]) -> Vec3 {
    [x[0], x[1], x[2]]
}

/// Radial projection onto the closed ball of radius `gamma_cap`; zero maps to zero.
pub fn truncate(v: &[f64], gamma_cap: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    truncate_in_place(&mut out, gamma_cap);
    out
}

pub fn truncate_in_place(v: &mut [f64], gamma_cap: f64) {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if n > gamma_cap {
        let s = gamma_cap / n;
        v.iter_mut().for_each(|c| *c *= s);
    }
}

#[inline]
pub fn truncate3(v: &Vec3, gamma_cap: f64) -> Vec3 {
    let n = norm3(v);
    if n > gamma_cap {
        scale(v, gamma_cap / n)
    } else {
        *v
    }
}

/// Vectors `I, J` completing `X/|X|` to an orthonormal basis, both of length `|X|`.
///
/// Rule: take the standard axis `e` where `|X_k|` is smallest (lowest index on
/// ties), `I = (X x e) |X| / |X x e|`, `J = (X x I) / |X|`.
pub fn frame(x: &Vec3) -> Result<(Vec3, Vec3)> {
    let n = norm3(x);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(frame_unchecked(x, n))
}

#[inline]
fn frame_unchecked(x: &Vec3, n: f64) -> (Vec3, Vec3) {
    let ax = [x[0].abs(), x[1].abs(), x[2].abs()];
    let mut k = 0;
    if ax[1] < ax[k] {
        k = 1;
    }
    if ax[2] < ax[k] {
        k = 2;
    }
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let xe = cross(x, &e);
    let i = scale(&xe, n / norm3(&xe));
    let j = scale(&cross(x, &i), 1.0 / n);
    (i, j)
}

/// `cos(phi) I(X) + sin(phi) J(X)`, with `Delta(0, phi) = 0`.
pub fn delta(x: &Vec3, phi: f64) -> Vec3 {
    let n = norm3(x);
    if n == 0.0 {
        return [0.0; 3];
    }
    let (i, j) = frame_unchecked(x, n);
    let (s, c) = phi.sin_cos();
    [c * i[0] + s * j[0], c * i[1] + s * j[1], c * i[2] + s * j[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncate_examples() {
        assert_eq!(truncate(&[3.0, 0.0, 0.0], 2.0), vec![2.0, 0.0, 0.0]);
        assert_eq!(truncate(&[0.5, -0.5, 0.0], 2.0), vec![0.5, -0.5, 0.0]);
        let t = truncate(&[3.0, 4.0, 0.0], 1.0);
        assert!((t[0] - 0.6).abs() < 1e-15 && (t[1] - 0.8).abs() < 1e-15 && t[2] == 0.0);
        assert_eq!(truncate(&[0.0, 0.0, 0.0], 1.0), vec![0.0; 3]);
    }

    #[test]
    fn frame_example() {
        let (i, j) = frame(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(i, [0.0, 0.0, 1.0]);
        assert_eq!(j, [0.0, -1.0, 0.0]);
        assert!(matches!(frame(&[0.0; 3]), Err(Error::ZeroVector)));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&[1.0, 0.0, 0.0], 0.0), [0.0, 0.0, 1.0]);
        assert_eq!(delta(&[0.0; 3], 1.3), [0.0; 3]);
        let x = [0.3, -1.2, 2.0];
        let m = 64;
        let mut acc = [0.0; 3];
        for l in 0..m {
            let phi = (l as f64 + 0.5) * 2.0 * std::f64::consts::PI / m as f64;
            let d = delta(&x, phi);
            for k in 0..3 {
                acc[k] += d[k] * 2.0 * std::f64::consts::PI / m as f64;
            }
        }
        assert!(acc.iter().all(|a| a.abs() <= 1e-12), "{acc:?}");
    }
}
