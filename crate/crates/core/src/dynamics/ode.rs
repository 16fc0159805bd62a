//! Autonomous ODE steppers on flat coordinate vectors: classical RK4 and the
//! Dormand–Prince 5(4) embedded pair.

use crate::error::{Error, Result};

pub(crate) type Rhs<'a> = dyn FnMut(&[f64]) -> Result<Vec<f64>> + 'a;

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(k.iter()) {
                *o += h * c * v;
            }
        }
    }
    out
}

pub(crate) fn rk4_step(f: &mut Rhs<'_>, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = f(y)?;
    let k2 = f(&axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = f(&axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = f(&axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince attempt from `y` with derivative `k1`; returns the new
/// state, its derivative (FSAL) and the scaled RMS error.
pub(crate) fn dopri_attempt(
    f: &mut Rhs<'_>,
    y: &[f64],
    k1: &[f64],
    h: f64,
    rtol: f64,
    atol: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let k2 = f(&axpy(y, h, &[(A21, k1)]))?;
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    if y_new.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state after adaptive step".into()));
    }
    let k7 = f(&y_new)?;
    let mut sum = 0.0;
    for i in 0..y.len() {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        sum += (e / sc).powi(2);
    }
    let err = (sum / y.len().max(1) as f64).sqrt();
    Ok((y_new, k7, err))
}

/// Starting step after Hairer–Nørsett–Wanner.
pub(crate) fn initial_step(f: &mut Rhs<'_>, y: &[f64], k1: &[f64], rtol: f64, atol: f64) -> Result<f64> {
    let norm = |v: &[f64], base: &[f64]| {
        let s: f64 = v
            .iter()
            .zip(base)
            .map(|(a, b)| (a / (atol + rtol * b.abs())).powi(2))
            .sum();
        (s / v.len().max(1) as f64).sqrt()
    };
    let d0 = norm(y, y);
    let d1 = norm(k1, y);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, h0, &[(1.0, k1)]);
    let k2 = f(&y1)?;
    let diff: Vec<f64> = k2.iter().zip(k1).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff, y) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1))
}

/// Step-size factor for the next attempt given the scaled error.
pub(crate) fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_is_fourth_order_on_exponential() {
        let mut f = |y: &[f64]| Ok(vec![y[0]]);
        let run = |h: f64, f: &mut Rhs<'_>| {
            let mut y = vec![1.0];
            let steps = (1.0 / h).round() as usize;
            for _ in 0..steps {
                y = rk4_step(f, &y, h).unwrap();
            }
            (y[0] - 1f64.exp()).abs()
        };
        let ratio = run(0.1, &mut f) / run(0.05, &mut f);
        assert!((ratio - 16.0).abs() < 1.5, "ratio={ratio}");
    }

    #[test]
    fn tableau_rows_are_consistent() {
        const C2: f64 = 1.0 / 5.0;
        const C3: f64 = 3.0 / 10.0;
        const C4: f64 = 4.0 / 5.0;
        const C5: f64 = 8.0 / 9.0;
        let rows = [
            (C2, A21),
            (C3, A31 + A32),
            (C4, A41 + A42 + A43),
            (C5, A51 + A52 + A53 + A54),
            (1.0, A61 + A62 + A63 + A64 + A65),
        ];
        for (c, s) in rows {
            assert!((c - s).abs() < 1e-14);
        }
        assert!((B1 + B3 + B4 + B5 + B6 - 1.0).abs() < 1e-14);
        assert!((E1 + E3 + E4 + E5 + E6 + E7).abs() < 1e-15);
    }

    #[test]
    fn dopri_error_estimate_tracks_step() {
        let mut f = |y: &[f64]| Ok(vec![-y[1], y[0]]);
        let y = [1.0, 0.0];
        let k1 = f(&y).unwrap();
        let (_, _, e1) = dopri_attempt(&mut f, &y, &k1, 0.2, 1e-8, 1e-8).unwrap();
        let (_, _, e2) = dopri_attempt(&mut f, &y, &k1, 0.1, 1e-8, 1e-8).unwrap();
        // local error is O(h^5)
        assert!((e1 / e2).log2() > 4.0, "{e1} {e2}");
    }
}
