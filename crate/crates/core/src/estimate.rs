//! Norm estimation for the inverse of a triangular factor.
//!
//! Hager's method with Higham's refinements, in the form used by LAPACK's
//! `xLACN2`/`xTRCON`: a short gradient ascent on `‖B x‖₁` over the unit
//! 1-norm ball, where `B x` and `Bᵀ x` are triangular solves, followed by one
//! extra probe with an alternating-sign vector. Every candidate is
//! `‖B v‖₁ / ‖v‖₁` for an explicit `v`, so the estimate never exceeds the true
//! norm.

use serde::{Deserialize, Serialize};

use crate::dense::norm1;
use crate::factor::{Triangular, UpperTriangular};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    One,
    Infinity,
}

/// Maximum number of ascent steps after the first.
pub const MAX_ITERATIONS: usize = 5;

/// Estimates `‖R⁻¹‖₁` or `‖R⁻¹‖_∞` in O(n²) operations without forming the
/// inverse.
pub fn inv_norm_estimate(r: &UpperTriangular, which: NormKind) -> f64 {
    // ‖R⁻¹‖_∞ = ‖R⁻ᵀ‖₁, so the infinity norm swaps the two solves.
    let (forward, adjoint) = match which {
        NormKind::One => (Triangular::Plain, Triangular::Transposed),
        NormKind::Infinity => (Triangular::Transposed, Triangular::Plain),
    };
    let apply = |v: &mut [f64]| r.solve_in_place(v, forward);
    let apply_t = |v: &mut [f64]| r.solve_in_place(v, adjoint);
    one_norm_estimate(r.dim(), apply, apply_t)
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Lower bound on `‖B‖₁` using only products with B and Bᵀ.
fn one_norm_estimate(n: usize, apply: impl Fn(&mut [f64]), apply_t: impl Fn(&mut [f64])) -> f64 {
    let mut x = vec![1.0 / n as f64; n];
    apply(&mut x);
    if n == 1 {
        return x[0].abs();
    }
    let mut est = norm1(&x);
    let mut signs: Vec<f64> = x.iter().map(|&v| sign(v)).collect();
    let mut z = signs.clone();
    apply_t(&mut z);
    let mut j = argmax_abs(&z);
    let mut iter = 2;

    loop {
        x.iter_mut().for_each(|v| *v = 0.0);
        x[j] = 1.0;
        apply(&mut x);
        let previous = est;
        est = norm1(&x);

        let new_signs: Vec<f64> = x.iter().map(|&v| sign(v)).collect();
        if new_signs == signs || est <= previous {
            est = est.max(previous);
            break;
        }
        signs = new_signs;
        z.copy_from_slice(&signs);
        apply_t(&mut z);
        let last = j;
        j = argmax_abs(&z);
        if z[last].abs() == z[j].abs() || iter >= MAX_ITERATIONS {
            break;
        }
        iter += 1;
    }

    // Alternating-sign probe catches matrices where the ascent stalls.
    let denom = (n - 1) as f64;
    let mut alt: Vec<f64> = (0..n)
        .map(|i| {
            let mag = 1.0 + i as f64 / denom;
            if i % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .collect();
    apply(&mut alt);
    let probe = 2.0 * norm1(&alt) / (3.0 * n as f64);
    est.max(probe)
}
