//! Linear prediction and line spectral pairs.
//!
//! 8th-order LPC via Levinson–Durbin on the frame autocorrelation, converted
//! to LSP frequencies with the Chebyshev root-finding method: the symmetric
//! and antisymmetric polynomials P and Q are deflated by their fixed roots at
//! z = -1 and z = +1, expressed in x = cos(w), and their interleaved roots
//! located by grid scan plus bisection.

pub const LPC_ORDER: usize = 8;

/// Autocorrelation r[0..=order] of a frame.
pub fn autocorrelation(frame: &[f64], order: usize) -> Vec<f64> {
    let n = frame.len();
    let mut r = vec![0.0; order + 1];
    for (lag, item) in r.iter_mut().enumerate() {
        if lag >= n {
            break;
        }
        *item = frame[..n - lag]
            .iter()
            .zip(&frame[lag..])
            .map(|(a, b)| a * b)
            .sum();
    }
    r
}

/// Levinson–Durbin recursion. Returns LPC coefficients `a[1..=order]`
/// (prediction polynomial A(z) = 1 + a1 z^-1 + ...), or `None` when the
/// autocorrelation is degenerate (zero or non-positive-definite).
pub fn levinson(r: &[f64], order: usize) -> Option<Vec<f64>> {
    if r[0] <= 0.0 || !r[0].is_finite() {
        return None;
    }
    let mut a = vec![0.0f64; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for m in 1..=order {
        let mut acc = r[m];
        for i in 1..m {
            acc += a[i] * r[m - i];
        }
        if err <= 0.0 {
            return None;
        }
        let k = -acc / err;
        if !k.is_finite() || k.abs() >= 1.0 + 1e-9 {
            return None;
        }
        let prev = a.clone();
        a[m] = k;
        for i in 1..m {
            a[i] = prev[i] + k * prev[m - i];
        }
        err *= 1.0 - k * k;
    }
    Some(a[1..=order].to_vec())
}

/// Evenly spaced fallback LSPs for degenerate (silent/unstable) frames.
pub fn default_lsp(order: usize) -> Vec<f64> {
    (0..order)
        .map(|i| std::f64::consts::PI * (i + 1) as f64 / (order + 1) as f64)
        .collect()
}

/// Evaluate the Chebyshev series c[0]*T_m(x) + c[1]*T_{m-1}(x) + ...
/// + c[m-1]*T_1(x) + c[m]/2 by Clenshaw recurrence.
fn chebyshev_eval(c: &[f64], x: f64) -> f64 {
    let mut b0 = 0.0f64;
    let mut b1 = 0.0f64;
    for &ck in c[..c.len() - 1].iter() {
        let b2 = b1;
        b1 = b0;
        b0 = 2.0 * x * b1 - b2 + ck;
    }
    x * b0 - b1 + c[c.len() - 1] / 2.0
}

/// Convert LPC coefficients to `order` LSP frequencies in (0, pi), ascending.
/// Falls back to the evenly spaced default if root isolation fails.
pub fn lpc_to_lsp(a: &[f64]) -> Vec<f64> {
    let p = a.len();
    debug_assert!(p % 2 == 0, "even LPC order expected");
    let m = p / 2;

    // Deflated symmetric/antisymmetric coefficient folds (Kabal & Ramachandran).
    let mut f1 = vec![0.0f64; m + 1];
    let mut f2 = vec![0.0f64; m + 1];
    f1[0] = 1.0;
    f2[0] = 1.0;
    for i in 1..=m {
        f1[i] = a[i - 1] + a[p - i] - f1[i - 1];
        f2[i] = a[i - 1] - a[p - i] + f2[i - 1];
    }
    // In x = cos(w) the folded polynomials become Chebyshev series with
    // doubled coefficients (the constant term is halved inside the eval).
    let c1: Vec<f64> = f1.iter().map(|&v| 2.0 * v).collect();
    let c2: Vec<f64> = f2.iter().map(|&v| 2.0 * v).collect();

    let mut roots = Vec::with_capacity(p);
    // P and Q roots interleave; scan each polynomial on a fine grid.
    for (coeffs, _which) in [(&c1, 0u8), (&c2, 1u8)] {
        let grid = 512;
        let mut found = Vec::with_capacity(m);
        let mut x_prev = 1.0f64;
        let mut y_prev = chebyshev_eval(coeffs, x_prev);
        for g in 1..=grid {
            let x = 1.0 - 2.0 * g as f64 / grid as f64;
            let y = chebyshev_eval(coeffs, x);
            if y == 0.0 {
                found.push(x);
            } else if y_prev * y < 0.0 {
                // Bisect the bracket.
                let (mut lo, mut hi) = (x, x_prev);
                let (mut ylo, _yhi) = (y, y_prev);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let ymid = chebyshev_eval(coeffs, mid);
                    if ymid == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if ylo * ymid < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        ylo = ymid;
                    }
                }
                found.push(0.5 * (lo + hi));
            }
            x_prev = x;
            y_prev = y;
            if found.len() == m {
                break;
            }
        }
        if found.len() != m {
            return default_lsp(p);
        }
        roots.extend(found.into_iter().map(|x| x.clamp(-1.0, 1.0).acos()));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// LSP frequencies for one frame: autocorrelation, Levinson, conversion, with
/// the evenly spaced fallback on degenerate input. A multiplicative ridge on
/// r[0] keeps the recursion stable without breaking amplitude-scale
/// invariance.
pub fn frame_lsp(frame: &[f64]) -> Vec<f64> {
    let mut r = autocorrelation(frame, LPC_ORDER);
    r[0] *= 1.0 + 1e-9;
    match levinson(&r, LPC_ORDER) {
        Some(a) => lpc_to_lsp(&a),
        None => default_lsp(LPC_ORDER),
    }
}
