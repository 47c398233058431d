use crate::error::{DriftError, Result};

const MAX_SUBDIVISIONS: usize = 1_000_000;
const MAX_DEPTH: u32 = 60;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel_tol`, with Richardson correction on accepted panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, rel_tol).map(|v| -v);
    }
    // A coarse pass sets the absolute scale for the relative tolerance.
    let coarse: f64 = (0..16)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / 16.0;
            let hi = a + (b - a) * (i + 1) as f64 / 16.0;
            let m = 0.5 * (lo + hi);
            simpson(lo, hi, f(lo), f(m), f(hi))
        })
        .sum();
    if !coarse.is_finite() {
        return Err(DriftError::Domain("integrand is not finite on the interval".into()));
    }
    let abs_tol = rel_tol * coarse.abs().max(f64::MIN_POSITIVE);

    let (fa, fb, m) = (f(a), f(b), 0.5 * (a + b));
    let fm = f(m);
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(a, b, fa, fm, fb),
        tol: abs_tol,
        depth: 0,
    }];
    let mut total = 0.0;
    let mut compensation = 0.0;
    let mut subdivisions = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * p.tol || p.depth >= MAX_DEPTH {
            // Kahan summation keeps many small panels from drifting.
            let y = left + right + delta / 15.0 - compensation;
            let t = total + y;
            compensation = (t - total) - y;
            total = t;
            continue;
        }
        subdivisions += 1;
        if subdivisions > MAX_SUBDIVISIONS {
            return Err(DriftError::Convergence { residual: delta.abs() });
        }
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: p.tol / 2.0,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: p.tol / 2.0,
            depth: p.depth + 1,
        });
    }
    if !total.is_finite() {
        return Err(DriftError::Domain("integral diverges".into()));
    }
    Ok(total)
}
