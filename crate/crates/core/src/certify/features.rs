use rayon::prelude::*;

use crate::{Error, Result, Window};

/// Vertex of the parabola through three equally spaced samples.
pub fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let h = x[1] - x[0];
    let denom = y[0] - 2.0 * y[1] + y[2];
    if denom <= 0.0 {
        return x[1];
    }
    x[1] + 0.5 * h * (y[0] - y[2]) / denom
}

fn interior_minima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1)).filter(|&i| y[i] < y[i - 1] && y[i] <= y[i + 1]).collect()
}

/// Position of the single interior local minimum of `reflectance`, refined
/// by a parabola through the three samples around it.
pub fn find_omega_min(omega: &[f64], reflectance: &[f64]) -> Result<f64> {
    if omega.len() != reflectance.len() || omega.len() < 3 {
        return Err(Error::InvalidInput("need at least three matching samples".into()));
    }
    let minima = interior_minima(reflectance);
    if minima.len() != 1 {
        return Err(Error::Ambiguity {
            what: "reflectance minimum".into(),
            candidates: minima.iter().map(|&i| omega[i]).collect(),
        });
    }
    let i = minima[0];
    Ok(parabolic_vertex([omega[i - 1], omega[i], omega[i + 1]], [reflectance[i - 1], reflectance[i], reflectance[i + 1]]))
}

/// Samples `f` on `grid` points of `window`, requires exactly one interior
/// minimum, and refines it on successively ten-times denser local grids.
pub fn locate_minimum<F>(f: F, window: Window, grid: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let xs = window.grid(grid);
    let ys = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut x = find_omega_min(&xs, &ys)?;
    let mut h = window.width() / (grid - 1) as f64;
    while h > 1e-9 * window.width() {
        let local = Window::new(x - 2.0 * h, x + 2.0 * h)?;
        let xs = local.grid(41);
        let ys = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        let i = (1..40).min_by(|&a, &b| ys[a].total_cmp(&ys[b])).unwrap();
        x = parabolic_vertex([xs[i - 1], xs[i], xs[i + 1]], [ys[i - 1], ys[i], ys[i + 1]]);
        h /= 10.0;
    }
    Ok(x)
}

/// The single sign change of `delta` in `window`, bracketed on `grid`
/// samples, bisected to `1e-3` of the window and polished by a safeguarded
/// secant iteration to `1e-10` of the window.
pub fn find_zero_of_delta<F>(delta: F, window: Window, grid: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let xs = window.grid(grid);
    let ys = xs.par_iter().map(|&x| delta(x)).collect::<Result<Vec<_>>>()?;
    let mut brackets = Vec::new();
    for i in 1..xs.len() {
        if ys[i - 1] == 0.0 {
            brackets.push((xs[i - 1], xs[i - 1]));
        } else if ys[i - 1] * ys[i] < 0.0 {
            brackets.push((xs[i - 1], xs[i]));
        }
    }
    if brackets.len() != 1 {
        return Err(Error::Ambiguity {
            what: "zero of the level shift".into(),
            candidates: brackets.iter().map(|b| 0.5 * (b.0 + b.1)).collect(),
        });
    }
    let (mut a, mut b) = brackets[0];
    if a == b {
        return Ok(a);
    }
    let (mut fa, mut fb) = (delta(a)?, delta(b)?);
    let w = window.width();
    while b - a > 1e-3 * w {
        let m = 0.5 * (a + b);
        let fm = delta(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    for _ in 0..200 {
        let mut x = b - fb * (b - a) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = delta(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        if b - a <= 1e-10 * w {
            break;
        }
        // Secant steps can stall on one side; a midpoint keeps the bracket shrinking.
        let m = 0.5 * (a + b);
        let fm = delta(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
        if b - a <= 1e-10 * w {
            break;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}
