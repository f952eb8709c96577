//! One-dimensional maximisation: a uniform grid bracket refined by
//! golden-section search.

use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

pub const DEFAULT_GRID: usize = 1024;
pub const DEFAULT_XTOL: f64 = 1e-12;
const MAX_GOLDEN_STEPS: usize = 400;

/// Maximises `f` over `[lo, hi]`.
///
/// The grid locates the best node; golden-section search then refines inside
/// the two neighbouring cells until the bracket is narrower than `xtol`.
/// Endpoint maxima are returned exactly at the endpoint.
pub fn maximize<F>(f: F, lo: f64, hi: f64, grid: usize, xtol: f64, exec: Execution) -> Result<Maximum>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    if !(lo < hi) || grid < 2 || !(xtol > 0.0) {
        return Err(Error::InvalidParameter(format!("bad maximisation setup [{lo}, {hi}], grid {grid}, xtol {xtol}")));
    }
    let step = (hi - lo) / (grid - 1) as f64;
    let node = |i: usize| if i + 1 == grid { hi } else { lo + i as f64 * step };
    let values = exec.map_range(grid, |i| f(node(i)));
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.is_nan() {
            return Err(Error::NonConvergence(format!("objective is NaN at x = {}", node(i))));
        }
        if *v > values[best] {
            best = i;
        }
    }
    let a = node(best.saturating_sub(1));
    let b = node((best + 1).min(grid - 1));
    let refined = golden_section(&f, a, b, xtol)?;
    Ok(if refined.value > values[best] { refined } else { Maximum { x: node(best), value: values[best] } })
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, xtol: f64) -> Result<Maximum> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut steps = 0;
    while (b - a).abs() > xtol {
        if steps == MAX_GOLDEN_STEPS {
            return Err(Error::NonConvergence(format!("golden-section search on [{a}, {b}]")));
        }
        steps += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        // stalled bracket: spacing below floating-point resolution
        if c >= d {
            break;
        }
    }
    let candidates = [(a, f(a)), (c, fc), (d, fd), (b, f(b))];
    let (x, value) = candidates.into_iter().fold((a, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    Ok(Maximum { x, value })
}
