//! Bounded one-dimensional minimization used by the chiller and cooling
//! tower models.
//!
//! Both equipment models reduce to a single bounded decision variable after
//! their equality constraints are eliminated analytically, so a dense
//! evaluation grid followed by golden-section refinement around the best
//! cell is enough to capture the global minimum of the low-degree polynomial
//! objectives that arise. Results are deterministic and easy to check
//! against a brute-force grid.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A closed interval `[lo, hi]` for the decision variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ModelError> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(ModelError::invalid_param(format!(
                "bracket must satisfy lo <= hi with finite bounds, got [{lo}, {hi}]"
            )));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Settings for [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Number of multistart grid points over the bracket.
    pub grid_points: usize,
    /// Refinement stopping width, in decision-variable units.
    pub refine_tol: f64,
    /// Iteration cap for the golden-section refinement.
    pub max_refine_iters: usize,
}

impl SolverSettings {
    pub fn new(
        grid_points: usize,
        refine_tol: f64,
        max_refine_iters: usize,
    ) -> Result<Self, ModelError> {
        if grid_points < 3 {
            return Err(ModelError::invalid_param(format!(
                "grid_points must be at least 3, got {grid_points}"
            )));
        }
        if !(refine_tol > 0.0) {
            return Err(ModelError::invalid_param(format!(
                "refine_tol must be positive, got {refine_tol}"
            )));
        }
        Ok(SolverSettings {
            grid_points,
            refine_tol,
            max_refine_iters,
        })
    }
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            grid_points: 257,
            refine_tol: 1e-7,
            max_refine_iters: 100,
        }
    }
}

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9; // 1/phi

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, ModelError> {
    let v = f(x);
    if !v.is_finite() {
        return Err(ModelError::Solver {
            x,
            reason: format!("objective returned non-finite value {v}"),
        });
    }
    Ok(v)
}

/// Minimizes `f` over `bracket`, returning `(x*, f(x*))`.
///
/// Evaluates `f` on a uniform grid, takes the best cell (ties broken toward
/// smaller `x` for reproducibility), then refines inside the neighboring
/// cells with golden-section search until the interval shrinks below
/// `refine_tol`. The returned objective value never exceeds the best grid
/// value. A degenerate bracket (`lo == hi`) returns `lo` directly.
pub fn minimize_scalar<F: Fn(f64) -> f64>(
    f: F,
    bracket: Bracket,
    settings: &SolverSettings,
) -> Result<(f64, f64), ModelError> {
    let Bracket { lo, hi } = bracket;
    if lo == hi {
        let v = eval(&f, lo)?;
        return Ok((lo, v));
    }

    let n = settings.grid_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0usize;
    let mut best_x = lo;
    let mut best_f = eval(&f, lo)?;
    for i in 1..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        let v = eval(&f, x)?;
        if v < best_f {
            best_f = v;
            best_x = x;
            best_i = i;
        }
    }

    // Golden-section refinement inside the cells adjacent to the best point.
    let mut a = if best_i == 0 { lo } else { best_x - step };
    let mut b = if best_i == n - 1 { hi } else { best_x + step };
    a = a.max(lo);
    b = b.min(hi);

    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = eval(&f, x1)?;
    let mut f2 = eval(&f, x2)?;
    let mut iters = 0usize;
    while (b - a) > settings.refine_tol && iters < settings.max_refine_iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = eval(&f, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = eval(&f, x2)?;
        }
        iters += 1;
    }

    let (xr, fr) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if fr < best_f || (fr == best_f && xr < best_x) {
        Ok((xr.clamp(lo, hi), fr))
    } else {
        Ok((best_x, best_f))
    }
}

/// Returns the largest `x` in `bracket` with `g(x) <= target`, assuming `g`
/// is nondecreasing, located by bisection to within `tol`.
///
/// Returns `lo` when even `g(lo) > target` and `hi` when `g(hi) <= target`.
pub fn solve_monotone_threshold<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    bracket: Bracket,
    tol: f64,
) -> f64 {
    let Bracket { lo, hi } = bracket;
    if g(lo) > target {
        return lo;
    }
    if g(hi) <= target {
        return hi;
    }
    // Invariant: g(a) <= target < g(b).
    let mut a = lo;
    let mut b = hi;
    let tol = tol.max(f64::EPSILON * hi.abs().max(lo.abs()).max(1.0));
    while (b - a) > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // interval below floating-point resolution
        }
        if g(mid) <= target {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}
