//! Equilibrium of a strip section under a prescribed driving load.
//!
//! The axial stretch field is `l(y) = 1 + e0 + k (y - y_ref)`. Resultants use
//! the reported uniaxial stress times the reference strip area.

use super::section::Section;

pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub kappa: f64,
    pub eps0: f64,
    /// Residual divided by the driving term.
    pub relative_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Resultants {
    pub n: f64,
    pub m: f64,
    pub n_e: f64,
    /// Equal to `dM/de0`.
    pub n_k: f64,
    pub m_k: f64,
}

impl Section {
    /// Smallest stretch over the strip centres.
    fn min_stretch(&self, eps0: f64, kappa: f64) -> f64 {
        let lo = 1.0 + eps0 + kappa * (self.ys[0] - self.y_ref);
        let hi = 1.0 + eps0 + kappa * (self.ys[self.ys.len() - 1] - self.y_ref);
        lo.min(hi)
    }

    pub(crate) fn resultants(&self, eps0: f64, kappa: f64) -> Resultants {
        let mut r = Resultants::default();
        for c in &self.components {
            for (&y, &w) in self.ys.iter().zip(&c.widths) {
                if w == 0.0 {
                    continue;
                }
                let arm = y - self.y_ref;
                let l = 1.0 + eps0 + kappa * arm;
                let s = c.model.stress_unchecked(l);
                let t = c.model.tangent_unchecked(l);
                let a = w * self.dy;
                r.n += s * a;
                r.m += s * arm * a;
                r.n_e += t * a;
                r.n_k += t * arm * a;
                r.m_k += t * arm * arm * a;
            }
        }
        r
    }

    /// Bending moment about `y_ref` with `e0 = 0`, and its derivative.
    pub fn moment(&self, kappa: f64) -> (f64, f64) {
        let r = self.resultants(0.0, kappa);
        (r.m, r.m_k)
    }

    /// Largest curvature magnitude that keeps every strip in tension or
    /// finite compression, for `e0 = 0`.
    pub fn kappa_limit(&self, sign: f64) -> f64 {
        let arm = if sign > 0.0 { self.y_ref - self.ys[0] } else { self.ys[self.ys.len() - 1] - self.y_ref };
        if arm <= 0.0 {
            f64::INFINITY
        } else {
            (1.0 - 1e-6) / arm
        }
    }
}

/// Safeguarded Newton on a monotone increasing function bracketed by
/// `[lo, hi]` with `f(lo) < 0 < f(hi)`.
fn safeguarded_newton(
    mut f: impl FnMut(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    start: f64,
    tol: f64,
) -> Result<(f64, f64, usize), String> {
    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    for it in 1..=MAX_ITERATIONS {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(format!("non-finite residual at {x}"));
        }
        if fx.abs() <= tol {
            return Ok((x, fx, it));
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        x = if dfx > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            let (fx, _) = f(x);
            return if fx.abs() <= tol {
                Ok((x, fx, it))
            } else {
                Err(format!("bracket collapsed with residual {fx:e}"))
            };
        }
    }
    Err(format!("no convergence in {MAX_ITERATIONS} iterations"))
}

/// Moment balance `M(k) = m_drive` for a layered section.
pub fn solve_layered(section: &Section, m_drive: f64) -> Result<Equilibrium, String> {
    if m_drive == 0.0 {
        return Ok(Equilibrium { kappa: 0.0, eps0: 0.0, relative_residual: 0.0, iterations: 0 });
    }
    let sign = m_drive.signum();
    let limit = section.kappa_limit(sign).min(10.0);
    let hi = sign * limit;
    let (m_hi, _) = section.moment(hi);
    if !(m_hi * sign > m_drive.abs()) {
        return Err(format!("moment capacity {m_hi:.6e} below the driving moment {m_drive:.6e}"));
    }
    let tol = RELATIVE_TOLERANCE * m_drive.abs();
    let (_, stiff0) = section.moment(0.0);
    let start = m_drive / stiff0;
    // work on the positive branch
    let g = |k: f64| {
        let (m, mk) = section.moment(sign * k);
        (sign * m - m_drive.abs(), mk)
    };
    let (k, res, it) = safeguarded_newton(g, 0.0, limit, start * sign, tol)?;
    Ok(Equilibrium { kappa: sign * k, eps0: 0.0, relative_residual: res.abs() / m_drive.abs(), iterations: it })
}

/// Axial strain that balances `force` at fixed curvature.
fn balance_force(section: &Section, kappa: f64, force: f64) -> Result<(f64, Resultants), String> {
    let stretch_at_zero = section.min_stretch(0.0, kappa);
    let lo = -stretch_at_zero + 1e-9;
    let mut hi = 1.0f64.max(lo + 1.0);
    let mut grow = 0;
    while section.resultants(hi, kappa).n < force {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err("axial force cannot be balanced".into());
        }
    }
    let scale = force.abs().max(section.resultants(hi, kappa).n.abs()).max(1e-300);
    let tol = 1e-13 * scale;
    let (e, _, _) = safeguarded_newton(
        |e| {
            let r = section.resultants(e, kappa);
            (r.n - force, r.n_e)
        },
        lo,
        hi,
        0.0,
        tol,
    )?;
    Ok((e, section.resultants(e, kappa)))
}

/// Force and moment balance for a section without an inextensible layer:
/// the driving force acts at `y_ref`, so the moment about it must vanish.
pub fn solve_free(section: &Section, force: f64) -> Result<Equilibrium, String> {
    if force == 0.0 {
        return Ok(Equilibrium { kappa: 0.0, eps0: 0.0, relative_residual: 0.0, iterations: 0 });
    }
    let depth = section.y_max - section.y_min;
    let tol = RELATIVE_TOLERANCE * force.abs() * depth;
    let g = |k: f64| -> (f64, f64) {
        match balance_force(section, k, force) {
            Ok((_, r)) => (r.m, r.m_k - r.n_k * r.n_k / r.n_e),
            Err(_) => (f64::NAN, f64::NAN),
        }
    };
    let (g0, _) = g(0.0);
    if !g0.is_finite() {
        return Err("axial force cannot be balanced in the straight pose".into());
    }
    if g0.abs() <= tol {
        let (e, _) = balance_force(section, 0.0, force)?;
        return Ok(Equilibrium {
            kappa: 0.0,
            eps0: e,
            relative_residual: g0.abs() / (force.abs() * depth),
            iterations: 1,
        });
    }
    // the root lies on the side opposite to the sign of g(0)
    let dir = -g0.signum();
    let mut far = 1e-3 / depth;
    let mut found = false;
    for _ in 0..40 {
        let (gf, _) = g(dir * far);
        if gf.is_finite() && gf * dir > 0.0 {
            found = true;
            break;
        }
        far *= 2.0;
    }
    if !found {
        return Err("no curvature bracket for the force balance".into());
    }
    let h = |k: f64| {
        let (v, d) = g(dir * k);
        (dir * v, d)
    };
    let (k, res, it) = safeguarded_newton(h, 0.0, far, 0.5 * far, tol)?;
    let (e, _) = balance_force(section, dir * k, force)?;
    Ok(Equilibrium { kappa: dir * k, eps0: e, relative_residual: res.abs() / (force.abs() * depth), iterations: it })
}
