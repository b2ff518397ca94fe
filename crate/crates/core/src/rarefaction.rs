//! Planar 1-rarefaction: the inviscid fan, the smoothed Burgers solution
//! obtained by characteristics, and the approximate rarefaction built from it.

use crate::error::{domain, Error, Result};
use crate::gas::{Family, GasModel, PlanarState};
use serde::{Deserialize, Serialize};

const ROOT_TOL: f64 = 1e-12;
const MAX_ROOT_ITERS: usize = 200;

/// End states of a 1-rarefaction together with the Burgers end speeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RarefactionWave {
    pub left_state: PlanarState,
    pub right_state: PlanarState,
    pub w_minus: f64,
    pub w_m: f64,
    pub delta_r: f64,
    /// First Riemann invariant shared by every state of the wave.
    pub sigma1: f64,
    /// `2√γ/(γ-1) + √γ`, so that `ρ^{(γ-1)/2} = (Σ1 - λ1)/A`.
    coeff_a: f64,
    invariant_k: f64,
    half_gm1: f64,
}

/// Burgers value and its first three `x1` derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersSample {
    pub w: f64,
    pub w_x: f64,
    pub w_xx: f64,
    pub w_xxx: f64,
}

/// Approximate rarefaction at one point, with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RarefactionSample {
    pub v: f64,
    pub u1: f64,
    pub v_x: f64,
    pub u1_x: f64,
    pub v_xx: f64,
    pub u1_xx: f64,
    /// `∂_t` of `v` and `u1` (the Burgers relation `w_t = -w w_x`).
    pub v_t: f64,
    pub u1_t: f64,
}

/// Initial Burgers datum `w0(x) = (w_m+w_-)/2 + (w_m-w_-)/2 tanh x` and derivatives.
fn initial_profile(w_minus: f64, w_m: f64, x: f64) -> [f64; 4] {
    let half = 0.5 * (w_m - w_minus);
    let th = x.tanh();
    let ch = x.cosh();
    let s2 = if ch.is_finite() { 1.0 / (ch * ch) } else { 0.0 };
    [
        0.5 * (w_m + w_minus) + half * th,
        half * s2,
        -2.0 * half * s2 * th,
        half * (4.0 * s2 * th * th - 2.0 * s2 * s2),
    ]
}

/// Self-similar fan of the Riemann problem for inviscid Burgers.
pub fn exact_burgers(w_minus: f64, w_m: f64, t: f64, x1: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("the fan needs t > 0, got {t}")));
    }
    if w_minus > w_m {
        return Err(domain("fan requires w_minus <= w_m"));
    }
    let xi = x1 / t;
    Ok(xi.clamp(w_minus, w_m))
}

/// Foot `x0` of the characteristic through `(t, x1)`: `x0 + t w0(x0) = x1`.
///
/// Safeguarded Newton on a bisection bracket; the map is strictly increasing.
pub fn characteristic_foot(w_minus: f64, w_m: f64, t: f64, x1: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(x1);
    }
    let resid = |x0: f64| x0 + t * initial_profile(w_minus, w_m, x0)[0] - x1;
    let mut lo = x1 - t * w_m - 1.0;
    let mut hi = x1 - t * w_minus + 1.0;
    let mut x = x1 - 0.5 * t * (w_m + w_minus);
    let scale = 1.0 + x1.abs() + t * w_m.abs().max(w_minus.abs());
    for _ in 0..MAX_ROOT_ITERS {
        let [w0, dw0, _, _] = initial_profile(w_minus, w_m, x);
        let r = x + t * w0 - x1;
        if r.abs() <= ROOT_TOL || r.abs() <= 4.0 * f64::EPSILON * scale {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - r / (1.0 + t * dw0);
        // Newton only when it stays well inside the bracket; this rules out
        // the two-point cycles of a flat-then-steep map
        let inside = newton > lo && newton < hi && (newton - x).abs() < 0.5 * (hi - lo);
        x = if inside { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    let r = resid(x);
    if r.abs() <= 1e3 * f64::EPSILON * scale {
        Ok(x)
    } else {
        Err(Error::Numerical(format!(
            "characteristic inversion did not converge at (t={t}, x1={x1}); residual {r:e}"
        )))
    }
}

/// Smooth Burgers solution `w^R(t, x1)` and analytic derivatives.
pub fn smooth_burgers(w_minus: f64, w_m: f64, t: f64, x1: f64) -> Result<BurgersSample> {
    if !(t >= 0.0) {
        return Err(domain(format!("smooth Burgers needs t >= 0, got {t}")));
    }
    let x0 = characteristic_foot(w_minus, w_m, t, x1)?;
    let [w, d1, d2, d3] = initial_profile(w_minus, w_m, x0);
    let j = 1.0 + t * d1;
    Ok(BurgersSample {
        w,
        w_x: d1 / j,
        w_xx: d2 / j.powi(3),
        w_xxx: (d3 * j - 3.0 * t * d2 * d2) / j.powi(5),
    })
}

impl RarefactionWave {
    /// Build the wave from its left state `(v_-, u1_-)` and right (middle) state.
    pub fn from_states(g: &GasModel, left: PlanarState, right: PlanarState) -> Result<Self> {
        let s_left = g.riemann_invariant(left.rho(), left.u1, Family::First)?;
        let s_right = g.riemann_invariant(right.rho(), right.u1, Family::First)?;
        if (s_left - s_right).abs() > 1e-10 {
            return Err(domain(format!(
                "states are not on one 1-rarefaction curve (Σ1 mismatch {:e})",
                s_left - s_right
            )));
        }
        let w_minus = g.lambda1(left);
        let w_m = g.lambda1(right);
        if w_minus > w_m {
            return Err(domain("left/right states describe a compression, not a rarefaction"));
        }
        let k = g.invariant_coefficient();
        Ok(Self {
            left_state: left,
            right_state: right,
            w_minus,
            w_m,
            delta_r: (right.v - left.v).abs(),
            sigma1: s_right,
            coeff_a: k + g.gamma.sqrt(),
            invariant_k: k,
            half_gm1: 0.5 * (g.gamma - 1.0),
        })
    }

    /// The 1-rarefaction ending at `middle` with strength `|v_m - v_-| = delta_r`.
    pub fn ending_at(g: &GasModel, middle: PlanarState, delta_r: f64) -> Result<Self> {
        if !(delta_r >= 0.0) || delta_r >= middle.v {
            return Err(domain(format!("rarefaction strength {delta_r} out of range")));
        }
        let v_minus = middle.v - delta_r;
        let u_minus = g.rarefaction_curve(middle.rho(), middle.u1, 1.0 / v_minus)?;
        let left = PlanarState::new(v_minus, u_minus)?;
        Self::from_states(g, left, middle)
    }

    pub fn is_degenerate(&self) -> bool {
        self.w_m == self.w_minus
    }

    /// State with `λ1 = w` on this wave's Σ1 level set, plus the derivative
    /// factors `dv/dw`, `d²v/dw²`, `du/dw`.
    fn state_from_speed(&self, w: f64) -> Result<(f64, f64, f64, f64, f64)> {
        let r = (self.sigma1 - w) / self.coeff_a;
        if !(r > 0.0) {
            return Err(Error::Internal(format!("rarefaction state left positivity (w = {w})")));
        }
        let e = self.half_gm1;
        let a = self.coeff_a;
        let v = r.powf(-1.0 / e);
        let u = self.sigma1 - self.invariant_k * r;
        // r_w = -1/a
        let dv_dw = r.powf(-1.0 / e - 1.0) / (e * a);
        let d2v_dw2 = (1.0 / e + 1.0) * r.powf(-1.0 / e - 2.0) / (e * a * a);
        let du_dw = self.invariant_k / a;
        Ok((v, u, dv_dw, d2v_dw2, du_dw))
    }

    /// Approximate rarefaction `(v^R, u1^R)` at physical time `t` (the Burgers
    /// solution is evaluated at `1 + t`).
    pub fn approx_state(&self, t: f64, x1: f64) -> Result<RarefactionSample> {
        if !(t >= 0.0) {
            return Err(domain(format!("approximate rarefaction needs t >= 0, got {t}")));
        }
        if self.is_degenerate() {
            return Ok(RarefactionSample {
                v: self.right_state.v,
                u1: self.right_state.u1,
                ..Default::default()
            });
        }
        let b = smooth_burgers(self.w_minus, self.w_m, 1.0 + t, x1)?;
        let (v, u1, dv, d2v, du) = self.state_from_speed(b.w)?;
        let w_t = -b.w * b.w_x;
        Ok(RarefactionSample {
            v,
            u1,
            v_x: dv * b.w_x,
            u1_x: du * b.w_x,
            v_xx: d2v * b.w_x * b.w_x + dv * b.w_xx,
            u1_xx: du * b.w_xx,
            v_t: dv * w_t,
            u1_t: du * w_t,
        })
    }

    /// Inviscid fan `(v^r, u1^r)(x1/t)`.
    pub fn exact_state(&self, t: f64, x1: f64) -> Result<(f64, f64)> {
        let w = exact_burgers(self.w_minus, self.w_m, t, x1)?;
        let (v, u, ..) = self.state_from_speed(w)?;
        Ok((v, u))
    }
}

/// Quadrature settings for the derivative envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// Distance kept beyond the characteristic fan on each side.
    pub margin: f64,
    /// Grid spacing of the quadrature.
    pub dx: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { margin: 20.0, dx: 0.01 }
    }
}

/// `L^p` norms of `∂1 v^R`, `∂1 u1^R` and `∂11 v^R` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    pub v_x: f64,
    pub u1_x: f64,
    pub v_xx: f64,
}

/// Exponent of the norm: finite `p ≥ 1` or the sup norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

/// Derivative envelopes of the approximate rarefaction over `x1`.
///
/// The window covers `[λ1-(1+t) - margin, λ1m(1+t) + margin]`; outside it the
/// derivatives are bounded by `C δ_R e^{-2 margin}`, which must be below
/// `1e-12`.
pub fn rarefaction_envelopes(
    wave: &RarefactionWave,
    t: f64,
    exponent: NormExponent,
    opts: EnvelopeOptions,
) -> Result<Envelopes> {
    if let NormExponent::Finite(p) = exponent {
        if !(p >= 1.0) {
            return Err(Error::Usage(format!("norm exponent must be >= 1, got {p}")));
        }
    }
    if wave.is_degenerate() {
        return Ok(Envelopes { v_x: 0.0, u1_x: 0.0, v_xx: 0.0 });
    }
    let tail = wave.delta_r.max(1.0) * (-2.0 * opts.margin).exp();
    if tail > 1e-12 {
        return Err(Error::Config(format!(
            "envelope window margin {} leaves tail bound {tail:e} above 1e-12",
            opts.margin
        )));
    }
    let lo = wave.w_minus * (1.0 + t) - opts.margin;
    let hi = wave.w_m * (1.0 + t) + opts.margin;
    let n = ((hi - lo) / opts.dx).ceil() as usize;
    let h = (hi - lo) / n as f64;
    let mut acc = [0.0f64; 3];
    for i in 0..=n {
        let s = wave.approx_state(t, lo + i as f64 * h)?;
        let vals = [s.v_x.abs(), s.u1_x.abs(), s.v_xx.abs()];
        match exponent {
            NormExponent::Infinity => {
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a = a.max(v);
                }
            }
            NormExponent::Finite(p) => {
                // trapezoid weights
                let wgt = if i == 0 || i == n { 0.5 * h } else { h };
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += wgt * v.powf(p);
                }
            }
        }
    }
    if let NormExponent::Finite(p) = exponent {
        for a in acc.iter_mut() {
            *a = a.powf(1.0 / p);
        }
    }
    Ok(Envelopes { v_x: acc[0], u1_x: acc[1], v_xx: acc[2] })
}

/// `sup_x |w^R(t,x) - w^r(x/t)|` over the characteristic window.
pub fn burgers_fan_gap(w_minus: f64, w_m: f64, t: f64, dx: f64) -> Result<f64> {
    let lo = w_minus * t - 20.0;
    let hi = w_m * t + 20.0;
    let n = ((hi - lo) / dx).ceil() as usize;
    let h = (hi - lo) / n as f64;
    let mut gap = 0.0f64;
    for i in 0..=n {
        let x = lo + i as f64 * h;
        let smooth = smooth_burgers(w_minus, w_m, t, x)?.w;
        gap = gap.max((smooth - exact_burgers(w_minus, w_m, t, x)?).abs());
    }
    // the kinks of the fan are where the gap peaks
    for x in [w_minus * t, w_m * t] {
        let smooth = smooth_burgers(w_minus, w_m, t, x)?.w;
        gap = gap.max((smooth - exact_burgers(w_minus, w_m, t, x)?).abs());
    }
    Ok(gap)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gas() -> GasModel {
        GasModel::new(1.4, 1.0, 0.0).unwrap()
    }

    fn wave() -> RarefactionWave {
        let g = gas();
        RarefactionWave::ending_at(&g, PlanarState::new(1.1, 0.0).unwrap(), 0.05).unwrap()
    }

    /// Pure bisection on the monotone characteristic map, independent of the
    /// Newton path.
    fn bisection_burgers(wm: f64, wp: f64, t: f64, x1: f64) -> f64 {
        let w0 = |x: f64| 0.5 * (wp + wm) + 0.5 * (wp - wm) * x.tanh();
        let (mut lo, mut hi) = (x1 - t * wp - 10.0, x1 - t * wm + 10.0);
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid + t * w0(mid) > x1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        w0(0.5 * (lo + hi))
    }

    #[test]
    fn exact_fan_values() {
        assert_eq!(exact_burgers(-1.0, 1.0, 2.0, 0.0).unwrap(), 0.0);
        assert_eq!(exact_burgers(-1.0, 1.0, 1.0, -5.0).unwrap(), -1.0);
        assert_eq!(exact_burgers(-1.0, 1.0, 1.0, 5.0).unwrap(), 1.0);
        assert_eq!(exact_burgers(0.5, 0.5, 3.0, -2.0).unwrap(), 0.5);
        assert!(exact_burgers(-1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn smooth_burgers_at_time_zero_is_initial_data() {
        for &x in &[-3.0, -0.2, 0.0, 1.7] {
            let s = smooth_burgers(-1.0, 1.0, 0.0, x).unwrap();
            assert_eq!(s.w, 0.0 + 1.0 * f64::tanh(x));
        }
    }

    #[test]
    fn smooth_burgers_matches_bisection_oracle() {
        let s = smooth_burgers(-1.0, 1.0, 10.0, 0.0).unwrap();
        assert!((s.w - bisection_burgers(-1.0, 1.0, 10.0, 0.0)).abs() < 1e-10);
        for &(t, x) in &[(3.0, 2.5), (50.0, -31.0), (1000.0, 700.0), (0.5, -0.3)] {
            let s = smooth_burgers(-0.4, 0.9, t, x).unwrap();
            assert!((s.w - bisection_burgers(-0.4, 0.9, t, x)).abs() < 1e-10);
        }
    }

    #[test]
    fn smooth_burgers_bounds_and_monotonicity() {
        for i in 0..60 {
            let t = 0.1 * 1.2f64.powi(i);
            for j in -20..=20 {
                // fan plus a band where sech^2 is still representable
                let x = j as f64 / 20.0 * (t + 15.0);
                let s = smooth_burgers(-1.0, 1.0, t, x).unwrap();
                assert!(s.w > -1.0 && s.w < 1.0);
                assert!(s.w_x > 0.0);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (t, x, h) = (4.0, 0.7, 1e-4);
        let s = smooth_burgers(-1.0, 1.0, t, x).unwrap();
        let f = |x: f64| smooth_burgers(-1.0, 1.0, t, x).unwrap();
        assert_relative_eq!(s.w_x, (f(x + h).w - f(x - h).w) / (2.0 * h), max_relative = 1e-6);
        assert_relative_eq!(s.w_xx, (f(x + h).w_x - f(x - h).w_x) / (2.0 * h), max_relative = 1e-6);
        assert_relative_eq!(s.w_xxx, (f(x + h).w_xx - f(x - h).w_xx) / (2.0 * h), max_relative = 1e-5);
    }

    #[test]
    fn burgers_residual_is_second_order() {
        // w_t + w w_x by centered differences in t and x
        let resid = |h: f64| {
            let mut worst = 0.0f64;
            let t = 3.0;
            for j in -40..=40 {
                let x = j as f64 * 0.2;
                let f = |t: f64, x: f64| smooth_burgers(-1.0, 1.0, t, x).unwrap().w;
                let wt = (f(t + h, x) - f(t - h, x)) / (2.0 * h);
                let wx = (f(t, x + h) - f(t, x - h)) / (2.0 * h);
                worst = worst.max((wt + f(t, x) * wx).abs());
            }
            worst
        };
        let ratio = resid(0.02) / resid(0.01);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn wave_construction() {
        let g = gas();
        let w = wave();
        assert!(w.w_minus < w.w_m);
        assert_relative_eq!(w.delta_r, 0.05, max_relative = 1e-12);
        let s_l = g.riemann_invariant(w.left_state.rho(), w.left_state.u1, Family::First).unwrap();
        let s_r = g.riemann_invariant(w.right_state.rho(), w.right_state.u1, Family::First).unwrap();
        assert!((s_l - s_r).abs() < 1e-10);
        let bad = PlanarState::new(1.0, 0.3).unwrap();
        assert!(RarefactionWave::from_states(&g, bad, w.right_state).is_err());
        // swapped end states form a compression
        let swapped = RarefactionWave::from_states(&g, w.right_state, w.left_state);
        assert!(swapped.is_err());
    }

    #[test]
    fn approx_state_monotone_and_far_field() {
        let w = wave();
        for &t in &[0.0, 1.0, 30.0, 500.0] {
            let center = 0.5 * (w.w_minus + w.w_m) * (1.0 + t);
            let half = 0.5 * (w.w_m - w.w_minus) * (1.0 + t) + 15.0;
            for j in -50..=50 {
                let s = w.approx_state(t, center + j as f64 / 50.0 * half).unwrap();
                assert!(s.v_x > 0.0 && s.u1_x > 0.0);
            }
        }
        let far = w.approx_state(2.0, -40.0).unwrap();
        assert!((far.v - w.left_state.v).abs() < 1e-12);
        assert!((far.u1 - w.left_state.u1).abs() < 1e-12);
    }

    #[test]
    fn approx_state_matches_newton_oracle() {
        // Newton on {λ1(ρ,u) = w, Σ1(ρ,u) = Σ1} in (ρ, u)
        let g = gas();
        let w = wave();
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let t = 100.0 * next();
            let x = (next() - 0.5) * 2.0 * (10.0 + t);
            let target = smooth_burgers(w.w_minus, w.w_m, 1.0 + t, x).unwrap().w;
            let (mut rho, mut u) = (1.0 / w.right_state.v, w.right_state.u1);
            for _ in 0..50 {
                let c = g.sound_speed(rho).unwrap();
                let f1 = u - c - target;
                let f2 = g.riemann_invariant(rho, u, Family::First).unwrap() - w.sigma1;
                let dc = 0.5 * (g.gamma - 1.0) * c / rho;
                let j = [[-dc, 1.0], [c / rho, 1.0]];
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let dr = (f1 * j[1][1] - f2 * j[0][1]) / det;
                let du = (j[0][0] * f2 - j[1][0] * f1) / det;
                rho -= dr;
                u -= du;
            }
            let s = w.approx_state(t, x).unwrap();
            assert!((s.v - 1.0 / rho).abs() < 1e-10);
            assert!((s.u1 - u).abs() < 1e-10);
        }
    }

    #[test]
    fn approx_state_solves_euler_to_second_order() {
        let g = gas();
        let w = wave();
        let resid = |h: f64| {
            let mut worst = 0.0f64;
            let t = 5.0;
            for j in -30..=30 {
                let x = j as f64 * 0.3 - 6.0;
                let f = |t: f64, x: f64| {
                    let s = w.approx_state(t, x).unwrap();
                    let rho = 1.0 / s.v;
                    [rho, rho * s.u1, rho * s.u1 * s.u1 + g.p(s.v)]
                };
                let (tp, tm, xp, xm) = (f(t + h, x), f(t - h, x), f(t, x + h), f(t, x - h));
                let r1 = (tp[0] - tm[0] + xp[1] - xm[1]) / (2.0 * h);
                let r2 = (tp[1] - tm[1] + xp[2] - xm[2]) / (2.0 * h);
                worst = worst.max(r1.abs()).max(r2.abs());
            }
            worst
        };
        let ratio = resid(0.04) / resid(0.02);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn envelopes_basic() {
        let w = wave();
        let l1 = rarefaction_envelopes(&w, 0.0, NormExponent::Finite(1.0), EnvelopeOptions::default()).unwrap();
        assert!((l1.v_x - w.delta_r).abs() <= 0.01 * w.delta_r);
        let g = gas();
        let flat = RarefactionWave::ending_at(&g, PlanarState::new(1.1, 0.0).unwrap(), 0.0).unwrap();
        let z = rarefaction_envelopes(&flat, 3.0, NormExponent::Infinity, EnvelopeOptions::default()).unwrap();
        assert_eq!((z.v_x, z.u1_x, z.v_xx), (0.0, 0.0, 0.0));
        let tight = EnvelopeOptions { margin: 2.0, dx: 0.01 };
        assert!(matches!(
            rarefaction_envelopes(&w, 0.0, NormExponent::Infinity, tight),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fan_gap_shrinks() {
        let w = wave();
        let early = burgers_fan_gap(w.w_minus, w.w_m, 10.0, 0.05).unwrap();
        let late = burgers_fan_gap(w.w_minus, w.w_m, 1000.0, 0.05).unwrap();
        assert!(late < early);
    }
}
