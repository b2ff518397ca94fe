//! γ-law barotropic thermodynamics.
//!
//! Everything here is written in terms of the specific volume `v = 1/ρ`
//! with pressure `p(v) = v^{-γ}` (pressure constant fixed to one), plus the
//! density-form quantities needed by the characteristic analysis.

use crate::error::{domain, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Adiabatic exponent and viscosity coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub gamma: f64,
    /// Shear viscosity `μ`.
    pub mu: f64,
    /// Second viscosity `λ`.
    pub lambda_v: f64,
}

/// A planar state: specific volume and normal velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub v: f64,
    pub u1: f64,
}

impl PlanarState {
    pub fn new(v: f64, u1: f64) -> Result<Self> {
        if !(v > 0.0) || !v.is_finite() || !u1.is_finite() {
            return Err(domain(format!("planar state needs v > 0, got v = {v}")));
        }
        Ok(Self { v, u1 })
    }

    pub fn rho(&self) -> f64 {
        1.0 / self.v
    }
}

/// Which convex potential a relative quantity is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    /// `p(v) = v^{-γ}`
    Pressure,
    /// `Q(v) = v^{1-γ}/(γ-1)`
    InternalEnergy,
}

/// Characteristic family selector for the Riemann invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    First,
    Second,
}

impl Family {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Family::First),
            2 => Ok(Family::Second),
            _ => Err(Error::Usage(format!("characteristic family must be 1 or 2, got {i}"))),
        }
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {x}")))
    }
}

impl GasModel {
    pub fn new(gamma: f64, mu: f64, lambda_v: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(domain(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(mu > 0.0) {
            return Err(domain(format!("mu must be positive, got {mu}")));
        }
        if !(2.0 * mu + 3.0 * lambda_v >= 0.0) {
            return Err(domain(format!(
                "viscosities violate 2mu + 3lambda >= 0 (mu = {mu}, lambda = {lambda_v})"
            )));
        }
        Ok(Self { gamma, mu, lambda_v })
    }

    /// Longitudinal viscosity `2μ + λ`.
    #[inline]
    pub fn visc(&self) -> f64 {
        2.0 * self.mu + self.lambda_v
    }

    /// `p(v) = v^{-γ}` without argument checks, for hot loops.
    #[inline]
    pub fn p(&self, v: f64) -> f64 {
        v.powf(-self.gamma)
    }

    /// `p'(v) = -γ v^{-γ-1}`, unchecked.
    #[inline]
    pub fn dp(&self, v: f64) -> f64 {
        -self.gamma * v.powf(-self.gamma - 1.0)
    }

    /// `p''(v) = γ(γ+1) v^{-γ-2}`, unchecked.
    #[inline]
    pub fn d2p(&self, v: f64) -> f64 {
        self.gamma * (self.gamma + 1.0) * v.powf(-self.gamma - 2.0)
    }

    /// Internal energy `Q(v) = v^{1-γ}/(γ-1)`, unchecked.
    #[inline]
    pub fn q(&self, v: f64) -> f64 {
        v.powf(1.0 - self.gamma) / (self.gamma - 1.0)
    }

    /// Inverse of the pressure law: the `v` with `p(v) = p`.
    #[inline]
    pub fn volume_at_pressure(&self, p: f64) -> f64 {
        p.powf(-1.0 / self.gamma)
    }

    pub fn pressure(&self, v: f64) -> Result<f64> {
        check_positive("specific volume", v)?;
        Ok(self.p(v))
    }

    pub fn pressure_derivative(&self, v: f64) -> Result<f64> {
        check_positive("specific volume", v)?;
        Ok(self.dp(v))
    }

    /// Density-form pressure slope `dp/dρ = γ ρ^{γ-1}`.
    pub fn pressure_density_derivative(&self, rho: f64) -> Result<f64> {
        check_positive("density", rho)?;
        Ok(self.gamma * rho.powf(self.gamma - 1.0))
    }

    /// `c = sqrt(p'(ρ))`.
    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        Ok(self.pressure_density_derivative(rho)?.sqrt())
    }

    #[inline]
    pub(crate) fn sound_speed_unchecked(&self, rho: f64) -> f64 {
        (self.gamma * rho.powf(self.gamma - 1.0)).sqrt()
    }

    /// `(λ1, λ2) = (u1 - c, u1 + c)`.
    pub fn eigenvalues(&self, rho: f64, u1: f64) -> Result<(f64, f64)> {
        let c = self.sound_speed(rho)?;
        Ok((u1 - c, u1 + c))
    }

    /// `λ1` evaluated at a planar state.
    pub fn lambda1(&self, s: PlanarState) -> f64 {
        s.u1 - self.sound_speed_unchecked(s.rho())
    }

    /// `λ2` evaluated at a planar state.
    pub fn lambda2(&self, s: PlanarState) -> f64 {
        s.u1 + self.sound_speed_unchecked(s.rho())
    }

    /// Coefficient `2√γ/(γ-1)` of the γ-law Riemann invariants.
    #[inline]
    pub fn invariant_coefficient(&self) -> f64 {
        2.0 * self.gamma.sqrt() / (self.gamma - 1.0)
    }

    /// `Σ_i = u1 ± (2√γ/(γ-1)) ρ^{(γ-1)/2}`, plus sign for the first family.
    pub fn riemann_invariant(&self, rho: f64, u1: f64, family: Family) -> Result<f64> {
        check_positive("density", rho)?;
        let k = self.invariant_coefficient() * rho.powf(0.5 * (self.gamma - 1.0));
        Ok(match family {
            Family::First => u1 + k,
            Family::Second => u1 - k,
        })
    }

    /// Velocity on the 1-rarefaction curve through `(rho0, u10)` at density `rho`.
    pub fn rarefaction_curve(&self, rho0: f64, u10: f64, rho: f64) -> Result<f64> {
        check_positive("base density", rho0)?;
        check_positive("density", rho)?;
        let e = 0.5 * (self.gamma - 1.0);
        Ok(u10 - self.invariant_coefficient() * (rho.powf(e) - rho0.powf(e)))
    }

    /// `F(v|w) = F(v) - F(w) - F'(w)(v - w)` for the pressure or the internal energy.
    pub fn relative_quantity(&self, potential: Potential, v: f64, w: f64) -> Result<f64> {
        check_positive("v", v)?;
        check_positive("w", w)?;
        Ok(self.relative_unchecked(potential, v, w))
    }

    #[inline]
    pub fn relative_unchecked(&self, potential: Potential, v: f64, w: f64) -> f64 {
        match potential {
            Potential::Pressure => self.p(v) - self.p(w) - self.dp(w) * (v - w),
            // Q'(w) = -p(w)
            Potential::InternalEnergy => self.q(v) - self.q(w) + self.p(w) * (v - w),
        }
    }
}

/// Fitted or frozen constants for the relative-quantity bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeBoundConstants {
    /// `|v-w|^2 <= C Q(v|w)` on the bounded region.
    pub quadratic_q: f64,
    /// `|v-w|^2 <= C p(v|w)` on the bounded region.
    pub quadratic_p: f64,
    /// Correction constant in `p(v|w) <= ((γ+1)/(2γ p(w)) + Cδ)|p(v)-p(w)|^2`.
    pub pressure_upper: f64,
    /// Correction constant in `Q(v|w) <= (1/(2γ p(w)^{1+1/γ}) + Cδ)|p(v)-p(w)|^2`.
    pub energy_upper: f64,
}

/// Worst margins observed by a relative-bound sweep; all should be non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeBoundMargins {
    pub quadratic_q: f64,
    pub quadratic_p: f64,
    pub pressure_upper: f64,
    pub energy_lower: f64,
    pub energy_upper: f64,
}

impl RelativeBoundMargins {
    pub fn worst(&self) -> f64 {
        [self.quadratic_q, self.quadratic_p, self.pressure_upper, self.energy_lower, self.energy_upper]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Sample pairs used by the relative-bound verifiers.
///
/// Half the samples come from the bounded region `0 < w < 2 v_ref`,
/// `0 < v <= 3 v_ref`; the other half from the near-diagonal region
/// `|p(v)-p(w)| < δ`, `|p(w)-p(v_ref)| < δ`.
#[derive(Debug, Clone)]
pub struct RelativeSamples {
    pub delta: f64,
    pub wide: Vec<(f64, f64)>,
    pub near: Vec<(f64, f64)>,
}

/// Pairs closer than this are left out of [`RelativeSamples::from_pairs`]:
/// the three-term formulas lose every digit there.
pub const RESOLVABLE_GAP: f64 = 1e-6;

impl RelativeSamples {
    /// Pairs `(v, w)` taken from a flow. Every pair with `|v - w|` above
    /// [`RESOLVABLE_GAP`] enters the wide set; those that also satisfy
    /// `|p(v) - p(w)| < δ` enter the near set.
    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(g: &GasModel, delta: f64, pairs: I) -> Self {
        let mut out = Self { delta, wide: Vec::new(), near: Vec::new() };
        for (v, w) in pairs {
            if (v - w).abs() <= RESOLVABLE_GAP {
                continue;
            }
            out.wide.push((v, w));
            if (g.p(v) - g.p(w)).abs() < delta {
                out.near.push((v, w));
            }
        }
        out
    }

    pub fn generate(g: &GasModel, v_ref: f64, delta: f64, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = n / 2;
        let wide = (0..half)
            .map(|_| {
                // keep away from exact zero, where Q(v|w) under/overflows
                let w = rng.gen_range(0.02..1.0) * 2.0 * v_ref;
                let v = rng.gen_range(0.02..1.0) * 3.0 * v_ref;
                (v, w)
            })
            .collect();
        let p_ref = g.p(v_ref);
        let near = (0..n - half)
            .map(|_| {
                let pw = p_ref + rng.gen_range(-1.0..1.0) * delta;
                let pv = pw + rng.gen_range(-1.0..1.0) * delta;
                (g.volume_at_pressure(pv), g.volume_at_pressure(pw))
            })
            .collect();
        Self { delta, wide, near }
    }

    pub fn len(&self) -> usize {
        self.wide.len() + self.near.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest constants for which every sample satisfies the bounds.
    pub fn fit(&self, g: &GasModel) -> RelativeBoundConstants {
        let mut c = RelativeBoundConstants {
            quadratic_q: 0.0,
            quadratic_p: 0.0,
            pressure_upper: 0.0,
            energy_upper: 0.0,
        };
        for &(v, w) in &self.wide {
            let d2 = (v - w).powi(2);
            let qr = g.relative_unchecked(Potential::InternalEnergy, v, w);
            let pr = g.relative_unchecked(Potential::Pressure, v, w);
            if qr > 0.0 {
                c.quadratic_q = c.quadratic_q.max(d2 / qr);
            }
            if pr > 0.0 {
                c.quadratic_p = c.quadratic_p.max(d2 / pr);
            }
        }
        for &(v, w) in &self.near {
            let dp2 = (g.p(v) - g.p(w)).powi(2);
            if dp2 == 0.0 {
                continue;
            }
            let (lead_p, lead_q) = leading_coefficients(g, w);
            let pr = g.relative_unchecked(Potential::Pressure, v, w);
            let qr = g.relative_unchecked(Potential::InternalEnergy, v, w);
            c.pressure_upper = c.pressure_upper.max((pr / dp2 - lead_p) / self.delta);
            c.energy_upper = c.energy_upper.max((qr / dp2 - lead_q) / self.delta);
        }
        c
    }

    /// Worst margins (`rhs - lhs`) given frozen constants.
    pub fn margins(&self, g: &GasModel, c: &RelativeBoundConstants) -> RelativeBoundMargins {
        let mut m = RelativeBoundMargins {
            quadratic_q: f64::INFINITY,
            quadratic_p: f64::INFINITY,
            pressure_upper: f64::INFINITY,
            energy_lower: f64::INFINITY,
            energy_upper: f64::INFINITY,
        };
        for &(v, w) in &self.wide {
            let d2 = (v - w).powi(2);
            let qr = g.relative_unchecked(Potential::InternalEnergy, v, w);
            let pr = g.relative_unchecked(Potential::Pressure, v, w);
            m.quadratic_q = m.quadratic_q.min(c.quadratic_q * qr - d2);
            m.quadratic_p = m.quadratic_p.min(c.quadratic_p * pr - d2);
        }
        let gam = g.gamma;
        for &(v, w) in &self.near {
            let dpv = g.p(v) - g.p(w);
            let dp2 = dpv * dpv;
            let pw = g.p(w);
            let (lead_p, lead_q) = leading_coefficients(g, w);
            let pr = g.relative_unchecked(Potential::Pressure, v, w);
            let qr = g.relative_unchecked(Potential::InternalEnergy, v, w);
            m.pressure_upper = m
                .pressure_upper
                .min((lead_p + c.pressure_upper * self.delta) * dp2 - pr);
            m.energy_upper = m
                .energy_upper
                .min((lead_q + c.energy_upper * self.delta) * dp2 - qr);
            let lower = dp2 / (2.0 * gam * pw.powf(1.0 + 1.0 / gam))
                - (1.0 + gam) / (3.0 * gam * gam) * dpv.powi(3) / pw.powf(2.0 + 1.0 / gam);
            m.energy_lower = m.energy_lower.min(qr - lower);
        }
        m
    }
}

/// Leading coefficients `(γ+1)/(2γ p(w))` and `1/(2γ p(w)^{1+1/γ})`.
fn leading_coefficients(g: &GasModel, w: f64) -> (f64, f64) {
    let gam = g.gamma;
    let pw = g.p(w);
    ((gam + 1.0) / (2.0 * gam * pw), 1.0 / (2.0 * gam * pw.powf(1.0 + 1.0 / gam)))
}

/// Inverse-pressure expansion defect
/// `(v-v_-)/(p(v)-p(v_-)) + (v-v_+)/(p(v_+)-p(v)) + ½ p''(v_-)/p'(v_-)^2 (v_- - v_+)`.
///
/// At the endpoints the removable singularity is replaced by its limit `1/p'`.
pub fn inverse_pressure_defect(g: &GasModel, v_minus: f64, v_plus: f64, v: f64) -> f64 {
    let first = if v == v_minus {
        1.0 / g.dp(v_minus)
    } else {
        (v - v_minus) / (g.p(v) - g.p(v_minus))
    };
    let second = if v == v_plus {
        -1.0 / g.dp(v_plus)
    } else {
        (v - v_plus) / (g.p(v_plus) - g.p(v))
    };
    first + second + 0.5 * g.d2p(v_minus) / g.dp(v_minus).powi(2) * (v_minus - v_plus)
}

/// Random `(δ, v)` draws for the inverse-pressure bound: `δ ∈ (0, δ0]`,
/// `v_+` fixed by `p(v_-) - p(v_+) = δ`, and `v ∈ [v_-, v_+]`.
pub fn inverse_pressure_samples(
    g: &GasModel,
    v_minus: f64,
    delta0: f64,
    n: usize,
    seed: u64,
) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pm = g.p(v_minus);
    (0..n)
        .map(|_| {
            let delta = delta0 * rng.gen_range(0.01..=1.0);
            let v_plus = g.volume_at_pressure(pm - delta);
            let v = v_minus + rng.gen_range(0.0..=1.0) * (v_plus - v_minus);
            (delta, v_plus, v)
        })
        .collect()
}

/// Smallest `C` with `|defect| <= C δ^2` over the samples.
pub fn fit_inverse_pressure(g: &GasModel, v_minus: f64, samples: &[(f64, f64, f64)]) -> f64 {
    samples
        .iter()
        .map(|&(delta, v_plus, v)| inverse_pressure_defect(g, v_minus, v_plus, v).abs() / (delta * delta))
        .fold(0.0, f64::max)
}

/// Worst `C δ^2 - |defect|` over the samples.
pub fn inverse_pressure_margin(g: &GasModel, v_minus: f64, samples: &[(f64, f64, f64)], c: f64) -> f64 {
    samples
        .iter()
        .map(|&(delta, v_plus, v)| c * delta * delta - inverse_pressure_defect(g, v_minus, v_plus, v).abs())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn air() -> GasModel {
        GasModel::new(1.4, 1.0, 0.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GasModel::new(1.0, 1.0, 0.0).is_err());
        assert!(GasModel::new(1.4, 0.0, 0.0).is_err());
        assert!(GasModel::new(1.4, 1.0, -1.0).is_err());
        assert!(GasModel::new(1.4, 1.5, -1.0).is_ok());
    }

    #[test]
    fn pressure_values() {
        assert_eq!(air().pressure(1.0).unwrap(), 1.0);
        let g2 = GasModel::new(2.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(g2.pressure(2.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(g2.pressure_derivative(1.0).unwrap(), -2.0, max_relative = 1e-15);
        assert!(air().pressure(0.0).is_err());
        assert!(air().pressure(-1.0).is_err());
        assert!(air().sound_speed(-1.0).is_err());
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let p = air().pressure(1.5f64.powi(k)).unwrap();
            assert!(p > 0.0 && p < last);
            last = p;
        }
    }

    #[test]
    fn chain_rule_between_volume_and_density_forms() {
        let g = air();
        for &v in &[0.3, 0.8, 1.0, 2.5] {
            let rho = 1.0 / v;
            let dp_drho = g.pressure_density_derivative(rho).unwrap();
            let via_volume = g.dp(v) * (-v * v);
            assert_relative_eq!(dp_drho, via_volume, max_relative = 1e-12);
        }
    }

    #[test]
    fn eigenvalues_and_sound_speed() {
        let g = air();
        assert_relative_eq!(g.sound_speed(1.0).unwrap(), 1.4f64.sqrt(), max_relative = 1e-15);
        let (l1, l2) = g.eigenvalues(1.0, 0.0).unwrap();
        assert_relative_eq!(l1, -1.4f64.sqrt());
        assert_relative_eq!(l2, 1.4f64.sqrt());
        let (m1, m2) = g.eigenvalues(1.0, 0.7).unwrap();
        assert_relative_eq!(m1 - l1, 0.7, max_relative = 1e-14);
        assert_relative_eq!(m2 - l2, 0.7, max_relative = 1e-14);
        assert!(g.eigenvalues(0.0, 0.0).is_err());
    }

    #[test]
    fn eigenvalues_match_flux_jacobian() {
        // flux (m, m^2/rho + p) in conservative variables (rho, m)
        let g = air();
        let (rho, u) = (0.9, 0.3);
        let m = rho * u;
        let flux = |r: f64, mm: f64| [mm, mm * mm / r + r.powf(g.gamma)];
        let mut errs = Vec::new();
        for h in [1e-3, 5e-4] {
            let dr = |i: usize| (flux(rho + h, m)[i] - flux(rho - h, m)[i]) / (2.0 * h);
            let dm = |i: usize| (flux(rho, m + h)[i] - flux(rho, m - h)[i]) / (2.0 * h);
            let (a, b, c, d) = (dr(0), dm(0), dr(1), dm(1));
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr / 4.0 - det).sqrt();
            let (l1, l2) = g.eigenvalues(rho, u).unwrap();
            errs.push(((tr / 2.0 - disc) - l1).abs().max(((tr / 2.0 + disc) - l2).abs()));
        }
        assert!(errs[0] < 1e-5);
        assert!(errs[1] <= errs[0] / 3.0 || errs[1] < 1e-10);
    }

    #[test]
    fn riemann_invariants() {
        let g3 = GasModel::new(3.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(
            g3.riemann_invariant(1.0, 0.0, Family::First).unwrap(),
            3f64.sqrt(),
            max_relative = 1e-15
        );
        let g = air();
        let s1 = g.riemann_invariant(0.7, 0.2, Family::First).unwrap();
        let s2 = g.riemann_invariant(0.7, 0.2, Family::Second).unwrap();
        assert_relative_eq!(s1 - s2, 2.0 * g.invariant_coefficient() * 0.7f64.powf(0.2), max_relative = 1e-14);
        assert!(Family::from_index(3).is_err());
    }

    #[test]
    fn rarefaction_curve_keeps_first_invariant() {
        let g = air();
        assert_eq!(g.rarefaction_curve(1.0, 0.3, 1.0).unwrap(), 0.3);
        let base = g.riemann_invariant(1.0, 0.0, Family::First).unwrap();
        for k in 1..50 {
            let rho = 0.5 + 0.02 * k as f64;
            let u = g.rarefaction_curve(1.0, 0.0, rho).unwrap();
            let s = g.riemann_invariant(rho, u, Family::First).unwrap();
            assert!((s - base).abs() < 1e-12);
        }
    }

    #[test]
    fn rarefaction_curve_matches_integral_curve_root_find() {
        // integrate du/drho = -sqrt(p'(rho))/rho with composite Simpson
        let g = air();
        let f = |r: f64| -(g.gamma * r.powf(g.gamma - 1.0)).sqrt() / r;
        let (a, b, n) = (1.0, 0.8, 2000);
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        let oracle = s * h / 3.0;
        let u = g.rarefaction_curve(1.0, 0.0, 0.8).unwrap();
        assert!((u - oracle).abs() < 1e-10, "{u} vs {oracle}");
    }

    #[test]
    fn relative_quantities_nonnegative() {
        let g = air();
        assert_eq!(g.relative_quantity(Potential::Pressure, 1.3, 1.3).unwrap(), 0.0);
        assert!(g.relative_quantity(Potential::InternalEnergy, 0.0, 1.0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let v = rng.gen_range(0.5..3.0);
            let w = rng.gen_range(0.5..3.0);
            assert!(g.relative_quantity(Potential::InternalEnergy, v, w).unwrap() >= -1e-15);
            assert!(g.relative_quantity(Potential::Pressure, v, w).unwrap() >= -1e-15);
        }
    }

    #[test]
    fn relative_bounds_fit_and_reproduce() {
        let g = air();
        let s = RelativeSamples::generate(&g, 1.1, 0.1, 2000, 11);
        let c = s.fit(&g);
        assert!(c.quadratic_q.is_finite() && c.quadratic_q > 0.0);
        let m = s.margins(&g, &c);
        assert!(m.worst() >= -1e-8, "{m:?}");
        let again = RelativeSamples::generate(&g, 1.1, 0.1, 2000, 11).fit(&g);
        assert_eq!(c, again);
    }

    #[test]
    fn inverse_pressure_defect_is_second_order() {
        let g = air();
        let s = inverse_pressure_samples(&g, 1.0, 0.2, 1000, 3);
        let c = fit_inverse_pressure(&g, 1.0, &s);
        assert!(c.is_finite() && c < 100.0, "{c}");
        assert!(inverse_pressure_margin(&g, 1.0, &s, c) >= -1e-12);
    }
}
