//! Monte-Carlo simulator of context shift plus quasi-absorbing stylistic
//! states, with the closed-form expectation alongside.
//!
//! Two states, unstructured (U) and structured (S). An episode starts in S
//! with probability `context_shift`. Each step emits the feature with
//! probability `trigger_rate_formal` in S and `trigger_rate_mixture` in U.
//! The next state is S with probability `absorption` when the current state
//! is S or an emission fired in U; otherwise it is U.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parallel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechError {
    #[error("{0} must lie in [0, 1], got {1}")]
    Probability(&'static str, f64),
    #[error("{0} must be at least 1")]
    Count(&'static str),
    #[error("empty grid")]
    EmptyGrid,
    #[error("grid must be sorted ascending")]
    UnsortedGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismParams {
    pub context_shift: f64,
    pub trigger_rate_formal: f64,
    pub trigger_rate_mixture: f64,
    pub absorption: f64,
    pub steps: u64,
    pub episodes: u64,
    pub seed: u64,
}

impl Default for MechanismParams {
    fn default() -> Self {
        MechanismParams {
            context_shift: 0.9,
            trigger_rate_formal: 0.05,
            trigger_rate_mixture: 0.001,
            absorption: 0.95,
            steps: 1024,
            episodes: 10_000,
            seed: 42,
        }
    }
}

impl MechanismParams {
    pub fn exit(&self) -> f64 {
        1.0 - self.absorption
    }

    pub fn validate(&self) -> Result<(), MechError> {
        for (name, v) in [
            ("context_shift", self.context_shift),
            ("trigger_rate_formal", self.trigger_rate_formal),
            ("trigger_rate_mixture", self.trigger_rate_mixture),
            ("absorption", self.absorption),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(MechError::Probability(name, v));
            }
        }
        if self.steps == 0 {
            return Err(MechError::Count("steps"));
        }
        if self.episodes == 0 {
            return Err(MechError::Count("episodes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub mean_emissions: f64,
    /// Sample variance of emissions per episode.
    pub var_emissions: f64,
    /// Emissions per 1000 steps.
    pub simulated_frequency: f64,
    pub baseline_frequency: f64,
    /// `None` when the mixture rate is zero.
    pub amplification: Option<f64>,
    /// Standard error of `amplification`.
    pub mc_stderr: Option<f64>,
}

fn episode(p: &MechanismParams, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(index);
    let mut structured = rng.random::<f64>() < p.context_shift;
    let mut emitted = 0u64;
    for _ in 0..p.steps {
        let u_emit: f64 = rng.random();
        let u_stay: f64 = rng.random();
        let rate = if structured {
            p.trigger_rate_formal
        } else {
            p.trigger_rate_mixture
        };
        let fired = u_emit < rate;
        emitted += fired as u64;
        structured = (structured || fired) && u_stay < p.absorption;
    }
    emitted
}

/// Runs `episodes` independent episodes. Episode `i` draws from ChaCha
/// stream `i` of `seed`, so results do not depend on `workers`.
pub fn simulate(params: &MechanismParams, workers: usize) -> Result<SimOutcome, MechError> {
    params.validate()?;
    let per = parallel::map_indices(params.episodes as usize, workers, |i| episode(params, i as u64));
    let n = params.episodes as f64;
    let sum: u128 = per.iter().map(|&e| e as u128).sum();
    let sum_sq: u128 = per.iter().map(|&e| (e as u128) * (e as u128)).sum();
    let mean = sum as f64 / n;
    let var = if params.episodes > 1 {
        let centered = sum_sq as f64 - (sum as f64) * (sum as f64) / n;
        (centered / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let steps = params.steps as f64;
    let expected_base = steps * params.trigger_rate_mixture;
    let (amplification, mc_stderr) = if expected_base > 0.0 {
        (Some(mean / expected_base), Some((var / n).sqrt() / expected_base))
    } else {
        (None, None)
    };
    Ok(SimOutcome {
        mean_emissions: mean,
        var_emissions: var,
        simulated_frequency: mean / steps * 1000.0,
        baseline_frequency: params.trigger_rate_mixture * 1000.0,
        amplification,
        mc_stderr,
    })
}

/// `(sum_{j<T} r^j, sum_{k<T} sum_{j<k} r^j)` for `r = 1 - x`.
fn geometric_sums(x: f64, t: f64) -> (f64, f64) {
    if x * t <= 0.5 {
        // binomial series: sum_i (-x)^i C(T, i+1) and sum_i (-x)^i C(T, i+2)
        let mut g_term = t;
        let mut h_term = t * (t - 1.0) / 2.0;
        let (mut g, mut h) = (0.0, 0.0);
        for i in 0..200 {
            g += g_term;
            h += h_term;
            let fi = i as f64;
            g_term *= -x * (t - fi - 1.0) / (fi + 2.0);
            h_term *= -x * (t - fi - 2.0) / (fi + 3.0);
            if g_term.abs() <= 1e-18 * g.abs() && h_term.abs() <= 1e-18 * h.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        (g, h)
    } else {
        let g = -(t * (-x).ln_1p()).exp_m1() / x;
        (g, (t - g) / x)
    }
}

/// Expected emissions over expected mixture-only emissions.
///
/// With `s_t` the probability of being structured at step t,
/// `s_1 = c` and `s_{t+1} = r s_t + a m` where `r = a (1 - m)`. Expected
/// emissions are `m T + (f - m) sum s_t`, and
/// `sum s_t / m = (c / m) G(T) + a H(T)` with `G`, `H` the geometric sums of
/// `r`. At `m = 0` the `c = 0` limit is finite and `c > 0` diverges.
pub fn analytic_amplification(p: &MechanismParams) -> f64 {
    let (a, c, f, m) = (p.absorption, p.context_shift, p.trigger_rate_formal, p.trigger_rate_mixture);
    let t = p.steps as f64;
    let x = 1.0 - a * (1.0 - m);
    let (g, h) = geometric_sums(x, t);
    let occupancy_over_m = if m > 0.0 {
        c / m * g + a * h
    } else if c == 0.0 {
        a * h
    } else {
        return f64::INFINITY;
    };
    1.0 + (f - m) * occupancy_over_m / t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Steps,
    Absorption,
    ContextShift,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Steps => "steps",
            Axis::Absorption => "absorption",
            Axis::ContextShift => "context_shift",
        }
    }

    pub fn from_name(s: &str) -> Option<Axis> {
        match s {
            "steps" => Some(Axis::Steps),
            "absorption" => Some(Axis::Absorption),
            "context_shift" => Some(Axis::ContextShift),
            _ => None,
        }
    }

    fn apply(self, base: &MechanismParams, value: f64) -> MechanismParams {
        let mut p = *base;
        match self {
            Axis::Steps => p.steps = value.round() as u64,
            Axis::Absorption => p.absorption = value,
            Axis::ContextShift => p.context_shift = value,
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: SimOutcome,
    pub analytic: f64,
}

/// One outcome per grid point. Every point reuses the base seed, so
/// neighbouring points share their random draws.
pub fn sweep(base: &MechanismParams, axis: Axis, grid: &[f64], workers: usize) -> Result<Vec<SweepRow>, MechError> {
    if grid.is_empty() {
        return Err(MechError::EmptyGrid);
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(MechError::UnsortedGrid);
    }
    grid.iter()
        .map(|&value| {
            let p = axis.apply(base, value);
            Ok(SweepRow {
                value,
                outcome: simulate(&p, workers)?,
                analytic: analytic_amplification(&p),
            })
        })
        .collect()
}

/// R² of the least-squares line through `(x, y)`.
pub fn linear_fit_r2(x: &[f64], y: &[f64]) -> Option<f64> {
    crate::stats::pearson_r(x, y).map(|r| r * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Step-by-step occupancy recursion.
    fn dp_amplification(p: &MechanismParams) -> f64 {
        let (a, f, m) = (p.absorption, p.trigger_rate_formal, p.trigger_rate_mixture);
        let mut s = p.context_shift;
        let mut expected = 0.0;
        for _ in 0..p.steps {
            expected += s * f + (1.0 - s) * m;
            s = a * s + a * m * (1.0 - s);
        }
        expected / (p.steps as f64 * m)
    }

    fn params(c: f64, a: f64, f: f64, m: f64, steps: u64) -> MechanismParams {
        MechanismParams {
            context_shift: c,
            trigger_rate_formal: f,
            trigger_rate_mixture: m,
            absorption: a,
            steps,
            episodes: 2000,
            seed: 7,
        }
    }

    #[test]
    fn closed_form_matches_dp() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let p = params(
                rng.random(),
                rng.random(),
                rng.random(),
                rng.random_range(1e-4..1.0),
                rng.random_range(1..3000),
            );
            let (x, y) = (analytic_amplification(&p), dp_amplification(&p));
            assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0), "{p:?}: {x} vs {y}");
        }
    }

    #[test]
    fn near_one_ratio_is_stable() {
        for a in [1.0, 1.0 - 1e-9, 1.0 - 1e-6, 0.999] {
            let p = params(0.3, a, 0.2, 1e-7, 2000);
            let (x, y) = (analytic_amplification(&p), dp_amplification(&p));
            assert!((x - y).abs() <= 1e-10 * y.abs(), "{a}: {x} vs {y}");
        }
    }

    #[test]
    fn fully_absorbed() {
        let p = params(1.0, 1.0, 0.05, 0.001, 100);
        assert!((analytic_amplification(&p) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mixture_guard() {
        let p = params(0.0, 0.8, 0.3, 0.0, 64);
        let limit = analytic_amplification(&p);
        assert!(limit.is_finite());
        let near = analytic_amplification(&params(0.0, 0.8, 0.3, 1e-12, 64));
        assert!((limit - near).abs() < 1e-9);
        assert_eq!(analytic_amplification(&params(0.5, 0.8, 0.3, 0.0, 64)), f64::INFINITY);
    }

    #[test]
    fn disabled_mechanism_is_baseline() {
        let mut p = params(0.0, 0.0, 0.5, 0.01, 500);
        p.episodes = 4000;
        let out = simulate(&p, 1).unwrap();
        let amp = out.amplification.unwrap();
        assert!((amp - 1.0).abs() <= 3.0 * out.mc_stderr.unwrap(), "{amp}");
        assert_eq!(out.baseline_frequency, 10.0);
    }

    #[test]
    fn equal_rates_give_unit_amplification() {
        for a in [0.0, 0.5, 1.0] {
            let p = params(0.5, a, 0.02, 0.02, 200);
            assert!((analytic_amplification(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_and_worker_independent() {
        let p = params(0.4, 0.9, 0.1, 0.01, 300);
        let one = simulate(&p, 1).unwrap();
        assert_eq!(one, simulate(&p, 1).unwrap());
        assert_eq!(one, simulate(&p, 3).unwrap());
    }

    #[test]
    fn sweep_shapes() {
        let p = params(0.5, 0.9, 0.1, 0.01, 100);
        assert_eq!(sweep(&p, Axis::Absorption, &[0.3], 1).unwrap().len(), 1);
        assert_eq!(sweep(&p, Axis::Absorption, &[], 1), Err(MechError::EmptyGrid));
        assert_eq!(sweep(&p, Axis::Absorption, &[0.5, 0.1], 1), Err(MechError::UnsortedGrid));
        let rows = sweep(&p, Axis::Absorption, &[0.0, 0.25, 0.5, 0.75, 1.0], 1).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].outcome.amplification >= w[0].outcome.amplification);
            assert!(w[1].analytic >= w[0].analytic);
        }
    }

    #[test]
    fn invalid_params() {
        let mut p = MechanismParams::default();
        p.absorption = 1.5;
        assert!(matches!(simulate(&p, 1), Err(MechError::Probability("absorption", _))));
        p.absorption = 0.5;
        p.steps = 0;
        assert_eq!(simulate(&p, 1), Err(MechError::Count("steps")));
    }
}
