//! Empirical checks of the stability inequalities relating rank-function
//! `L^p` distances to bottleneck and 1-Wasserstein distances, and the
//! counterexample showing that no Lipschitz bound exists for `p >= 2`.
//!
//! Left-hand sides are evaluated on a uniform grid (`G = 100`). A check
//! whose grid value exceeds the right-hand side is re-evaluated at
//! `G = 400`, and one still exceeding it is settled by exact integration
//! over the arrangement of birth/death lines before it counts as a
//! violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metrics::{bottleneck, lp_distance, rank_lp_distance_exact, wasserstein};
use crate::persistence::{DiagramPoint, PersistenceDiagram};
use crate::rank::{rank_from_diagram, truncate, GridSpec};

/// Relative slack allowed for quadrature error.
pub const TOLERANCE: f64 = 0.02;
pub const COARSE_RESOLUTION: usize = 100;
pub const FINE_RESOLUTION: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    PreconditionFailed,
}

/// Where a constant comes from: the closed form stated alongside the
/// result, or the last line of its proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantSource {
    Remark,
    Proof,
}

/// How the left-hand side that decided the verdict was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluation {
    Grid(usize),
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// Truncated rank functions against the bottleneck distance.
    Truncated,
    /// Full rank functions against the 1-Wasserstein distance.
    Wasserstein,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub bound: Bound,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub source: ConstantSource,
    pub m: usize,
    pub r: f64,
    pub metric_value: f64,
    pub p: f64,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub verdict: Verdict,
    pub evaluation: Evaluation,
    /// Grid value at `G = 100` exceeded the bound (within or beyond the
    /// tolerance) and a finer evaluation was needed.
    pub escalated: bool,
}

impl StabilityReport {
    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else if self.lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// `m` and `R` (number of points, maximum persistence) of a diagram.
pub fn size_and_spread(d: &PersistenceDiagram, degree: usize) -> (usize, f64) {
    (d.degree(degree).len(), d.max_persistence(degree))
}

/// `m (2R + 2)^{1/p}`.
pub fn truncated_constant(m: usize, r: f64, p: f64) -> f64 {
    m as f64 * (2.0 * r + 2.0).powf(1.0 / p)
}

/// `η = min{δ/2, 1, δ_i/2}` over the persistences `δ_i` of the points.
pub fn eta(d: &PersistenceDiagram, degree: usize, delta: f64) -> f64 {
    d.degree(degree)
        .iter()
        .map(|q| q.persistence() / 2.0)
        .fold((delta / 2.0).min(1.0), f64::min)
}

/// Constant for the 1-Wasserstein bound.
///
/// `p = 1`: `2R + 2` (remark) or `2(R + 2)` (proof).
/// `p = 2`: `2 max{(2(R + 1) m)^{1/2}, 1/√2}` for both sources.
pub fn wasserstein_constant(m: usize, r: f64, p: f64, source: ConstantSource) -> Result<f64> {
    if p == 1.0 {
        Ok(match source {
            ConstantSource::Remark => 2.0 * r + 2.0,
            ConstantSource::Proof => 2.0 * (r + 2.0),
        })
    } else if p == 2.0 {
        Ok(2.0 * (2.0 * (r + 1.0) * m as f64).sqrt().max(std::f64::consts::FRAC_1_SQRT_2))
    } else {
        invalid(format!("the 1-Wasserstein bound is stated for p = 1, 2 only, got {p}"))
    }
}

fn pair_grid(m: &PersistenceDiagram, n: &PersistenceDiagram, resolution: usize) -> Result<GridSpec> {
    let t_min = 0.0_f64.min(m.min_birth()).min(n.min_birth());
    let t_max = m.cap().max(n.cap()).max(t_min + 1.0);
    GridSpec::new(t_min, t_max, resolution)
}

/// `‖β_δ^M − β_δ^N‖_p` on a uniform grid; `delta = 0` means no truncation.
pub fn grid_lhs(
    m: &PersistenceDiagram,
    n: &PersistenceDiagram,
    degree: usize,
    p: f64,
    delta: f64,
    resolution: usize,
) -> Result<f64> {
    let spec = pair_grid(m, n, resolution)?;
    let mut rm = rank_from_diagram(m, degree, spec)?;
    let mut rn = rank_from_diagram(n, degree, spec)?;
    if delta > 0.0 {
        rm = truncate(&rm, delta)?;
        rn = truncate(&rn, delta)?;
    }
    lp_distance(&rm, &rn, p)
}

/// Grid evaluation with escalation: `G = 100`, then `G = 400`, then exact.
fn settle(
    m: &PersistenceDiagram,
    n: &PersistenceDiagram,
    degree: usize,
    p: f64,
    delta: f64,
    rhs: f64,
) -> Result<(f64, Evaluation, bool, Verdict)> {
    let coarse = grid_lhs(m, n, degree, p, delta, COARSE_RESOLUTION)?;
    if coarse <= rhs {
        return Ok((coarse, Evaluation::Grid(COARSE_RESOLUTION), false, Verdict::Holds));
    }
    let fine = grid_lhs(m, n, degree, p, delta, FINE_RESOLUTION)?;
    if fine <= rhs * (1.0 + TOLERANCE) {
        return Ok((fine, Evaluation::Grid(FINE_RESOLUTION), true, Verdict::Holds));
    }
    let exact = rank_lp_distance_exact(m, n, degree, p, delta)?;
    let verdict = if exact <= rhs * (1.0 + 1e-12) {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    Ok((exact, Evaluation::Exact, true, verdict))
}

/// Checks `‖β_δ^M − β_δ^N‖_p <= K_{M,p} d_B^{1/p}` for `d_B < η`.
pub fn check_truncated_bound(
    m: &PersistenceDiagram,
    n: &PersistenceDiagram,
    degree: usize,
    delta: f64,
    p: f64,
) -> Result<StabilityReport> {
    if !(delta > 0.0) {
        return invalid("δ must be positive");
    }
    let (count, r) = size_and_spread(m, degree);
    let eta = eta(m, degree, delta);
    let constant = truncated_constant(count, r, p);
    let (db, _) = bottleneck(m, n, degree)?;
    let rhs = constant * db.powf(1.0 / p);
    let mut report = StabilityReport {
        bound: Bound::Truncated,
        lhs: f64::NAN,
        rhs,
        constant,
        source: ConstantSource::Remark,
        m: count,
        r,
        metric_value: db,
        p,
        delta: Some(delta),
        eta: Some(eta),
        verdict: Verdict::PreconditionFailed,
        evaluation: Evaluation::Grid(COARSE_RESOLUTION),
        escalated: false,
    };
    if db >= eta {
        report.lhs = grid_lhs(m, n, degree, p, delta, COARSE_RESOLUTION)?;
        return Ok(report);
    }
    let (lhs, evaluation, escalated, verdict) = settle(m, n, degree, p, delta, rhs)?;
    report.lhs = lhs;
    report.evaluation = evaluation;
    report.escalated = escalated;
    report.verdict = verdict;
    Ok(report)
}

/// Checks `‖β^M − β^N‖_p <= C_{M,p} W_1^{1/p}` for `W_1 <= 1`, once per
/// constant source.
pub fn check_wasserstein_bound(
    m: &PersistenceDiagram,
    n: &PersistenceDiagram,
    degree: usize,
    p: f64,
) -> Result<Vec<StabilityReport>> {
    let (count, r) = size_and_spread(m, degree);
    let (w1, _) = wasserstein(m, n, degree, 1.0)?;
    let mut out = Vec::with_capacity(2);
    for source in [ConstantSource::Remark, ConstantSource::Proof] {
        let constant = wasserstein_constant(count, r, p, source)?;
        let rhs = constant * w1.powf(1.0 / p);
        let mut report = StabilityReport {
            bound: Bound::Wasserstein,
            lhs: f64::NAN,
            rhs,
            constant,
            source,
            m: count,
            r,
            metric_value: w1,
            p,
            delta: None,
            eta: None,
            verdict: Verdict::PreconditionFailed,
            evaluation: Evaluation::Grid(COARSE_RESOLUTION),
            escalated: false,
        };
        if w1 > 1.0 {
            report.lhs = grid_lhs(m, n, degree, p, 0.0, COARSE_RESOLUTION)?;
        } else {
            let (lhs, evaluation, escalated, verdict) = settle(m, n, degree, p, 0.0, rhs)?;
            report.lhs = lhs;
            report.evaluation = evaluation;
            report.escalated = escalated;
            report.verdict = verdict;
        }
        out.push(report);
    }
    Ok(out)
}

/// One row of the counterexample sweep for the interval `[b, d)` widened to
/// `[b − ε, d + ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub eps: f64,
    pub p: f64,
    /// `2 (d − b) ε + 2 ε²`
    pub omega: f64,
    /// Grid estimate of `‖β^{[b,d)} − β^{[b−ε,d+ε)}‖_1`.
    pub omega_quadrature: f64,
    pub relative_error: f64,
    /// `C(b, d) = 2 (d − b + 1)`
    pub constant: f64,
    /// `C(b, d) ε^p`
    pub bound: f64,
    /// `ω > C ε^p`
    pub exceeds: bool,
    /// `ω / ε^p`
    pub ratio: f64,
}

pub const DEFAULT_SWEEP: [f64; 11] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];

/// Evaluates the widened-interval family for each `ε`, using a `G x G` grid
/// over `[b − ε, d + ε]` for the quadrature column.
pub fn counterexample_sweep(b: f64, d: f64, eps: &[f64], p: f64, resolution: usize) -> Result<Vec<CounterexampleRow>> {
    if !(b < d) {
        return invalid("need b < d");
    }
    if !(p >= 2.0) {
        return invalid("the sweep targets p >= 2");
    }
    let constant = 2.0 * (d - b + 1.0);
    eps.iter()
        .map(|&e| {
            if !(e > 0.0 && e < 1.0) {
                return invalid(format!("ε = {e} must lie in (0, 1)"));
            }
            let omega = 2.0 * (d - b) * e + 2.0 * e * e;
            let inner = PersistenceDiagram::from_pairs(0, &[(b, d)])?;
            let outer = PersistenceDiagram::from_pairs(0, &[(b - e, d + e)])?;
            let spec = GridSpec::new(b - e, d + e, resolution)?;
            let ri = rank_from_diagram(&inner.with_cap(d + e)?, 0, spec)?;
            let ro = rank_from_diagram(&outer, 0, spec)?;
            let quad = lp_distance(&ri, &ro, 1.0)?;
            let bound = constant * e.powf(p);
            Ok(CounterexampleRow {
                eps: e,
                p,
                omega,
                omega_quadrature: quad,
                relative_error: (quad - omega).abs() / omega,
                constant,
                bound,
                exceeds: omega > bound,
                ratio: omega / e.powf(p),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    Bottleneck,
    Wasserstein1,
}

/// Random perturbation within `budget` of the given diagram in every
/// degree: per-point `ℓ∞` shifts of at most `budget` plus new points at
/// `ℓ∞` distance at most `budget` from the diagonal (bottleneck mode), or
/// shifts and new points whose total `ℓ¹` cost is at most `budget`
/// (1-Wasserstein mode). Shifted points stay above the diagonal.
pub fn perturb_diagram(d: &PersistenceDiagram, budget: f64, mode: PerturbMode, seed: u64) -> Result<PersistenceDiagram> {
    if !(budget >= 0.0 && budget.is_finite()) {
        return invalid("budget must be a non-negative real");
    }
    if budget == 0.0 {
        return Ok(d.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(d.degrees());
    for q in 0..d.degrees() {
        let pts = d.degree(q);
        let mut new = Vec::with_capacity(pts.len() + 3);
        let (lo, hi) = span(pts);
        match mode {
            PerturbMode::Bottleneck => {
                for p in pts {
                    new.push(shift_point(&mut rng, p, budget, budget));
                }
                for _ in 0..rng.random_range(0..=2) {
                    let half = budget * rng.random::<f64>();
                    if half > 0.0 {
                        let b = rng.random_range(lo..=hi);
                        new.push(DiagramPoint::new(b, b + 2.0 * half));
                    }
                }
            }
            PerturbMode::Wasserstein1 => {
                let injected = rng.random_range(0..=2usize);
                let mut shares: Vec<f64> = (0..pts.len() + injected).map(|_| rng.random::<f64>()).collect();
                let total: f64 = shares.iter().sum::<f64>() + rng.random::<f64>();
                if total > 0.0 {
                    shares.iter_mut().for_each(|s| *s *= budget / total);
                }
                for (p, &share) in pts.iter().zip(&shares) {
                    // |Δb| + |Δd| <= share
                    let split = rng.random::<f64>();
                    new.push(shift_point(&mut rng, p, share * split, share * (1.0 - split)));
                }
                for &share in &shares[pts.len()..] {
                    // ℓ¹ cost to the diagonal equals the persistence.
                    if share > 0.0 {
                        let b = rng.random_range(lo..=hi);
                        new.push(DiagramPoint::new(b, b + share));
                    }
                }
            }
        }
        out.push(new);
    }
    let cap = out
        .iter()
        .flatten()
        .map(|p| p.death)
        .fold(d.cap(), f64::max);
    PersistenceDiagram::new(out, cap)
}

fn span(pts: &[DiagramPoint]) -> (f64, f64) {
    if pts.is_empty() {
        return (0.0, 1.0);
    }
    let lo = pts.iter().map(|p| p.birth).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.death).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Moves birth and death by at most `rb` and `rd`, shrinking the move until
/// the point stays above the diagonal.
fn shift_point(rng: &mut ChaCha8Rng, p: &DiagramPoint, rb: f64, rd: f64) -> DiagramPoint {
    let db = rb * (2.0 * rng.random::<f64>() - 1.0);
    let dd = rd * (2.0 * rng.random::<f64>() - 1.0);
    let mut scale = 1.0;
    loop {
        let q = DiagramPoint::new(p.birth + scale * db, p.death + scale * dd);
        if q.birth < q.death {
            return q;
        }
        scale *= 0.5;
        if scale < 1e-6 {
            return *p;
        }
    }
}

/// Random diagrams: `m ~ U{1..=max_points}`, births `U[0, birth_max]`,
/// persistences `U(0, persistence_max]`, points below `min_persistence`
/// discarded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramSampler {
    pub max_points: usize,
    pub birth_max: f64,
    pub persistence_max: f64,
    pub min_persistence: f64,
}

impl Default for DiagramSampler {
    fn default() -> Self {
        Self {
            max_points: 20,
            birth_max: 5.0,
            persistence_max: 3.0,
            min_persistence: 0.2,
        }
    }
}

impl DiagramSampler {
    /// A non-empty degree-0 diagram.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> PersistenceDiagram {
        loop {
            let m = rng.random_range(1..=self.max_points);
            let pairs: Vec<(f64, f64)> = (0..m)
                .filter_map(|_| {
                    let b = self.birth_max * rng.random::<f64>();
                    // 1 - U[0, 1) lies in (0, 1].
                    let pers = self.persistence_max * (1.0 - rng.random::<f64>());
                    (pers >= self.min_persistence).then_some((b, b + pers))
                })
                .collect();
            if !pairs.is_empty() {
                return PersistenceDiagram::from_pairs(0, &pairs).expect("sampled points are valid");
            }
        }
    }
}

/// Aggregate of a randomized suite.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub bound: Option<Bound>,
    pub p: f64,
    pub source: Option<ConstantSource>,
    pub checked: usize,
    pub holds: usize,
    pub violations: usize,
    pub escalated: usize,
    pub exact: usize,
    pub precondition_failed: usize,
    pub max_ratio: f64,
}

impl SuiteSummary {
    fn add(&mut self, r: &StabilityReport) {
        self.bound = Some(r.bound);
        self.p = r.p;
        self.source = Some(r.source);
        match r.verdict {
            Verdict::PreconditionFailed => {
                self.precondition_failed += 1;
                return;
            }
            Verdict::Holds => self.holds += 1,
            Verdict::Violated => self.violations += 1,
        }
        self.checked += 1;
        self.escalated += r.escalated as usize;
        self.exact += (r.evaluation == Evaluation::Exact) as usize;
        self.max_ratio = self.max_ratio.max(r.ratio());
    }

    pub fn summarize<'a>(reports: impl IntoIterator<Item = &'a StabilityReport>) -> Self {
        let mut s = Self::default();
        for r in reports {
            s.add(r);
        }
        s
    }
}

fn trial_seed(seed: u64, trial: usize, attempt: usize) -> u64 {
    seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (attempt as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// `trials` admissible truncated-bound checks for one `p`, cycling through
/// `deltas`. Each trial draws `M`, a budget below `η`, and a bottleneck-mode
/// perturbation `N`, retrying until `d_B(M, N) < η`.
pub fn truncated_suite(trials: usize, p: f64, deltas: &[f64], seed: u64) -> Result<Vec<StabilityReport>> {
    if deltas.is_empty() {
        return invalid("need at least one δ");
    }
    let sampler = DiagramSampler::default();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let delta = deltas[t % deltas.len()];
            for attempt in 0.. {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t, attempt));
                let m = sampler.sample(&mut rng);
                let eta = eta(&m, 0, delta);
                let budget = eta * (1.0 - rng.random::<f64>());
                let n = perturb_diagram(&m, budget, PerturbMode::Bottleneck, rng.random())?;
                let report = check_truncated_bound(&m, &n, 0, delta, p)?;
                if report.verdict != Verdict::PreconditionFailed {
                    return Ok(report);
                }
            }
            unreachable!()
        })
        .collect()
}

/// `trials` admissible 1-Wasserstein checks for one `p`; each trial yields
/// the remark-constant and proof-constant reports.
pub fn wasserstein_suite(trials: usize, p: f64, seed: u64) -> Result<Vec<StabilityReport>> {
    let sampler = DiagramSampler::default();
    let nested: Vec<Vec<StabilityReport>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            for attempt in 0.. {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t, attempt));
                let m = sampler.sample(&mut rng);
                let budget = 1.0 - rng.random::<f64>();
                let n = perturb_diagram(&m, budget, PerturbMode::Wasserstein1, rng.random())?;
                let reports = check_wasserstein_bound(&m, &n, 0, p)?;
                if reports[0].verdict != Verdict::PreconditionFailed {
                    return Ok(reports);
                }
            }
            unreachable!()
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}
