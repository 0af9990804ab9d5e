//! Steepest ascent over POVMs.
//!
//! One round takes the gradient operators `R_k` of the current POVM, forms
//! `G_k = 1 + α(R_k − Σ_l R_l Π_l)`, conjugates `Π̃_k = G_k† Π_k G_k`, and
//! restores completeness with `S^{-1/2} Π̃_k S^{-1/2}` where `S = Σ_l Π̃_l`.
//! [`optimize`] wraps rounds in a backtracking loop: a round that lowers the
//! objective is discarded and retried with a smaller step.

use std::fmt;
use std::sync::Arc;

use crate::ensemble::{
    joint_probabilities, merge_equivalent, mutual_information, random_positive_operators,
    random_povm, success_rate, Ensemble, JointDistribution, LogBase, Povm, EQUIVALENCE_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt, max_abs, trace_product, CMatrix, HermMatrix};

/// Probabilities are clamped to this floor inside logarithms.
const PROBABILITY_FLOOR: f64 = 1e-12;
/// Consecutive small-ΔI rounds needed before declaring convergence.
const CALM_WINDOW: usize = 5;
/// Consecutive rejected retries before giving up.
const MAX_HALVINGS: usize = 60;
const MIN_ALPHA: f64 = 1e-12;
/// Random members tried per grow step before the increase counts as virtual.
const GROW_ATTEMPTS: u64 = 3;
const RANK_TOL: f64 = 1e-10;
const REAL_TOL: f64 = 1e-12;

/// A user-supplied objective over POVMs.
///
/// `gradients` must return one Hermitian `R_k` per member. The default
/// `value` is `Σ_k tr(R_k Π_k)`, which is exact for objectives linear in the
/// POVM and for the accessible information.
pub trait Objective: Send + Sync {
    fn gradients(&self, e: &Ensemble, m: &Povm, d: &JointDistribution) -> Result<Vec<HermMatrix>>;

    fn value(&self, e: &Ensemble, m: &Povm, d: &JointDistribution) -> Result<f64> {
        let rs = self.gradients(e, m, d)?;
        Ok(linear_value(&rs, m))
    }
}

/// Selects the rule that turns `(ensemble, POVM)` into gradient operators.
#[derive(Clone)]
pub enum GradientFunctional {
    /// Mutual information between state label and outcome (nats).
    AccessibleInformation,
    /// Minimum-error discrimination: `R_k = ρ_k`, value `Σ_j p_jj`.
    Helstrom,
    Custom(Arc<dyn Objective>),
}

impl fmt::Debug for GradientFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradientFunctional::AccessibleInformation => f.write_str("AccessibleInformation"),
            GradientFunctional::Helstrom => f.write_str("Helstrom"),
            GradientFunctional::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl GradientFunctional {
    pub fn name(&self) -> &'static str {
        match self {
            GradientFunctional::AccessibleInformation => "accessible-information",
            GradientFunctional::Helstrom => "helstrom",
            GradientFunctional::Custom(_) => "custom",
        }
    }

    fn gradients(&self, e: &Ensemble, m: &Povm, d: &JointDistribution) -> Result<Vec<HermMatrix>> {
        match self {
            GradientFunctional::AccessibleInformation => Ok(information_gradients(e, d)),
            GradientFunctional::Helstrom => {
                require_square(e, m)?;
                Ok(e.states().to_vec())
            }
            GradientFunctional::Custom(rule) => {
                let rs = rule.gradients(e, m, d)?;
                if rs.len() != m.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "custom functional returned {} gradient operators for {} members",
                        rs.len(),
                        m.len()
                    )));
                }
                if let Some(bad) = rs.iter().find(|r| r.dim() != m.dim()) {
                    return Err(Error::DimensionMismatch(format!(
                        "gradient operator of dimension {} for a POVM of dimension {}",
                        bad.dim(),
                        m.dim()
                    )));
                }
                Ok(rs)
            }
        }
    }

    /// The objective value being maximized.
    pub fn value(&self, e: &Ensemble, m: &Povm, d: &JointDistribution) -> Result<f64> {
        match self {
            GradientFunctional::AccessibleInformation => Ok(mutual_information(d, LogBase::Nat)),
            GradientFunctional::Helstrom => {
                require_square(e, m)?;
                success_rate(d)
            }
            GradientFunctional::Custom(rule) => rule.value(e, m, d),
        }
    }
}

fn require_square(e: &Ensemble, m: &Povm) -> Result<()> {
    if e.len() != m.len() {
        return Err(Error::ShapeMismatch(format!(
            "helstrom functional needs K = J, got J = {}, K = {}",
            e.len(),
            m.len()
        )));
    }
    Ok(())
}

/// `R_k = Σ_j ρ_j ln(p̂_jk / (p_{j·} p̂_{·k}))` with `p̂ = max(p, 1e-12)`.
/// Members with `p_{·k} ≤ 1e-12` get `R_k = 0`.
fn information_gradients(e: &Ensemble, d: &JointDistribution) -> Vec<HermMatrix> {
    let dim = e.dim();
    (0..d.cols())
        .map(|k| {
            let col = d.col_marginals()[k];
            if col <= PROBABILITY_FLOOR {
                return HermMatrix::zeros(dim);
            }
            let mut r = CMatrix::zeros(dim, dim);
            for (j, rho) in e.states().iter().enumerate() {
                let row = d.row_marginals()[j];
                if row <= 0.0 {
                    continue;
                }
                let ratio = d.get(j, k).max(PROBABILITY_FLOOR) / (row * col);
                r += rho.matrix().scale(ratio.ln());
            }
            HermMatrix::hermitian_part(&r)
        })
        .collect()
}

fn linear_value(rs: &[HermMatrix], m: &Povm) -> f64 {
    rs.iter()
        .zip(m.members())
        .map(|(r, p)| trace_product(r, p).re)
        .sum()
}

/// Gradient operators `R_k` of `f` at `m`.
pub fn gradient_operators(
    e: &Ensemble,
    m: &Povm,
    f: &GradientFunctional,
) -> Result<Vec<HermMatrix>> {
    let d = joint_probabilities(e, m)?;
    f.gradients(e, m, &d)
}

fn check_lengths(rs: &[HermMatrix], m: &Povm) {
    assert_eq!(
        rs.len(),
        m.len(),
        "one gradient operator per POVM member is required"
    );
}

/// `Σ_k R_k Π_k` without symmetrization.
fn raw_lagrange(rs: &[HermMatrix], m: &Povm) -> CMatrix {
    let dim = m.dim();
    rs.iter()
        .zip(m.members())
        .fold(CMatrix::zeros(dim, dim), |acc, (r, p)| {
            acc + r.matrix() * p.matrix()
        })
}

/// The Lagrange operator: Hermitian part of `Σ_k R_k Π_k`. Its trace is the
/// information value at stationary points.
pub fn lagrange_operator(rs: &[HermMatrix], m: &Povm) -> HermMatrix {
    check_lengths(rs, m);
    HermMatrix::hermitian_part(&raw_lagrange(rs, m))
}

/// `max_{k,l} ‖Π_l R_k Π_k − Π_l R_l Π_k‖_max`, zero exactly at stationary
/// POVMs.
pub fn stationarity_residual(m: &Povm, rs: &[HermMatrix]) -> f64 {
    check_lengths(rs, m);
    let members = m.members();
    let mut worst: f64 = 0.0;
    for k in 0..members.len() {
        for l in 0..members.len() {
            if k == l {
                continue;
            }
            let diff = rs[k].sub(&rs[l]);
            let term = members[l].matrix() * diff.matrix() * members[k].matrix();
            worst = worst.max(max_abs(&term));
        }
    }
    worst
}

/// First-order gain `∂I/∂α` at `α = 0`:
/// `Σ_{k,l} tr[(R_k − R_l) Π_k (R_k − R_l) Π_l]`.
pub fn ascent_gain(m: &Povm, rs: &[HermMatrix]) -> f64 {
    check_lengths(rs, m);
    let members = m.members();
    let mut total = 0.0;
    for k in 0..members.len() {
        for l in 0..members.len() {
            if k == l {
                continue;
            }
            let diff = rs[k].sub(&rs[l]);
            let lhs = diff.matrix() * members[k].matrix();
            let rhs = diff.matrix() * members[l].matrix();
            total += trace_product(&lhs, &rhs).re;
        }
    }
    total
}

/// `Π̃_k = G_k† Π_k G_k` with `G_k = 1 + α(R_k − Σ_l R_l Π_l)`.
fn conjugated_members(m: &Povm, rs: &[HermMatrix], alpha: f64) -> Vec<HermMatrix> {
    let dim = m.dim();
    let lagrange = raw_lagrange(rs, m);
    let id = CMatrix::identity(dim, dim);
    m.members()
        .iter()
        .zip(rs)
        .map(|(p, r)| {
            let g = &id + (r.matrix() - &lagrange).scale(alpha);
            p.congruence(&g)
        })
        .collect()
}

fn step(m: &Povm, rs: &[HermMatrix], alpha: f64) -> Result<Povm> {
    let tilde = conjugated_members(m, rs, alpha);
    let s = tilde
        .iter()
        .skip(1)
        .fold(tilde[0].clone(), |acc, t| acc.add(t));
    let x = inv_sqrt(&s).map_err(|e| Error::StepFailed(format!("S^(-1/2) unavailable: {e}")))?;
    let members = tilde.iter().map(|t| t.sandwich(&x)).collect();
    Povm::new(members).map_err(|e| Error::StepFailed(format!("renormalized POVM invalid: {e}")))
}

/// One ascent round at step size `alpha`.
pub fn iterate_round(m: &Povm, e: &Ensemble, f: &GradientFunctional, alpha: f64) -> Result<Povm> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Range(format!(
            "step size {alpha} must be finite and nonnegative"
        )));
    }
    let rs = gradient_operators(e, m, f)?;
    step(m, &rs, alpha)
}

/// Upper bound on the number of POVM members ever needed: `r²`, or
/// `r(r+1)/2` when every state is real in the computational basis.
pub fn davies_bound(e: &Ensemble) -> usize {
    let r = e.total_state().rank(RANK_TOL);
    if e.states().iter().all(|s| s.is_real(REAL_TOL)) {
        r * (r + 1) / 2
    } else {
        r * r
    }
}

/// How the number of members `K` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KStrategy {
    /// Exactly `K` members, no merging.
    Fixed(usize),
    /// `K` members, equivalent members merged after convergence.
    Prune(usize),
    /// Start from the Davies bound and merge after convergence.
    Davies,
    /// Start at `K = J` and add random members while the optimum improves.
    Grow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationConfig {
    /// Initial step size; `None` picks `1 / (1 + max_k ‖R_k‖_max)`.
    pub alpha0: Option<f64>,
    pub alpha_grow: f64,
    pub alpha_shrink: f64,
    /// Relative change `|ΔI| / max(|I|, 1)` counted as stalled.
    pub tol_info: f64,
    /// Stationarity residual required for convergence.
    pub tol_residual: f64,
    pub max_rounds: usize,
    pub k_strategy: KStrategy,
    pub seed: u64,
    /// Independent random starts; the best result wins.
    pub restarts: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            alpha0: None,
            alpha_grow: 1.1,
            alpha_shrink: 0.5,
            tol_info: 1e-12,
            tol_residual: 1e-8,
            max_rounds: 200_000,
            k_strategy: KStrategy::Grow,
            seed: 0,
            restarts: 1,
        }
    }
}

impl IterationConfig {
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Range(msg.to_string()));
        if let Some(a) = self.alpha0 {
            if !(a > 0.0 && a.is_finite()) {
                return bad("alpha0 must be positive");
            }
        }
        if !(self.alpha_grow >= 1.0) {
            return bad("alpha_grow must be at least 1");
        }
        if !(self.alpha_shrink > 0.0 && self.alpha_shrink < 1.0) {
            return bad("alpha_shrink must lie in (0, 1)");
        }
        if !(self.tol_info > 0.0) || !(self.tol_residual > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        match self.k_strategy {
            KStrategy::Fixed(0) | KStrategy::Prune(0) => bad("K must be at least 1"),
            _ => Ok(()),
        }
    }
}

/// One row of the iteration trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub round: usize,
    pub alpha: f64,
    /// Objective value of the attempted POVM.
    pub info: f64,
    /// Stationarity residual of the POVM the round started from.
    pub residual: f64,
    pub k: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub povm: Povm,
    /// Final objective value (nats for accessible information, success rate
    /// for Helstrom).
    pub info_value: f64,
    pub residual: f64,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub rounds_used: usize,
    /// Seed of the run that produced this result.
    pub seed: u64,
}

struct Stage {
    povm: Povm,
    value: f64,
    residual: f64,
    converged: bool,
}

/// Runs ascent rounds from `start` until convergence, stall, or the round
/// budget is spent. Rows are appended to `trace`.
fn ascend(
    e: &Ensemble,
    f: &GradientFunctional,
    cfg: &IterationConfig,
    start: Povm,
    trace: &mut Vec<TraceRow>,
    budget: usize,
) -> Result<Stage> {
    let mut povm = start;
    let mut d = joint_probabilities(e, &povm)?;
    let mut value = f.value(e, &povm, &d)?;
    let mut rs = f.gradients(e, &povm, &d)?;
    let mut residual = stationarity_residual(&povm, &rs);

    let alpha0 = cfg.alpha0.unwrap_or_else(|| {
        let scale = rs.iter().map(|r| max_abs(r)).fold(0.0, f64::max);
        1.0 / (1.0 + scale)
    });
    let alpha_cap = 10.0 * alpha0;
    let mut alpha = alpha0;
    let mut calm = 0usize;
    let mut rejections = 0usize;
    let mut accepted_any = false;
    let mut stalled = false;

    let is_done = |calm: usize, residual: f64| calm >= CALM_WINDOW && residual <= cfg.tol_residual;
    let first_round = trace.last().map_or(0, |r| r.round + 1);

    for i in 0..budget {
        if is_done(calm, residual) {
            break;
        }
        let trial = match step(&povm, &rs, alpha) {
            Ok(next) => {
                let nd = joint_probabilities(e, &next)?;
                let nv = f.value(e, &next, &nd)?;
                Some((next, nd, nv))
            }
            Err(Error::StepFailed(_)) => None,
            Err(err) => return Err(err),
        };
        let row = |info: f64, accepted: bool| TraceRow {
            round: first_round + i,
            alpha,
            info,
            residual,
            k: povm.len(),
            accepted,
        };
        match trial {
            Some((next, nd, nv)) if nv >= value => {
                trace.push(row(nv, true));
                let relative = (nv - value).abs() / nv.abs().max(1.0);
                calm = if relative <= cfg.tol_info {
                    calm + 1
                } else {
                    0
                };
                povm = next;
                d = nd;
                value = nv;
                rs = f.gradients(e, &povm, &d)?;
                residual = stationarity_residual(&povm, &rs);
                alpha = (alpha * cfg.alpha_grow).min(alpha_cap);
                rejections = 0;
                accepted_any = true;
            }
            other => {
                trace.push(row(other.map_or(f64::NAN, |t| t.2), false));
                alpha *= cfg.alpha_shrink;
                rejections += 1;
                if rejections >= MAX_HALVINGS || alpha < MIN_ALPHA {
                    if !accepted_any {
                        return Err(Error::NoProgress { alpha });
                    }
                    // stalled on round-off
                    stalled = true;
                    break;
                }
            }
        }
    }
    Ok(Stage {
        converged: residual <= cfg.tol_residual && (calm >= CALM_WINDOW || stalled),
        povm,
        value,
        residual,
    })
}

/// Merges equivalent members. When that lowers K, the merged POVM is
/// polished by further rounds, since the merge itself may raise the
/// residual slightly.
fn merge_stage(
    e: &Ensemble,
    f: &GradientFunctional,
    cfg: &IterationConfig,
    stage: Stage,
    trace: &mut Vec<TraceRow>,
) -> Result<Stage> {
    let d = joint_probabilities(e, &stage.povm)?;
    let merged = merge_equivalent(&stage.povm, &d, EQUIVALENCE_TOL)?;
    if merged.len() == stage.povm.len() {
        return Ok(stage);
    }
    let md = joint_probabilities(e, &merged)?;
    let rs = f.gradients(e, &merged, &md)?;
    let residual = stationarity_residual(&merged, &rs);
    let plain = Stage {
        value: f.value(e, &merged, &md)?,
        converged: stage.converged && residual <= cfg.tol_residual,
        residual,
        povm: merged.clone(),
    };
    let remaining = cfg.max_rounds.saturating_sub(trace.len());
    if remaining == 0 {
        return Ok(plain);
    }
    match ascend(e, f, cfg, merged, trace, remaining) {
        Ok(polished) => Ok(polished),
        Err(Error::NoProgress { .. }) => Ok(plain),
        Err(err) => Err(err),
    }
}

/// Seeds for derived random draws, decorrelated from the run seed.
fn derived_seed(seed: u64, a: u64, b: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(a.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(b.wrapping_mul(0x94D0_49BB_1331_11EB))
        .rotate_left(17)
}

/// Appends one random member of weight about `1/(K+1)` and renormalizes.
fn with_extra_member(m: &Povm, seed: u64) -> Result<Povm> {
    let dim = m.dim();
    let extra = random_positive_operators(dim, 1, seed).remove(0);
    let weight = dim as f64 / (m.len() as f64 + 1.0);
    let mut members = m.members().to_vec();
    members.push(extra.scale(weight / extra.trace()));
    Povm::from_unnormalized(members)
}

fn optimize_single(
    e: &Ensemble,
    f: &GradientFunctional,
    cfg: &IterationConfig,
    start: Option<Povm>,
    seed: u64,
) -> Result<OptimizationResult> {
    let dim = e.dim();
    let initial = |k: usize| -> Result<Povm> {
        match &start {
            Some(p) => Ok(p.clone()),
            None => random_povm(dim, k, seed),
        }
    };
    let mut trace = Vec::new();
    let stage = match cfg.k_strategy {
        KStrategy::Fixed(k) => ascend(e, f, cfg, initial(k)?, &mut trace, cfg.max_rounds)?,
        KStrategy::Prune(k) => {
            let s = ascend(e, f, cfg, initial(k)?, &mut trace, cfg.max_rounds)?;
            merge_stage(e, f, cfg, s, &mut trace)?
        }
        KStrategy::Davies => {
            let s = ascend(
                e,
                f,
                cfg,
                initial(davies_bound(e))?,
                &mut trace,
                cfg.max_rounds,
            )?;
            merge_stage(e, f, cfg, s, &mut trace)?
        }
        KStrategy::Grow => grow(e, f, cfg, initial(e.len())?, seed, &mut trace)?,
    };
    Ok(OptimizationResult {
        rounds_used: trace.len(),
        povm: stage.povm,
        info_value: stage.value,
        residual: stage.residual,
        converged: stage.converged,
        trace,
        seed,
    })
}

fn grow(
    e: &Ensemble,
    f: &GradientFunctional,
    cfg: &IterationConfig,
    start: Povm,
    seed: u64,
    trace: &mut Vec<TraceRow>,
) -> Result<Stage> {
    let k_cap = davies_bound(e).max(start.len());
    let first = ascend(e, f, cfg, start, trace, cfg.max_rounds)?;
    let mut best = merge_stage(e, f, cfg, first, trace)?;
    'outer: while best.povm.len() < k_cap {
        let k = best.povm.len();
        for attempt in 0..GROW_ATTEMPTS {
            let remaining = cfg.max_rounds.saturating_sub(trace.len());
            if remaining == 0 {
                break 'outer;
            }
            let candidate = with_extra_member(&best.povm, derived_seed(seed, k as u64, attempt))?;
            let stage = ascend(e, f, cfg, candidate, trace, remaining)?;
            let stage = merge_stage(e, f, cfg, stage, trace)?;
            let gain = (stage.value - best.value) / best.value.abs().max(1.0);
            if stage.povm.len() > k && gain > cfg.tol_info {
                best = stage;
                continue 'outer;
            }
        }
        // the increase of K was virtual
        break;
    }
    merge_stage(e, f, cfg, best, trace)
}

/// Maximizes `f` over POVMs for ensemble `e`.
///
/// With `start` given, that POVM is the initial point and `cfg.restarts` is
/// ignored. Otherwise `cfg.restarts` independent seeds (`seed`, `seed + 1`,
/// ...) run concurrently and the best result is returned; ties go to the
/// lowest seed, so the outcome is deterministic.
pub fn optimize(
    e: &Ensemble,
    f: &GradientFunctional,
    cfg: &IterationConfig,
    start: Option<Povm>,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    if let Some(p) = &start {
        if p.dim() != e.dim() {
            return Err(Error::DimensionMismatch(format!(
                "start POVM dimension {} vs ensemble dimension {}",
                p.dim(),
                e.dim()
            )));
        }
    }
    if let GradientFunctional::Helstrom = f {
        let k = match (&start, cfg.k_strategy) {
            (Some(p), _) => p.len(),
            (None, KStrategy::Fixed(k)) | (None, KStrategy::Prune(k)) => k,
            (None, _) => 0,
        };
        if k != e.len() {
            return Err(Error::ShapeMismatch(format!(
                "helstrom functional needs a fixed K = J = {}",
                e.len()
            )));
        }
    }
    if start.is_some() || cfg.restarts == 1 {
        return optimize_single(e, f, cfg, start, cfg.seed);
    }

    let results: Vec<Result<OptimizationResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.restarts as u64)
            .map(|i| {
                let seed = cfg.seed.wrapping_add(i);
                scope.spawn(move || optimize_single(e, f, cfg, None, seed))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("optimizer thread panicked"))
            .collect()
    });

    let mut best: Option<OptimizationResult> = None;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(res) => {
                if best.as_ref().is_none_or(|b| res.info_value > b.info_value) {
                    best = Some(res);
                }
            }
            Err(err) => {
                first_err.get_or_insert(err);
            }
        }
    }
    match (best, first_err) {
        (Some(b), _) => Ok(b),
        (None, Some(err)) => Err(err),
        (None, None) => unreachable!("at least one restart runs"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{random_povm, Povm};
    use crate::linalg::{max_abs_diff, HermMatrix};
    use crate::scenarios::{adhoc_ensemble, analytic_eve_povm, tomographic_sextet};

    fn information(e: &Ensemble, m: &Povm) -> f64 {
        mutual_information(&joint_probabilities(e, m).unwrap(), LogBase::Nat)
    }

    #[test]
    fn helstrom_gradients_are_the_states() {
        let e = adhoc_ensemble();
        let m = random_povm(3, 2, 1).unwrap();
        let rs = gradient_operators(&e, &m, &GradientFunctional::Helstrom).unwrap();
        assert_eq!(rs, e.states().to_vec());
        let trace_lambda = lagrange_operator(&rs, &m).trace();
        let sr = success_rate(&joint_probabilities(&e, &m).unwrap()).unwrap();
        assert!((trace_lambda - sr).abs() < 1e-14);
    }

    #[test]
    fn helstrom_needs_square_shape() {
        let e = adhoc_ensemble();
        let m = random_povm(3, 3, 1).unwrap();
        assert!(matches!(
            gradient_operators(&e, &m, &GradientFunctional::Helstrom),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn ignorant_povm_is_a_fixpoint() {
        let e = adhoc_ensemble();
        let m = Povm::ignorant(3, &[0.5, 0.3, 0.2]).unwrap();
        let rs = gradient_operators(&e, &m, &GradientFunctional::AccessibleInformation).unwrap();
        for r in &rs {
            assert!(max_abs(r) < 1e-14);
        }
        assert!(max_abs(&lagrange_operator(&rs, &m)) < 1e-14);
        assert!(stationarity_residual(&m, &rs) < 1e-14);
        assert!(ascent_gain(&m, &rs).abs() < 1e-14);
    }

    #[test]
    fn zero_step_leaves_povm_unchanged() {
        let e = adhoc_ensemble();
        let m = random_povm(3, 3, 2).unwrap();
        let next = iterate_round(&m, &e, &GradientFunctional::AccessibleInformation, 0.0).unwrap();
        for (a, b) in m.members().iter().zip(next.members()) {
            assert!(max_abs_diff(a, b) < 1e-14);
        }
    }

    #[test]
    fn small_step_increases_information() {
        let e = adhoc_ensemble();
        let f = GradientFunctional::AccessibleInformation;
        for seed in 0..5 {
            let m = random_povm(3, 3, seed).unwrap();
            let next = iterate_round(&m, &e, &f, 1e-3).unwrap();
            assert!(information(&e, &next) > information(&e, &m));
        }
    }

    #[test]
    fn s_deviation_is_second_order() {
        let e = adhoc_ensemble();
        let m = random_povm(3, 3, 4).unwrap();
        let rs = gradient_operators(&e, &m, &GradientFunctional::AccessibleInformation).unwrap();
        let dev = |alpha: f64| {
            let tilde = conjugated_members(&m, &rs, alpha);
            let s = tilde.iter().skip(1).fold(tilde[0].clone(), |a, t| a.add(t));
            let shifted = s.sub(&HermMatrix::identity(3));
            assert!(shifted.min_eigenvalue() > -1e-14);
            max_abs(&shifted)
        };
        let ratio = dev(1e-2) / dev(1e-3);
        assert!((ratio - 100.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn directional_derivative_matches_finite_differences() {
        let e = adhoc_ensemble();
        let f = GradientFunctional::AccessibleInformation;
        let m = random_povm(3, 3, 6).unwrap();
        let rs = gradient_operators(&e, &m, &f).unwrap();
        // direction that keeps the sum fixed: move weight from member 0 to 1
        let delta = m.members()[0].scale(0.3);
        let shifted = |t: f64| {
            let mut members = m.members().to_vec();
            members[0] = members[0].sub(&delta.scale(t));
            members[1] = members[1].add(&delta.scale(t));
            Povm::new(members).unwrap()
        };
        let analytic = trace_product(&rs[1], &delta).re - trace_product(&rs[0], &delta).re;
        for t in [1e-4, 1e-5] {
            let fd = (information(&e, &shifted(t)) - information(&e, &shifted(-t))) / (2.0 * t);
            assert!(
                (fd - analytic).abs() < 1e-6 * (1.0 + analytic.abs()),
                "t={t} fd={fd} analytic={analytic}"
            );
        }
    }

    #[test]
    fn ascent_gain_matches_round_slope() {
        let e = adhoc_ensemble();
        let f = GradientFunctional::AccessibleInformation;
        for seed in 0..5 {
            let m = random_povm(3, 3, 20 + seed).unwrap();
            let rs = gradient_operators(&e, &m, &f).unwrap();
            let gain = ascent_gain(&m, &rs);
            assert!(gain > 0.0);
            let alpha = 1e-5;
            let next = iterate_round(&m, &e, &f, alpha).unwrap();
            let slope = (information(&e, &next) - information(&e, &m)) / alpha;
            assert!(
                (slope - gain).abs() < 0.01 * gain,
                "slope {slope} gain {gain}"
            );
        }
    }

    #[test]
    fn random_povm_is_not_stationary() {
        let e = adhoc_ensemble();
        let f = GradientFunctional::AccessibleInformation;
        for seed in 0..10 {
            let m = random_povm(3, 3, seed).unwrap();
            let rs = gradient_operators(&e, &m, &f).unwrap();
            assert!(stationarity_residual(&m, &rs) > 1e-3);
        }
    }

    #[test]
    fn analytic_eve_povm_is_stationary() {
        let m = analytic_eve_povm();
        let f = GradientFunctional::AccessibleInformation;
        for eps in [0.1, 0.3, 0.5] {
            let e = tomographic_sextet(eps).unwrap();
            let next = iterate_round(&m, &e, &f, 1e-2).unwrap();
            for (a, b) in m.members().iter().zip(next.members()) {
                assert!(max_abs_diff(a, b) < 1e-9);
            }
        }
    }

    #[test]
    fn davies_bounds() {
        assert_eq!(davies_bound(&adhoc_ensemble()), 6);
        // the y-states carry single-qubit σ_y terms, so the sextet is complex
        assert_eq!(davies_bound(&tomographic_sextet(0.3).unwrap()), 16);
        // complex full-rank qubit ensemble
        let mut y = crate::linalg::pauli(crate::linalg::Axis::Y, 0, 1)
            .unwrap()
            .into_matrix();
        y *= num_complex::Complex64::new(0.1, 0.0);
        let plus_y = HermMatrix::hermitian_part(&(CMatrix::identity(2, 2).scale(0.25) + y));
        let e = Ensemble::new(vec![plus_y, HermMatrix::from_diagonal(&[0.4, 0.1])]).unwrap();
        assert_eq!(davies_bound(&e), 4);
    }

    #[test]
    fn config_validation() {
        let mut cfg = IterationConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.alpha_shrink = 1.0;
        assert!(cfg.validate().is_err());
        let cfg = IterationConfig {
            k_strategy: KStrategy::Fixed(0),
            ..IterationConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn helstrom_optimize_rejects_wrong_k() {
        let cfg = IterationConfig {
            k_strategy: KStrategy::Fixed(3),
            ..IterationConfig::default()
        };
        let r = optimize(&adhoc_ensemble(), &GradientFunctional::Helstrom, &cfg, None);
        assert!(matches!(r, Err(Error::ShapeMismatch(_))));
    }

    #[derive(Debug)]
    struct ScaledHelstrom;

    impl Objective for ScaledHelstrom {
        fn gradients(
            &self,
            e: &Ensemble,
            _m: &Povm,
            _d: &JointDistribution,
        ) -> Result<Vec<HermMatrix>> {
            Ok(e.states().iter().map(|r| r.scale(2.0)).collect())
        }
    }

    #[test]
    fn custom_functional_runs() {
        let e = adhoc_ensemble();
        let f = GradientFunctional::Custom(Arc::new(ScaledHelstrom));
        let cfg = IterationConfig {
            k_strategy: KStrategy::Fixed(2),
            seed: 3,
            ..IterationConfig::default()
        };
        let res = optimize(&e, &f, &cfg, None).unwrap();
        assert!(res.converged);
        assert!((res.info_value - 2.0 * 0.840_888_452_4).abs() < 2e-9);
    }

    #[test]
    fn custom_functional_length_is_checked() {
        struct Short;
        impl Objective for Short {
            fn gradients(
                &self,
                e: &Ensemble,
                _: &Povm,
                _: &JointDistribution,
            ) -> Result<Vec<HermMatrix>> {
                Ok(vec![HermMatrix::zeros(e.dim())])
            }
        }
        let e = adhoc_ensemble();
        let m = random_povm(3, 2, 0).unwrap();
        let f = GradientFunctional::Custom(Arc::new(Short));
        assert!(matches!(
            gradient_operators(&e, &m, &f),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
