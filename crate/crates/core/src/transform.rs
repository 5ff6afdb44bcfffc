//! Propose-test-release gate turning degree-restricted estimators into
//! algorithms that are private on every input stream.
//!
//! The test privately tracks how far the stream is from containing `ℓ` nodes
//! of degree above `D' = D + ℓ`. While it passes, the base (projection onto
//! degree `D'` followed by a restricted estimator) releases values. After the
//! first failing verdict nothing more is released.

use serde::{Deserialize, Serialize};

use crate::boundedness::BoundednessTracker;
use crate::error::{bad, Error, Result};
use crate::noise::NoiseSource;
use crate::projection::{InclusionCriterion, ProjectionState};
use crate::stats::{inc_edge_sens, RestrictedEstimator, StatisticKind, StreamingEstimator};
use crate::stream::{GraphStream, StreamBatch};
use crate::svt::{SparseVector, Verdict};

/// Noise sub-stream label of the test.
pub const TEST_NOISE_LABEL: &str = "test";
/// Noise sub-stream label of the base estimator.
pub const BASE_NOISE_LABEL: &str = "base";

/// Neighbor relation under which the base estimator is private.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseMode {
    /// Degree-restricted edge privacy; sensitivities come from the statistic.
    RestrictedEdge,
    /// Degree-restricted node privacy; the caller supplies the sensitivity.
    RestrictedNode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub eps_test: f64,
    pub beta_test: f64,
    pub beta: f64,
    pub degree_bound: usize,
    pub horizon: usize,
    pub eps_prime: f64,
    pub mode: BaseMode,
    /// Sensitivity override for the base; required in node mode.
    pub base_gamma: Option<f64>,
}

impl TransformConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_test > 0.0) || !self.eps_test.is_finite() {
            return Err(bad(format!("eps_test must be positive, got {}", self.eps_test)));
        }
        if !(self.beta_test > 0.0 && self.beta_test <= 1.0) {
            return Err(bad(format!("beta_test must lie in (0, 1], got {}", self.beta_test)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(bad(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if self.horizon == 0 {
            return Err(bad("horizon must be at least 1"));
        }
        if !(self.eps_prime > 0.0) || !self.eps_prime.is_finite() {
            return Err(bad(format!("eps_prime must be positive, got {}", self.eps_prime)));
        }
        match self.base_gamma {
            Some(g) if !(g >= 0.0) || !g.is_finite() => {
                Err(bad(format!("base sensitivity must be nonnegative, got {g}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub ell: usize,
    pub d_prime: usize,
    pub tau: f64,
}

/// `ℓ = ⌈8·ln(T/(β·β_test))/ε_Test⌉`, `D' = D + ℓ`, `τ = −8·ln(1/β_test)/ε_Test`.
pub fn derive_params(cfg: &TransformConfig) -> Result<DerivedParams> {
    cfg.validate()?;
    let x = 8.0 * (cfg.horizon as f64 / (cfg.beta * cfg.beta_test)).ln() / cfg.eps_test;
    // Absorb rounding noise when x is an integer up to a few ulps.
    let ell = if (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0) {
        x.round()
    } else {
        x.ceil()
    };
    if ell < 1.0 {
        return Err(bad(format!("derived ell = {ell} must be at least 1")));
    }
    let ell = ell as usize;
    let tau = -8.0 * (1.0 / cfg.beta_test).ln() / cfg.eps_test;
    Ok(DerivedParams {
        ell,
        d_prime: cfg.degree_bound + ell,
        tau,
    })
}

/// Group size over which the base's guarantee is stretched.
pub fn group_factor(mode: BaseMode, params: &DerivedParams) -> f64 {
    match mode {
        BaseMode::RestrictedEdge => (params.d_prime + params.ell) as f64,
        BaseMode::RestrictedNode => (2 * params.ell + 1) as f64,
    }
}

/// Node-privacy parameters `(ε, δ)` of the whole transformation.
pub fn privacy_accounting(cfg: &TransformConfig, params: &DerivedParams, delta_prime: f64) -> (f64, f64) {
    let b = group_factor(cfg.mode, params);
    let eps = cfg.eps_test + cfg.eps_prime * b;
    let delta = (1.0 + cfg.eps_test.exp()) * eps.exp() * cfg.beta_test
        + delta_prime * (cfg.eps_prime * b).exp() * b;
    (eps, delta)
}

/// Splits a total `(ε, δ)` budget: `ε_Test = ε/2`, `β_test = δ/30`, pure-DP
/// base, and the largest `ε'` the exact accounting allows.
pub fn suggest_budget_split(
    epsilon: f64,
    delta: f64,
    degree_bound: usize,
    horizon: usize,
    beta: f64,
    mode: BaseMode,
) -> Result<TransformConfig> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(bad(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(bad(format!("delta must lie in (0, 1), got {delta}")));
    }
    if horizon < 2 {
        return Err(bad("horizon must be at least 2"));
    }
    let mut cfg = TransformConfig {
        eps_test: epsilon / 2.0,
        beta_test: delta / 30.0,
        beta,
        degree_bound,
        horizon,
        eps_prime: 1.0,
        mode,
        base_gamma: None,
    };
    let params = derive_params(&cfg)?;
    let b = group_factor(mode, &params);
    cfg.eps_prime = (epsilon - cfg.eps_test) / b;
    // Step below the exact solution until rounding no longer overshoots.
    for _ in 0..64 {
        let (e, d) = privacy_accounting(&cfg, &params, 0.0);
        if d > delta {
            return Err(Error::Infeasible(format!(
                "test failure term alone gives delta {d:e} > {delta:e}"
            )));
        }
        if e <= epsilon {
            return Ok(cfg);
        }
        cfg.eps_prime = cfg.eps_prime * (1.0 - 1e-15) - f64::MIN_POSITIVE;
    }
    Err(Error::Infeasible("could not fit eps_prime under epsilon".into()))
}

/// A private test consuming one batch per step.
pub trait StreamTest {
    fn check(&mut self, batch: &StreamBatch) -> Result<Verdict>;
}

/// Sparse vector over `q_t = −DistToGraph_{D',ℓ}` of the raw stream.
#[derive(Clone, Debug)]
pub struct DistanceTest {
    tracker: BoundednessTracker,
    svt: SparseVector,
    last_query: f64,
}

impl DistanceTest {
    pub fn new(d_prime: usize, ell: usize, eps_test: f64, tau: f64, noise: NoiseSource) -> Result<Self> {
        Ok(DistanceTest {
            tracker: BoundednessTracker::new(d_prime, ell),
            svt: SparseVector::new(eps_test, tau, 1, noise)?,
            last_query: f64::NAN,
        })
    }

    /// Query value of the most recent step.
    pub fn last_query(&self) -> f64 {
        self.last_query
    }
}

impl StreamTest for DistanceTest {
    fn check(&mut self, batch: &StreamBatch) -> Result<Verdict> {
        let dist = self.tracker.apply(batch)?;
        self.last_query = -(dist as f64);
        Ok(self.svt.step(self.last_query))
    }
}

/// Projection onto a degree bound followed by an estimator.
#[derive(Clone, Debug)]
pub struct ProjectedBase<E> {
    projection: ProjectionState,
    estimator: E,
}

impl<E: StreamingEstimator> ProjectedBase<E> {
    pub fn new(bound: usize, estimator: E) -> Self {
        ProjectedBase {
            projection: ProjectionState::new(bound, InclusionCriterion::Original),
            estimator,
        }
    }
}

impl<E: StreamingEstimator> StreamingEstimator for ProjectedBase<E> {
    fn dims(&self) -> usize {
        self.estimator.dims()
    }

    fn step(&mut self, batch: &StreamBatch) -> Result<Vec<f64>> {
        let projected = self.projection.project_step(batch)?;
        self.estimator.step(&projected)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtrOutput {
    pub verdict: Verdict,
    /// Base output, or `None` once the test has failed.
    pub payload: Option<Vec<f64>>,
}

/// The gate: the test sees every batch, the base only while the test passes.
#[derive(Clone, Debug)]
pub struct Ptr<T, B> {
    passed: bool,
    test: T,
    base: B,
}

impl<T: StreamTest, B: StreamingEstimator> Ptr<T, B> {
    pub fn new(test: T, base: B) -> Self {
        Ptr {
            passed: true,
            test,
            base,
        }
    }

    pub fn step(&mut self, batch: &StreamBatch) -> Result<PtrOutput> {
        let verdict = self.test.check(batch)?;
        if verdict == Verdict::Above {
            self.passed = false;
        }
        let payload = if self.passed {
            Some(self.base.step(batch)?)
        } else {
            None
        };
        Ok(PtrOutput { verdict, payload })
    }

    pub fn passed(&self) -> bool {
        self.passed
    }

    pub fn test(&self) -> &T {
        &self.test
    }

    pub fn base(&self) -> &B {
        &self.base
    }
}

pub type TransformPipeline = Ptr<DistanceTest, ProjectedBase<RestrictedEstimator>>;

/// Base estimator of the pipeline, also usable on its own.
pub fn base_estimator(
    cfg: &TransformConfig,
    params: &DerivedParams,
    kind: StatisticKind,
    noise: &NoiseSource,
) -> Result<RestrictedEstimator> {
    let kind = kind.with_bucket_cap(params.d_prime);
    let gamma = match (cfg.base_gamma, cfg.mode) {
        (Some(g), _) => g,
        (None, BaseMode::RestrictedEdge) => inc_edge_sens(kind, params.d_prime)?,
        (None, BaseMode::RestrictedNode) => {
            return Err(bad("node mode needs an explicit base sensitivity"))
        }
    };
    RestrictedEstimator::with_gamma(kind, gamma, cfg.horizon, cfg.eps_prime, noise.derive(BASE_NOISE_LABEL))
}

impl TransformPipeline {
    pub fn build(cfg: &TransformConfig, kind: StatisticKind, noise: &NoiseSource) -> Result<(Self, DerivedParams)> {
        let params = derive_params(cfg)?;
        let test = DistanceTest::new(
            params.d_prime,
            params.ell,
            cfg.eps_test,
            params.tau,
            noise.derive(TEST_NOISE_LABEL),
        )?;
        let base = ProjectedBase::new(params.d_prime, base_estimator(cfg, &params, kind, noise)?);
        Ok((Ptr::new(test, base), params))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformRun {
    pub params: DerivedParams,
    pub steps: Vec<PtrOutput>,
    /// Test query `q_t` at each step.
    pub queries: Vec<f64>,
}

impl TransformRun {
    /// Number of leading steps with a released payload.
    pub fn released_steps(&self) -> usize {
        self.steps.iter().take_while(|s| s.payload.is_some()).count()
    }
}

/// Runs the full pipeline over a stream.
pub fn transform_run(
    s: &GraphStream,
    cfg: &TransformConfig,
    kind: StatisticKind,
    noise: &NoiseSource,
) -> Result<TransformRun> {
    if s.horizon() > cfg.horizon {
        return Err(bad(format!(
            "stream has {} steps but the horizon is {}",
            s.horizon(),
            cfg.horizon
        )));
    }
    let (mut pipeline, params) = TransformPipeline::build(cfg, kind, noise)?;
    let mut steps = Vec::with_capacity(s.horizon());
    let mut queries = Vec::with_capacity(s.horizon());
    for batch in s.batches() {
        steps.push(pipeline.step(batch)?);
        queries.push(pipeline.test().last_query());
    }
    Ok(TransformRun {
        params,
        steps,
        queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps_test: f64, beta: f64, beta_test: f64, horizon: usize) -> TransformConfig {
        TransformConfig {
            eps_test,
            beta_test,
            beta,
            degree_bound: 3,
            horizon,
            eps_prime: 0.1,
            mode: BaseMode::RestrictedEdge,
            base_gamma: None,
        }
    }

    #[test]
    fn derived_examples() {
        let p = derive_params(&cfg(1.0, 0.05, 0.05, 100)).unwrap();
        assert_eq!(p.ell, 85);
        assert_eq!(p.d_prime, 88);
        assert!((p.tau + 8.0 * 20f64.ln()).abs() < 1e-12);

        let r: f64 = 100.0 / (0.05 * 0.05);
        let p = derive_params(&cfg(8.0 * r.ln(), 0.05, 0.05, 100)).unwrap();
        assert_eq!(p.ell, 1);

        let p = derive_params(&cfg(1.0, 0.5, 1.0, 10)).unwrap();
        assert_eq!(p.tau, 0.0);
    }

    #[test]
    fn accounting_examples() {
        let params = DerivedParams { ell: 5, d_prime: 10, tau: 0.0 };
        let mut c = cfg(0.5, 0.1, 0.0, 10);
        c.eps_prime = 0.01;
        let (eps, delta) = privacy_accounting(&c, &params, 0.0);
        assert!((eps - 0.65).abs() < 1e-15);
        assert_eq!(delta, 0.0);
        c.mode = BaseMode::RestrictedNode;
        let (eps, _) = privacy_accounting(&c, &params, 0.0);
        assert!((eps - 0.61).abs() < 1e-15);
    }

    #[test]
    fn budget_split_example() {
        let c = suggest_budget_split(1.0, 1e-6, 5, 100, 0.1, BaseMode::RestrictedEdge).unwrap();
        assert_eq!(c.eps_test, 0.5);
        assert!((c.beta_test - 1e-6 / 30.0).abs() < 1e-20);
        let p = derive_params(&c).unwrap();
        let (e, d) = privacy_accounting(&c, &p, 0.0);
        assert!(e <= 1.0 && d <= 1e-6);
        assert!(suggest_budget_split(1.5, 1e-6, 5, 100, 0.1, BaseMode::RestrictedEdge).is_err());
        assert!(suggest_budget_split(1.0, 1e-6, 5, 1, 0.1, BaseMode::RestrictedEdge).is_err());
    }

    #[test]
    fn node_mode_requires_gamma() {
        let s = GraphStream::parse("step").unwrap();
        let mut c = cfg(1.0, 0.1, 0.1, 10);
        c.mode = BaseMode::RestrictedNode;
        let src = NoiseSource::new(1);
        assert!(transform_run(&s, &c, StatisticKind::Edges, &src).is_err());
        c.base_gamma = Some(3.0);
        assert!(transform_run(&s, &c, StatisticKind::Edges, &src).is_ok());
        c.base_gamma = Some(-1.0);
        assert!(derive_params(&c).is_err());
    }

    struct Scripted(Vec<Verdict>);

    impl StreamTest for Scripted {
        fn check(&mut self, _: &StreamBatch) -> Result<Verdict> {
            Ok(self.0.remove(0))
        }
    }

    #[derive(Default)]
    struct Counter(usize);

    impl StreamingEstimator for Counter {
        fn dims(&self) -> usize {
            1
        }
        fn step(&mut self, _: &StreamBatch) -> Result<Vec<f64>> {
            self.0 += 1;
            Ok(vec![self.0 as f64])
        }
    }

    #[test]
    fn gate_is_final() {
        use Verdict::*;
        let mut ptr = Ptr::new(Scripted(vec![Below, Below, Above, Below, Below]), Counter::default());
        let b = StreamBatch::new();
        let out: Vec<PtrOutput> = (0..5).map(|_| ptr.step(&b).unwrap()).collect();
        let payloads: Vec<Option<Vec<f64>>> = out.iter().map(|o| o.payload.clone()).collect();
        assert_eq!(payloads, vec![Some(vec![1.0]), Some(vec![2.0]), None, None, None]);
        assert_eq!(out[3].verdict, Below);
        assert_eq!(ptr.base().0, 2);
        assert!(!ptr.passed());
    }

    #[test]
    fn gate_that_never_trips_releases_everything() {
        let mut ptr = Ptr::new(Scripted(vec![Verdict::Below; 4]), Counter::default());
        let b = StreamBatch::new();
        assert!((0..4).all(|_| ptr.step(&b).unwrap().payload.is_some()));
    }

    #[test]
    fn empty_stream_releases_noise() {
        let s = GraphStream::parse("step\nstep\nstep").unwrap();
        let c = cfg(1.0, 0.1, 0.1, 3);
        let run = transform_run(&s, &c, StatisticKind::Edges, &NoiseSource::new(4)).unwrap();
        assert_eq!(run.steps.len(), 3);
        let p = run.params;
        assert!(run.queries.iter().all(|&q| q == -((p.d_prime + 2).max(p.ell) as f64)));
    }

    #[test]
    fn horizon_shorter_than_stream_is_rejected() {
        let s = GraphStream::parse("step\nstep\nstep").unwrap();
        let c = cfg(1.0, 0.1, 0.1, 2);
        assert!(transform_run(&s, &c, StatisticKind::Edges, &NoiseSource::new(4)).is_err());
    }
}
