//! Random walks on the form-preserving matrix group: Mahler positivity of
//! `det B`, Lyapunov exponents of the exterior-power action, hyperplane
//! statistics and proximality probes.
//!
//! Every trial draws its letters from its own ChaCha8 stream keyed by
//! `(master_seed, trial_index)`, and results are reduced in trial order,
//! so reports do not depend on the number of worker threads.

use std::collections::BTreeMap;

use nalgebra::{DVector, Schur};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hermitian::{
    bundled_generators, degree_bound, exterior_is_small, exterior_power_matrix, iota_embed, AnyFormMatrix,
    ExteriorMarking, FormMatrix, HermitianError, SurfaceModel,
};
use crate::mahler::{build_k_alpha, constraint_check, kronecker_zero_test, ConstraintParams, ConstraintVerdict, MahlerError};
use crate::matrix::CMat;
use crate::ring::{LaurentPoly, RingError};

/// Thresholds for the hyperplane statistic.
pub const DELTAS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Eigenvalue gap required of a proximality witness.
pub const PROXIMAL_GAP: f64 = 1e-3;

const SCHUR_MAX_ITER: usize = 10_000;

const TWIST_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Hermitian(#[from] HermitianError),
    #[error(transparent)]
    Mahler(#[from] MahlerError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, WalkError> {
    Err(WalkError::InvalidConfig(msg.into()))
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    /// `"bundled"`: the Torelli-like transvection set for the genus.
    Named(String),
    Explicit(Vec<AnyFormMatrix>),
}

/// On-disk walk configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfigFile {
    pub g: usize,
    pub generators: GeneratorSpec,
    /// Exact probabilities such as `"1/14"`; uniform when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<String>>,
    pub n_steps: usize,
    pub n_trials: usize,
    pub master_seed: u64,
    pub q_list: Vec<usize>,
    #[serde(default = "default_root")]
    pub root_index: i64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_scan")]
    pub n_scan_max: u64,
    #[serde(default = "default_trim")]
    pub trim_fraction: f64,
    /// Maximal `|k|` of the random unit `t^k` applied to each sampled letter.
    #[serde(default)]
    pub unit_twist: u32,
    #[serde(default = "default_probe_length")]
    pub probe_length: usize,
    #[serde(default = "default_probe_budget")]
    pub probe_budget: usize,
}

fn default_root() -> i64 {
    1
}
fn default_alpha() -> f64 {
    1.0
}
fn default_scan() -> u64 {
    200
}
fn default_trim() -> f64 {
    0.1
}
fn default_probe_length() -> usize {
    8
}
fn default_probe_budget() -> usize {
    20_000
}

impl WalkConfigFile {
    /// Defaults with the bundled generators and uniform weights.
    pub fn bundled(g: usize, n_steps: usize, n_trials: usize, master_seed: u64, q_list: Vec<usize>) -> Self {
        Self {
            g,
            generators: GeneratorSpec::Named("bundled".into()),
            probabilities: None,
            n_steps,
            n_trials,
            master_seed,
            q_list,
            root_index: default_root(),
            alpha: default_alpha(),
            n_scan_max: default_scan(),
            trim_fraction: default_trim(),
            unit_twist: 0,
            probe_length: default_probe_length(),
            probe_budget: default_probe_budget(),
        }
    }
}

/// Validated walk configuration.
#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub model: SurfaceModel,
    pub generators: Vec<FormMatrix<LaurentPoly>>,
    pub probabilities: Vec<BigRational>,
    pub n_steps: usize,
    pub n_trials: usize,
    pub master_seed: u64,
    pub q_list: Vec<usize>,
    pub root_index: i64,
    pub alpha: f64,
    pub n_scan_max: u64,
    pub trim_fraction: f64,
    pub unit_twist: u32,
    pub probe_length: usize,
    pub probe_budget: usize,
    /// Every generator's inverse is also in the support.
    pub inverses_present: bool,
    /// Integer weights with the common denominator of the probabilities.
    weights: Vec<u64>,
    total_weight: u64,
}

fn parse_rational(s: &str) -> Result<BigRational, WalkError> {
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| WalkError::InvalidConfig(format!("bad probability {s:?}")))?;
            let b: BigInt = b.trim().parse().map_err(|_| WalkError::InvalidConfig(format!("bad probability {s:?}")))?;
            if b.is_zero() {
                return invalid(format!("zero denominator in {s:?}"));
            }
            BigRational::new(a, b)
        }
        None => {
            let a: BigInt = s.parse().map_err(|_| WalkError::InvalidConfig(format!("bad probability {s:?}")))?;
            BigRational::from_integer(a)
        }
    };
    Ok(r)
}

impl WalkConfig {
    pub fn from_file(f: &WalkConfigFile) -> Result<Self, WalkError> {
        let model = SurfaceModel::new(f.g)?;
        let generators = match &f.generators {
            GeneratorSpec::Named(name) if name == "bundled" => bundled_generators(f.g)?,
            GeneratorSpec::Named(name) => return invalid(format!("unknown generator set {name:?}")),
            GeneratorSpec::Explicit(list) => {
                let mut out = Vec::with_capacity(list.len());
                for (i, m) in list.iter().enumerate() {
                    match m {
                        AnyFormMatrix::Laurent(m) if m.genus() == f.g => out.push(m.clone()),
                        AnyFormMatrix::Laurent(_) => return invalid(format!("generator {i} has the wrong genus")),
                        AnyFormMatrix::Cyclic(_) => return invalid(format!("generator {i} must be over the Laurent ring")),
                    }
                }
                out
            }
        };
        let probabilities = match &f.probabilities {
            None => {
                let n = generators.len().max(1);
                vec![BigRational::new(BigInt::one(), BigInt::from(n)); generators.len()]
            }
            Some(ps) => ps.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?,
        };
        Self::new(model, generators, probabilities, f)
    }

    fn new(
        model: SurfaceModel,
        generators: Vec<FormMatrix<LaurentPoly>>,
        probabilities: Vec<BigRational>,
        f: &WalkConfigFile,
    ) -> Result<Self, WalkError> {
        if generators.is_empty() {
            return Err(HermitianError::EmptyGeneratorSet.into());
        }
        if probabilities.len() != generators.len() {
            return invalid(format!(
                "{} probabilities for {} generators",
                probabilities.len(),
                generators.len()
            ));
        }
        if probabilities.iter().any(|p| !p.is_positive()) {
            return invalid("probabilities must be positive");
        }
        if probabilities.iter().fold(BigRational::zero(), |a, p| a + p) != BigRational::one() {
            return invalid("probabilities must sum to 1");
        }
        for (i, g) in generators.iter().enumerate() {
            if !g.check_form_preserved() {
                return invalid(format!("generator {i} does not preserve the form"));
            }
        }
        if f.n_steps == 0 || f.n_trials == 0 {
            return invalid("n_steps and n_trials must be positive");
        }
        if f.q_list.iter().any(|&q| q < 3) {
            return invalid("cover degrees in q_list must be at least 3");
        }
        for &q in &f.q_list {
            if f.root_index.rem_euclid(q as i64).gcd(&(q as i64)) != 1 {
                return Err(HermitianError::NonPrimitiveRoot { j: f.root_index, q }.into());
            }
        }
        if !(f.alpha > 0.0) {
            return invalid("alpha must be positive");
        }
        if !(0.0..0.5).contains(&f.trim_fraction) {
            return invalid("trim_fraction must lie in [0, 0.5)");
        }
        let denom = probabilities.iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let weights: Vec<u64> = probabilities
            .iter()
            .map(|p| (p.numer() * (&denom / p.denom())).to_u64())
            .collect::<Option<_>>()
            .ok_or_else(|| WalkError::InvalidConfig("probability denominators too large".into()))?;
        let total_weight = denom
            .to_u64()
            .ok_or_else(|| WalkError::InvalidConfig("probability denominators too large".into()))?;
        let inverses_present = generators.iter().all(|g| {
            let one = LaurentPoly::one();
            let id = FormMatrix::identity(g.model(), &one);
            generators.iter().any(|h| h.mul(g) == id)
        });
        Ok(Self {
            model,
            generators,
            probabilities,
            n_steps: f.n_steps,
            n_trials: f.n_trials,
            master_seed: f.master_seed,
            q_list: f.q_list.clone(),
            root_index: f.root_index,
            alpha: f.alpha,
            n_scan_max: f.n_scan_max,
            trim_fraction: f.trim_fraction,
            unit_twist: f.unit_twist,
            probe_length: f.probe_length,
            probe_budget: f.probe_budget,
            inverses_present,
            weights,
            total_weight,
        })
    }

    pub fn genus(&self) -> usize {
        self.model.genus()
    }

    /// `2, 4, 8, …` up to `n_steps`, with `n_steps` itself appended.
    pub fn schedule(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut n = 2;
        while n <= self.n_steps {
            out.push(n);
            n *= 2;
        }
        if out.last() != Some(&self.n_steps) {
            out.push(self.n_steps);
        }
        out
    }

    /// `d_μ` of the support.
    pub fn degree_bound(&self) -> u64 {
        degree_bound(&self.generators).expect("nonempty generator set")
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// One step of a walk: generator index and unit twist exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub twist: i64,
}

/// Letters `b_1, …, b_n` of trial `trial_index`.
pub fn sample_letters(config: &WalkConfig, trial_index: u64, n: usize) -> Vec<Letter> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    rng.set_stream(trial_index);
    let mut twist_rng = ChaCha8Rng::seed_from_u64(config.master_seed ^ TWIST_SALT);
    twist_rng.set_stream(trial_index);
    let k = config.unit_twist as i64;
    (0..n)
        .map(|_| {
            let u = rng.random_range(0..config.total_weight);
            let mut acc = 0u64;
            let mut index = config.weights.len() - 1;
            for (i, w) in config.weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    index = i;
                    break;
                }
            }
            let twist = if k > 0 { twist_rng.random_range(-k..=k) } else { 0 };
            Letter { index, twist }
        })
        .collect()
}

/// The exact product `b_n ⋯ b_1` for trial `trial_index`.
pub fn sample_word(config: &WalkConfig, trial_index: u64, n: usize) -> Result<FormMatrix<LaurentPoly>, WalkError> {
    if n > config.n_steps {
        return invalid(format!("word length {n} exceeds n_steps = {}", config.n_steps));
    }
    let one = LaurentPoly::one();
    let mut m = FormMatrix::identity(config.model, &one);
    for l in sample_letters(config, trial_index, n) {
        m = config.generators[l.index].unit_twist(l.twist).mul(&m);
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Complex propagation
// ---------------------------------------------------------------------------

/// How the `∧^{g-1}` action is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExteriorMode {
    /// Full exterior-power matrices.
    Exterior,
    /// Orthonormalized `(g-1)`-frames; `‖∧X e‖` is the product of the
    /// accumulated `R` diagonals.
    Frame,
}

/// Per-letter complex data for one cover degree.
#[derive(Debug, Clone)]
pub struct ComplexLetters {
    marking: ExteriorMarking,
    mode: ExteriorMode,
    iota: Vec<CMat>,
    wedge: Vec<CMat>,
}

impl ComplexLetters {
    /// From explicit complex matrices (already `ι`-embedded).
    pub fn from_matrices(model: SurfaceModel, mats: Vec<CMat>, mode: ExteriorMode) -> Self {
        let marking = ExteriorMarking::new(model);
        let wedge = match mode {
            ExteriorMode::Exterior => mats.iter().map(|a| exterior_power_matrix(a, marking.subsets())).collect(),
            ExteriorMode::Frame => Vec::new(),
        };
        Self {
            marking,
            mode,
            iota: mats,
            wedge,
        }
    }

    /// `ι` images of the canonical lifts of the generators. A twisted
    /// letter `t^k G` has the same canonical lift as `G`, and the moduli
    /// measured here only change by `|ζ^k| = 1` under the twist.
    pub fn for_config(config: &WalkConfig, q: usize, mode: ExteriorMode) -> Result<Self, WalkError> {
        let mats = config
            .generators
            .iter()
            .map(|g| {
                let (lift, _) = g.canonical_lift();
                Ok(iota_embed(&lift.reduce_mod_q(q)?, config.root_index)?)
            })
            .collect::<Result<Vec<_>, WalkError>>()?;
        Ok(Self::from_matrices(config.model, mats, mode))
    }

    pub fn mode(&self) -> ExteriorMode {
        self.mode
    }
}

/// State of `∧^{g-1} ι(M) e`, renormalized after every step.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    letters: &'a ComplexLetters,
    vec: DVector<Complex64>,
    frame: CMat,
    log_norm: f64,
    degenerate: bool,
}

impl<'a> Propagator<'a> {
    pub fn new(letters: &'a ComplexLetters) -> Self {
        let h = letters.marking.model().half();
        Self {
            letters,
            vec: letters.marking.e(),
            frame: CMat::identity(2 * h, h),
            log_norm: 0.0,
            degenerate: false,
        }
    }

    /// Left-multiply by letter `i`.
    pub fn step(&mut self, i: usize) {
        if self.degenerate {
            return;
        }
        match self.letters.mode {
            ExteriorMode::Exterior => {
                self.vec = &self.letters.wedge[i] * &self.vec;
                let norm = self.vec.norm();
                if !(norm > 0.0) || !norm.is_finite() {
                    self.degenerate = true;
                    return;
                }
                self.log_norm += norm.ln();
                self.vec.unscale_mut(norm);
            }
            ExteriorMode::Frame => {
                let x = &self.letters.iota[i] * &self.frame;
                let (q, r) = x.qr().unpack();
                let mut add = 0.0;
                for k in 0..r.nrows() {
                    let d = r[(k, k)].norm();
                    if !(d > 0.0) || !d.is_finite() {
                        self.degenerate = true;
                        return;
                    }
                    add += d.ln();
                }
                self.log_norm += add;
                self.frame = q;
            }
        }
    }

    /// `log ‖∧ι(M) e‖`.
    pub fn log_norm(&self) -> Option<f64> {
        (!self.degenerate).then_some(self.log_norm)
    }

    /// `|(∧ι(M) e, f)| / ‖∧ι(M) e‖`.
    pub fn hyperplane_ratio(&self) -> Option<f64> {
        if self.degenerate {
            return None;
        }
        match self.letters.mode {
            ExteriorMode::Exterior => Some(self.vec[self.letters.marking.f_index()].norm()),
            ExteriorMode::Frame => {
                let h = self.frame.ncols();
                let bottom = self.frame.view((h, 0), (h, h)).into_owned();
                Some(crate::matrix::cdet(&bottom).norm())
            }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

/// `(1/n) log ‖∧ι(b_n ⋯ b_1) e‖` at each `n` in `schedule`, for a fixed
/// letter sequence. `None` once the propagated vector has degenerated.
pub fn lyapunov_path(letters: &ComplexLetters, word: &[usize], schedule: &[usize]) -> Vec<Option<f64>> {
    let mut p = Propagator::new(letters);
    let mut out = Vec::with_capacity(schedule.len());
    let mut done = 0;
    for &n in schedule {
        while done < n && done < word.len() {
            p.step(word[done]);
            done += 1;
        }
        out.push(p.log_norm().map(|l| l / n as f64));
    }
    out
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MahlerOutcome {
    Positive,
    CyclotomicHit,
    SmallEverywhere,
    BoundExceeded,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
struct TrialResult {
    mahler: Vec<MahlerOutcome>,
    det_degree: Vec<Option<u64>>,
    /// Per q, per schedule point.
    lyapunov: Vec<Vec<Option<f64>>>,
    ratio: Vec<Vec<Option<f64>>>,
}

struct Engine<'a> {
    config: &'a WalkConfig,
    letters: Vec<ComplexLetters>,
    params: ConstraintParams,
    schedule: Vec<usize>,
    d_mu: u64,
}

impl<'a> Engine<'a> {
    fn new(config: &'a WalkConfig) -> Result<Self, WalkError> {
        let mode = if exterior_is_small(&config.model) {
            ExteriorMode::Exterior
        } else {
            ExteriorMode::Frame
        };
        let letters = config
            .q_list
            .iter()
            .map(|&q| ComplexLetters::for_config(config, q, mode))
            .collect::<Result<Vec<_>, _>>()?;
        let d_mu = config.degree_bound();
        let params = ConstraintParams::for_walk(config.alpha, config.n_scan_max, d_mu, config.genus())?;
        Ok(Self {
            config,
            letters,
            params,
            schedule: config.schedule(),
            d_mu,
        })
    }

    fn classify(&self, det: &LaurentPoly, n: usize) -> MahlerOutcome {
        if det.is_zero() {
            return MahlerOutcome::Degenerate;
        }
        match kronecker_zero_test(det) {
            Ok(None) => MahlerOutcome::Positive,
            _ => match constraint_check(det, &self.params, n as u64) {
                Ok(ConstraintVerdict::CyclotomicHit { .. }) => MahlerOutcome::CyclotomicHit,
                Ok(ConstraintVerdict::SmallEverywhere { .. }) => MahlerOutcome::SmallEverywhere,
                Ok(ConstraintVerdict::BoundExceeded { .. }) => MahlerOutcome::BoundExceeded,
                Ok(ConstraintVerdict::NotMahlerZero) => MahlerOutcome::Positive,
                // a degree violation is recorded separately in the ledger
                Err(_) => MahlerOutcome::BoundExceeded,
            },
        }
    }

    fn run_trial(&self, trial: u64) -> TrialResult {
        let n_max = *self.schedule.last().unwrap();
        let letters = sample_letters(self.config, trial, n_max);
        let word: Vec<usize> = letters.iter().map(|l| l.index).collect();

        let one = LaurentPoly::one();
        let mut m = FormMatrix::identity(self.config.model, &one);
        let mut mahler = Vec::with_capacity(self.schedule.len());
        let mut det_degree = Vec::with_capacity(self.schedule.len());
        let mut done = 0;
        for &n in &self.schedule {
            while done < n {
                let l = letters[done];
                m = self.config.generators[l.index].unit_twist(l.twist).mul(&m);
                done += 1;
            }
            let det = m.bottom_left_block().det();
            det_degree.push((!det.is_zero()).then(|| det.degree()));
            mahler.push(self.classify(&det, n));
        }

        let mut lyapunov = Vec::with_capacity(self.letters.len());
        let mut ratio = Vec::with_capacity(self.letters.len());
        for letters in &self.letters {
            let mut p = Propagator::new(letters);
            let mut ls = Vec::with_capacity(self.schedule.len());
            let mut rs = Vec::with_capacity(self.schedule.len());
            let mut done = 0;
            for &n in &self.schedule {
                while done < n {
                    p.step(word[done]);
                    done += 1;
                }
                ls.push(p.log_norm().map(|l| l / n as f64));
                rs.push(p.hyperplane_ratio());
            }
            lyapunov.push(ls);
            ratio.push(rs);
        }
        TrialResult {
            mahler,
            det_degree,
            lyapunov,
            ratio,
        }
    }
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MahlerPoint {
    pub n: usize,
    pub trials: usize,
    pub positive: usize,
    pub fraction_positive: f64,
    pub stderr: f64,
    pub cyclotomic_hit: usize,
    pub small_everywhere: usize,
    pub bound_exceeded: usize,
    pub degenerate: usize,
    /// `bound_exceeded / trials`.
    pub fraction_constraint_violations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreePoint {
    pub n: usize,
    /// `(g-1) d_μ n`
    pub bound: u64,
    pub max_degree: u64,
    pub mean_degree: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovPoint {
    pub n: usize,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSeries {
    pub q: usize,
    pub root_index: i64,
    pub mode: ExteriorMode,
    pub points: Vec<LyapunovPoint>,
    /// Trimmed mean of `L_n` at the largest `n`.
    pub lambda_hat: f64,
    pub degenerate_norm: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplanePoint {
    pub n: usize,
    pub count: usize,
    /// Fraction below each threshold in [`DELTAS`].
    pub fractions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneSeries {
    pub q: usize,
    pub root_index: i64,
    pub deltas: Vec<f64>,
    pub points: Vec<HyperplanePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkReport {
    pub g: usize,
    pub n_trials: usize,
    pub master_seed: u64,
    pub schedule: Vec<usize>,
    pub d_mu: u64,
    pub inverses_present: bool,
    pub alpha: f64,
    pub k_set: Vec<u64>,
    pub k_scan_max: u64,
    pub k_beyond_horizon_assumed: bool,
    pub mahler: Vec<MahlerPoint>,
    pub degree: Vec<DegreePoint>,
    pub lyapunov: Vec<LyapunovSeries>,
    pub hyperplane: Vec<HyperplaneSeries>,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Mean after dropping `trim` of the sample from each end.
pub fn trimmed_mean(xs: &[f64], trim: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = ((v.len() as f64) * trim).floor() as usize;
    let kept = &v[k..v.len() - k];
    if kept.is_empty() {
        return v[v.len() / 2];
    }
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Run every trial and reduce the results in trial order.
pub fn run_walk(config: &WalkConfig) -> Result<WalkReport, WalkError> {
    let engine = Engine::new(config)?;
    let results: Vec<TrialResult> = (0..config.n_trials as u64)
        .into_par_iter()
        .map(|t| engine.run_trial(t))
        .collect();
    Ok(reduce(&engine, &results))
}

fn reduce(engine: &Engine<'_>, results: &[TrialResult]) -> WalkReport {
    let config = engine.config;
    let schedule = &engine.schedule;
    let n_trials = results.len();
    let g = config.genus();

    let mut mahler = Vec::new();
    let mut degree = Vec::new();
    for (k, &n) in schedule.iter().enumerate() {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for r in results {
            let key = match r.mahler[k] {
                MahlerOutcome::Positive => "positive",
                MahlerOutcome::CyclotomicHit => "cyclotomic_hit",
                MahlerOutcome::SmallEverywhere => "small_everywhere",
                MahlerOutcome::BoundExceeded => "bound_exceeded",
                MahlerOutcome::Degenerate => "degenerate",
            };
            *counts.entry(key).or_default() += 1;
        }
        let get = |s: &str| counts.get(s).copied().unwrap_or(0);
        let positive = get("positive");
        let p = positive as f64 / n_trials as f64;
        mahler.push(MahlerPoint {
            n,
            trials: n_trials,
            positive,
            fraction_positive: p,
            stderr: (p * (1.0 - p) / n_trials as f64).sqrt(),
            cyclotomic_hit: get("cyclotomic_hit"),
            small_everywhere: get("small_everywhere"),
            bound_exceeded: get("bound_exceeded"),
            degenerate: get("degenerate"),
            fraction_constraint_violations: get("bound_exceeded") as f64 / n_trials as f64,
        });

        let bound = (g as u64 - 1) * engine.d_mu * n as u64;
        let degs: Vec<u64> = results.iter().filter_map(|r| r.det_degree[k]).collect();
        degree.push(DegreePoint {
            n,
            bound,
            max_degree: degs.iter().copied().max().unwrap_or(0),
            mean_degree: if degs.is_empty() {
                0.0
            } else {
                degs.iter().sum::<u64>() as f64 / degs.len() as f64
            },
            violations: degs.iter().filter(|&&d| d > bound).count(),
        });
    }

    let mut lyapunov = Vec::new();
    let mut hyperplane = Vec::new();
    for (qi, &q) in config.q_list.iter().enumerate() {
        let mut points = Vec::new();
        let mut hpoints = Vec::new();
        for (k, &n) in schedule.iter().enumerate() {
            let xs: Vec<f64> = results.iter().filter_map(|r| r.lyapunov[qi][k]).collect();
            let (mean, variance) = mean_var(&xs);
            points.push(LyapunovPoint {
                n,
                count: xs.len(),
                mean,
                variance,
            });
            let rs: Vec<f64> = results.iter().filter_map(|r| r.ratio[qi][k]).collect();
            let fractions = DELTAS
                .iter()
                .map(|&d| {
                    if rs.is_empty() {
                        f64::NAN
                    } else {
                        rs.iter().filter(|&&x| x < d).count() as f64 / rs.len() as f64
                    }
                })
                .collect();
            hpoints.push(HyperplanePoint {
                n,
                count: rs.len(),
                fractions,
            });
        }
        let last = schedule.len() - 1;
        let final_l: Vec<f64> = results.iter().filter_map(|r| r.lyapunov[qi][last]).collect();
        lyapunov.push(LyapunovSeries {
            q,
            root_index: config.root_index,
            mode: engine.letters[qi].mode(),
            points,
            lambda_hat: trimmed_mean(&final_l, config.trim_fraction),
            degenerate_norm: n_trials - final_l.len(),
        });
        hyperplane.push(HyperplaneSeries {
            q,
            root_index: config.root_index,
            deltas: DELTAS.to_vec(),
            points: hpoints,
        });
    }

    WalkReport {
        g,
        n_trials,
        master_seed: config.master_seed,
        schedule: schedule.clone(),
        d_mu: engine.d_mu,
        inverses_present: config.inverses_present,
        alpha: config.alpha,
        k_set: engine.params.k_set.iter().copied().collect(),
        k_scan_max: config.n_scan_max,
        k_beyond_horizon_assumed: build_k_alpha(engine.params.reduced_alpha(), 1)
            .map(|k| k.beyond_horizon_assumed)
            .unwrap_or(true),
        mahler,
        degree,
        lyapunov,
        hyperplane,
    }
}

// ---------------------------------------------------------------------------
// Proximality
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximalityReport {
    pub q: usize,
    pub root_index: i64,
    pub max_length: usize,
    pub words_examined: usize,
    pub budget_exhausted: bool,
    /// Letters `b_1, …, b_k` of the first witness found.
    pub witness: Option<Vec<usize>>,
    /// `|λ_{g-1}| / |λ_g|` for the witness (moduli sorted decreasingly),
    /// the ratio of the top two eigenvalue moduli of `∧^{g-1}`.
    pub gap_ratio: Option<f64>,
}

/// Eigenvalues of a complex square matrix from its Schur form, or `None`
/// if the QR iteration does not converge.
///
/// Permutation-like matrices can stall the shifted QR iteration, so a
/// failed attempt is retried after a fixed unitary change of basis.
pub fn complex_eigenvalues(a: &CMat) -> Option<Vec<Complex64>> {
    let n = a.nrows();
    let diag = |t: CMat| (0..n).map(|i| t[(i, i)]).collect::<Vec<_>>();
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return Some(diag(s.unpack().1));
    }
    let mixer = CMat::from_fn(n, n, |i, j| {
        let x = ((i * 7 + j * 13 + 1) as f64).sin();
        let y = ((i * 11 + j * 5 + 2) as f64).cos();
        Complex64::new(x, y)
    });
    let u = mixer.qr().q();
    let b = u.adjoint() * a * &u;
    Schur::try_new(b, f64::EPSILON, SCHUR_MAX_ITER).map(|s| diag(s.unpack().1))
}

/// Ratio of the two largest eigenvalue moduli of `∧^h A`; `NaN` when the
/// eigenvalues could not be computed.
pub fn exterior_gap_ratio(a: &CMat, h: usize) -> f64 {
    let Some(eigs) = complex_eigenvalues(a) else {
        return f64::NAN;
    };
    let mut mods: Vec<f64> = eigs.iter().map(|z| z.norm()).collect();
    mods.sort_by(|x, y| y.total_cmp(x));
    if mods.len() <= h || mods[h] == 0.0 {
        return f64::INFINITY;
    }
    mods[h - 1] / mods[h]
}

/// Breadth-first search over words of length `<= L` for a letter product
/// whose `∧^{g-1}` image has a simple dominant eigenvalue.
pub fn proximality_probe(config: &WalkConfig, q: usize) -> Result<ProximalityReport, WalkError> {
    let letters = ComplexLetters::for_config(config, q, ExteriorMode::Frame)?;
    let h = config.model.half();
    let k = letters.iota.len();
    let mut examined = 0usize;
    let mut frontier: Vec<(Vec<usize>, CMat)> = vec![(Vec::new(), CMat::identity(2 * h, 2 * h))];
    for _len in 1..=config.probe_length {
        let mut next = Vec::new();
        for (word, m) in &frontier {
            for i in 0..k {
                if examined >= config.probe_budget {
                    return Ok(ProximalityReport {
                        q,
                        root_index: config.root_index,
                        max_length: config.probe_length,
                        words_examined: examined,
                        budget_exhausted: true,
                        witness: None,
                        gap_ratio: None,
                    });
                }
                let prod = &letters.iota[i] * m;
                examined += 1;
                let gap = exterior_gap_ratio(&prod, h);
                let mut w = word.clone();
                w.push(i);
                if gap.is_finite() && gap > 1.0 + PROXIMAL_GAP {
                    return Ok(ProximalityReport {
                        q,
                        root_index: config.root_index,
                        max_length: config.probe_length,
                        words_examined: examined,
                        budget_exhausted: false,
                        witness: Some(w),
                        gap_ratio: Some(gap),
                    });
                }
                next.push((w, prod));
            }
        }
        frontier = next;
    }
    Ok(ProximalityReport {
        q,
        root_index: config.root_index,
        max_length: config.probe_length,
        words_examined: examined,
        budget_exhausted: false,
        witness: None,
        gap_ratio: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Mat;

    fn identity_config(n_trials: usize) -> WalkConfig {
        let model = SurfaceModel::new(3).unwrap();
        let id = FormMatrix::identity(model, &LaurentPoly::one());
        let f = WalkConfigFile {
            generators: GeneratorSpec::Explicit(vec![AnyFormMatrix::Laurent(id)]),
            ..WalkConfigFile::bundled(3, 16, n_trials, 7, vec![3])
        };
        WalkConfig::from_file(&f).unwrap()
    }

    #[test]
    fn identity_support() {
        let c = identity_config(20);
        assert!(c.inverses_present);
        let w = sample_word(&c, 3, 16).unwrap();
        assert_eq!(w, FormMatrix::identity(c.model, &LaurentPoly::one()));
        let r = run_walk(&c).unwrap();
        assert!(r.mahler.iter().all(|p| p.fraction_positive == 0.0 && p.degenerate == 20));
        for s in &r.lyapunov {
            assert!(s.points.iter().all(|p| p.mean == 0.0));
        }
        for s in &r.hyperplane {
            assert!(s.points.iter().all(|p| p.fractions.iter().all(|&f| f == 1.0)));
        }
        let probe = proximality_probe(&c, 3).unwrap();
        assert!(probe.witness.is_none());
    }

    #[test]
    fn schedule_is_logarithmic() {
        let c = WalkConfig::from_file(&WalkConfigFile::bundled(3, 64, 1, 0, vec![3])).unwrap();
        assert_eq!(c.schedule(), vec![2, 4, 8, 16, 32, 64]);
        let c = WalkConfig::from_file(&WalkConfigFile::bundled(3, 20, 1, 0, vec![3])).unwrap();
        assert_eq!(c.schedule(), vec![2, 4, 8, 16, 20]);
    }

    #[test]
    fn config_validation() {
        let mut f = WalkConfigFile::bundled(3, 8, 4, 0, vec![3]);
        f.probabilities = Some(vec!["1/2".into(); 14]);
        assert!(matches!(WalkConfig::from_file(&f), Err(WalkError::InvalidConfig(_))));
        let mut f = WalkConfigFile::bundled(3, 8, 4, 0, vec![2]);
        assert!(WalkConfig::from_file(&f).is_err());
        f.q_list = vec![6];
        f.root_index = 2;
        assert!(WalkConfig::from_file(&f).is_err());
        let c = WalkConfig::from_file(&WalkConfigFile::bundled(3, 8, 4, 0, vec![3])).unwrap();
        assert!(c.inverses_present);
    }

    #[test]
    fn lyapunov_of_diagonal_is_log_two() {
        let model = SurfaceModel::new(3).unwrap();
        let mut a = CMat::identity(4, 4);
        a[(0, 0)] = Complex64::new(2.0, 0.0);
        a[(2, 2)] = Complex64::new(0.5, 0.0);
        assert!(crate::hermitian::complex_form_residual(&a) < 1e-15);
        for mode in [ExteriorMode::Exterior, ExteriorMode::Frame] {
            let letters = ComplexLetters::from_matrices(model, vec![a.clone()], mode);
            let word = vec![0; 32];
            for l in lyapunov_path(&letters, &word, &[2, 4, 8, 16, 32]) {
                assert!((l.unwrap() - 2f64.ln()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exterior_and_frame_paths_agree() {
        let c = WalkConfig::from_file(&WalkConfigFile::bundled(3, 32, 1, 5, vec![5])).unwrap();
        let ext = ComplexLetters::for_config(&c, 5, ExteriorMode::Exterior).unwrap();
        let frm = ComplexLetters::for_config(&c, 5, ExteriorMode::Frame).unwrap();
        for trial in 0..5 {
            let word: Vec<usize> = sample_letters(&c, trial, 32).iter().map(|l| l.index).collect();
            let mut p = Propagator::new(&ext);
            let mut r = Propagator::new(&frm);
            for &i in &word {
                p.step(i);
                r.step(i);
                assert!((p.log_norm().unwrap() - r.log_norm().unwrap()).abs() < 1e-8);
                assert!((p.hyperplane_ratio().unwrap() - r.hyperplane_ratio().unwrap()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn proximal_constant_generator() {
        // hyperbolic Sp(4, Z) element acting on (a1, b1) and (a2, b2)
        let model = SurfaceModel::new(3).unwrap();
        let rows: Vec<Vec<i64>> = vec![vec![2, 0, 1, 0], vec![0, 3, 0, 1], vec![1, 0, 1, 0], vec![0, 2, 0, 1]];
        let m = Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| LaurentPoly::constant(x)).collect())
                .collect(),
        );
        let gen = FormMatrix::new(model, m).unwrap();
        let f = WalkConfigFile {
            generators: GeneratorSpec::Explicit(vec![AnyFormMatrix::Laurent(gen)]),
            ..WalkConfigFile::bundled(3, 16, 10, 1, vec![3])
        };
        let c = WalkConfig::from_file(&f).unwrap();
        let probe = proximality_probe(&c, 3).unwrap();
        assert_eq!(probe.witness, Some(vec![0]));
        let r = run_walk(&c).unwrap();
        assert!(r.lyapunov[0].lambda_hat > 0.0);
    }

    #[test]
    fn letter_frequencies_match_probabilities() {
        let c = WalkConfig::from_file(&WalkConfigFile::bundled(3, 1, 1, 11, vec![3])).unwrap();
        let k = c.generators.len();
        let mut counts = vec![0usize; k];
        let trials = 10_000;
        for t in 0..trials {
            counts[sample_letters(&c, t, 1)[0].index] += 1;
        }
        let p = 1.0 / k as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for &cnt in &counts {
            assert!((cnt as f64 - trials as f64 * p).abs() < 3.5 * sigma, "{counts:?}");
        }
    }
}
