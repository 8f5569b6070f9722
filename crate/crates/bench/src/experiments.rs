//! Seeded experiment pipelines producing [`Report`]s.
//!
//! Trial `t` of a run with root seed `s` uses `derive_seed(s, t)`, and every
//! phase of a trial draws from its own sub-stream, so a trial's numbers do not
//! depend on the trial count or on which phases run.

use std::time::{Duration, Instant};

use tensor_disentangle::descent::{estimate_min_entropy, random_unitary_entropy, riemannian_descent, DescentConfig};
use tensor_disentangle::entanglement::{cut_spectrum, disentangled_spectrum, nats_to_bits, SingularSpectrum};
use tensor_disentangle::generators::{random_state, SpectrumKind, MAX_QUBITS};
use tensor_disentangle::linalg::random_unitary;
use tensor_disentangle::rng::{derive_seed, seeded};
use tensor_disentangle::wavefunction::{disentangle_state, initial_record, SweepConfig, SweepMethod, SweepRecord};
use tensor_disentangle::{
    disentangle_auto, zero_singular_lower_bound, Dims, DisentangleOptions, Disentangler, Regime, Tensor3, Tensor4,
};

use crate::report::{Report, Value};
use crate::stats::Summary;
use crate::BenchError;

const PHASE_GENERATE: u64 = 0;
const PHASE_FAST: u64 = 1;
const PHASE_MIN: u64 = 2;
const PHASE_RANDOM: u64 = 3;
const PHASE_SPEEDUP: u64 = 4;

/// Relative threshold below which a singular value counts as zero.
pub const ZERO_REL: f64 = 1e-10;

pub fn kind_name(kind: SpectrumKind) -> &'static str {
    match kind {
        SpectrumKind::Gaussian => "gaussian",
        SpectrumKind::InverseSpectrum => "lambda-inverse",
        SpectrumKind::ExponentialSpectrum => "lambda-exp",
        SpectrumKind::InverseOuter => "mu-inverse",
        SpectrumKind::Ansatz { .. } => "ansatz",
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Base => "base",
        Regime::Extended => "extended",
        Regime::SwappedExtended => "swapped-extended",
    }
}

/// A tensor family at fixed dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorSpec {
    pub kind: SpectrumKind,
    pub dims: Dims,
}

impl TensorSpec {
    /// Checks that the family accepts the dimensions and that some regime of
    /// the fast algorithm applies.
    pub fn validate(&self) -> Result<(), BenchError> {
        let d = self.dims.as_array();
        self.dims.regime().map_err(|_| BenchError::Config(format!("no disentangling regime for dims {d:?}")))?;
        let structured = !matches!(self.kind, SpectrumKind::Gaussian | SpectrumKind::Ansatz { .. });
        if structured && (d[0] != d[1] || d[2] != d[3] || d[0] > d[2]) {
            return Err(BenchError::Config(format!(
                "kind {} needs chi1 = chi2 <= chi3 = chi4, got {d:?}",
                kind_name(self.kind)
            )));
        }
        if let SpectrumKind::Ansatz { m3_rank } = self.kind {
            if d[2] % d[0] != 0 || d[3] % d[1] != 0 {
                return Err(BenchError::Config(format!("kind ansatz needs chi1 | chi3 and chi2 | chi4, got {d:?}")));
            }
            let max_rank = (d[2] / d[0]).min(d[3] / d[1]);
            if m3_rank.is_some_and(|r| r == 0 || r > max_rank) {
                return Err(BenchError::Config(format!("m3 rank must lie in 1..={max_rank}")));
            }
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<Tensor3, BenchError> {
        Ok(self.kind.generate(self.dims, &mut seeded(seed))?)
    }

    fn describe(&self, report: &mut Report) {
        report.config.insert("kind".into(), kind_name(self.kind).into());
        let Dims { chi1, chi2, chi3, chi4 } = self.dims;
        for (name, v) in [("chi1", chi1), ("chi2", chi2), ("chi3", chi3), ("chi4", chi4)] {
            report.config.insert(name.into(), v.into());
        }
        if let SpectrumKind::Ansatz { m3_rank: Some(r) } = self.kind {
            report.config.insert("m3_rank".into(), r.into());
        }
    }
}

fn entropy_unit(bits: bool) -> impl Fn(f64) -> f64 {
    move |s| if bits { nats_to_bits(s) } else { s }
}

fn seconds(d: Duration, timings: bool) -> Value {
    if timings {
        d.as_secs_f64().into()
    } else {
        f64::NAN.into()
    }
}

#[derive(Debug, Clone)]
pub struct TrialsConfig {
    pub tensor: TensorSpec,
    pub trials: usize,
    pub seed: u64,
    pub descent: DescentConfig,
    /// Also time a descent from a random start down to the fast entropy.
    pub speedup: bool,
    /// Report wall-clock columns; disable for byte-identical output.
    pub timings: bool,
    pub bits: bool,
}

impl TrialsConfig {
    pub fn new(tensor: TensorSpec) -> Self {
        Self { tensor, trials: 100, seed: 1, descent: DescentConfig::default(), speedup: true, timings: true, bits: false }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.tensor.validate()?;
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        self.descent.validate().map_err(|e| BenchError::Config(e.to_string()))
    }
}

/// Everything measured on one tensor.
#[derive(Debug, Clone)]
pub struct Trial {
    pub index: usize,
    pub seed: u64,
    pub s_fast: f64,
    pub s_min: f64,
    pub s_rand: f64,
    /// Cut spectra of `A`, `U_fast·A` and `U_min·A`.
    pub identity: SingularSpectrum,
    pub fast: SingularSpectrum,
    pub min: SingularSpectrum,
    pub t_fast: Duration,
    pub t_min: Duration,
    /// Descent from a random start halted at `S_fast`, if requested.
    pub t_descent: Option<Duration>,
    pub descent_reached: bool,
}

impl Trial {
    pub fn ratio_fast(&self) -> f64 {
        self.s_fast / self.s_min - 1.0
    }

    pub fn ratio_rand(&self) -> f64 {
        self.s_rand / self.s_min - 1.0
    }

    pub fn speedup(&self) -> f64 {
        self.t_descent.map_or(f64::NAN, |t| t.as_secs_f64() / self.t_fast.as_secs_f64())
    }
}

pub fn run_trial(cfg: &TrialsConfig, index: usize) -> Result<Trial, BenchError> {
    let seed = derive_seed(cfg.seed, index as u64);
    let phase = |p| derive_seed(seed, p);
    let Dims { chi1, chi2, .. } = cfg.tensor.dims;
    let a = cfg.tensor.generate(phase(PHASE_GENERATE))?;

    let start = Instant::now();
    let opts = DisentangleOptions { seed: phase(PHASE_FAST), ..DisentangleOptions::default() };
    let (u_fast, s_fast) = disentangle_auto(&a, chi1, chi2, &opts)?;
    let t_fast = start.elapsed();

    let min = estimate_min_entropy(&a, chi1, chi2, &cfg.descent, &mut seeded(phase(PHASE_MIN)))?;
    let u_min = Disentangler::new(chi1, chi2, min.unitary.clone())?;
    let s_rand = random_unitary_entropy(&a, chi1, chi2, &mut seeded(phase(PHASE_RANDOM)))?;

    let (t_descent, descent_reached) = if cfg.speedup {
        let u0 = random_unitary(chi1 * chi2, &mut seeded(phase(PHASE_SPEEDUP)));
        let to_fast = DescentConfig { target: Some(s_fast), ..cfg.descent.clone() };
        let trace = riemannian_descent(&a, chi1, chi2, &u0, &to_fast)?;
        (Some(trace.elapsed), trace.final_entropy() <= s_fast)
    } else {
        (None, false)
    };

    Ok(Trial {
        index,
        seed,
        s_fast,
        s_min: min.entropy,
        s_rand,
        identity: cut_spectrum(&Tensor4::split_first(&a, chi1, chi2)?)?,
        fast: disentangled_spectrum(&u_fast, &a)?,
        min: disentangled_spectrum(&u_min, &a)?,
        t_fast,
        t_min: min.elapsed,
        t_descent,
        descent_reached,
    })
}

pub fn run_trials(cfg: &TrialsConfig) -> Result<Vec<Trial>, BenchError> {
    cfg.validate()?;
    (0..cfg.trials).map(|t| run_trial(cfg, t)).collect()
}

fn trials_config(report: &mut Report, cfg: &TrialsConfig) {
    cfg.tensor.describe(report);
    report.config.insert("trials".into(), cfg.trials.into());
    report.config.insert("seed".into(), cfg.seed.into());
    report.config.insert("restarts".into(), cfg.descent.restarts.into());
    report.config.insert("max_iters".into(), cfg.descent.max_iters.into());
    report.config.insert("unit".into(), if cfg.bits { "bits" } else { "nats" }.into());
}

fn insert_summary(report: &mut Report, name: &str, xs: &[f64]) {
    let s = Summary::of(xs);
    for (suffix, v) in [("mean", s.mean), ("q16", s.q16), ("median", s.median), ("q84", s.q84)] {
        report.summary.insert(format!("{name}_{suffix}"), v.into());
    }
}

pub const TABLE1_COLUMNS: [&str; 17] = [
    "trial",
    "seed",
    "s_fast",
    "s_min",
    "s_rand",
    "ratio_fast",
    "ratio_rand",
    "eps_fast",
    "eps_min",
    "weight_fast",
    "weight_min",
    "t_fast",
    "t_min",
    "t_descent",
    "descent_reached",
    "speedup",
    "chi",
];

/// One row per trial; `eps_*` is `Σ_{i≥χ1} p_i²` and `weight_*` is
/// `Σ_{i≥χ1} p_i` for the fast and minimal-entropy disentanglers.
pub fn table1_report(cfg: &TrialsConfig, trials: &[Trial]) -> Result<Report, BenchError> {
    let mut report = Report::new("table1", &TABLE1_COLUMNS);
    trials_config(&mut report, cfg);
    let unit = entropy_unit(cfg.bits);
    let chi = cfg.tensor.dims.chi1;
    for t in trials {
        report.push(vec![
            t.index.into(),
            t.seed.into(),
            unit(t.s_fast).into(),
            unit(t.s_min).into(),
            unit(t.s_rand).into(),
            t.ratio_fast().into(),
            t.ratio_rand().into(),
            t.fast.truncation_error(chi)?.into(),
            t.min.truncation_error(chi)?.into(),
            t.fast.discarded_weight(chi)?.into(),
            t.min.discarded_weight(chi)?.into(),
            seconds(t.t_fast, cfg.timings),
            seconds(t.t_min, cfg.timings),
            t.t_descent.map_or(f64::NAN.into(), |d| seconds(d, cfg.timings)),
            t.descent_reached.into(),
            if cfg.timings { t.speedup() } else { f64::NAN }.into(),
            chi.into(),
        ]);
    }
    for name in ["ratio_fast", "ratio_rand", "eps_fast", "eps_min", "weight_fast", "weight_min"] {
        let xs = report.floats(name);
        insert_summary(&mut report, name, &xs);
    }
    if cfg.timings {
        for name in ["t_fast", "speedup"] {
            let xs = report.floats(name);
            insert_summary(&mut report, name, &xs);
        }
    }
    Ok(report)
}

pub fn run_table1(cfg: &TrialsConfig) -> Result<Report, BenchError> {
    table1_report(cfg, &run_trials(cfg)?)
}

pub const TRUNC_COLUMNS: [&str; 5] = ["trial", "chi", "eps_fast", "eps_min", "eps_identity"];

/// One row per `(trial, χ)` for `χ = 1..=` the cut rank, with the summary
/// holding median and 16th / 84th quantiles per `χ`.
pub fn trunc_curve_report(cfg: &TrialsConfig, trials: &[Trial]) -> Result<Report, BenchError> {
    let mut report = Report::new("trunc-curve", &TRUNC_COLUMNS);
    trials_config(&mut report, cfg);
    let rank = trials.first().map_or(0, |t| t.fast.len());
    for t in trials {
        for chi in 1..=rank {
            report.push(vec![
                t.index.into(),
                chi.into(),
                t.fast.truncation_error(chi)?.into(),
                t.min.truncation_error(chi)?.into(),
                t.identity.truncation_error(chi)?.into(),
            ]);
        }
    }
    for chi in 1..=rank {
        for (name, spectrum) in [
            ("fast", (|t: &Trial| &t.fast) as fn(&Trial) -> &SingularSpectrum),
            ("min", |t: &Trial| &t.min),
            ("identity", |t: &Trial| &t.identity),
        ] {
            let xs: Vec<f64> =
                trials.iter().map(|t| spectrum(t).truncation_error(chi)).collect::<Result<_, _>>()?;
            let s = Summary::of(&xs);
            for (suffix, v) in [("q16", s.q16), ("median", s.median), ("q84", s.q84)] {
                report.summary.insert(format!("eps_{name}_chi{chi:02}_{suffix}"), v.into());
            }
        }
    }
    Ok(report)
}

pub fn run_trunc_curve(cfg: &TrialsConfig) -> Result<Report, BenchError> {
    let cfg = TrialsConfig { speedup: false, ..cfg.clone() };
    trunc_curve_report(&cfg, &run_trials(&cfg)?)
}

#[derive(Debug, Clone)]
pub struct WaveConfig {
    pub qubits: usize,
    pub layers: usize,
    /// Number of random initial states.
    pub trials: usize,
    pub seed: u64,
    pub method: SweepMethod,
    pub sweep: SweepConfig,
    pub timings: bool,
    pub bits: bool,
}

impl WaveConfig {
    pub fn new(qubits: usize, layers: usize, method: SweepMethod) -> Self {
        Self { qubits, layers, trials: 3, seed: 1, method, sweep: SweepConfig::default(), timings: true, bits: false }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if !(2..=MAX_QUBITS).contains(&self.qubits) {
            return Err(BenchError::Config(format!("qubits must lie in 2..={MAX_QUBITS}")));
        }
        if self.qubits == 2 && self.layers > 1 {
            return Err(BenchError::Config("two qubits admit a single layer only".into()));
        }
        if self.layers == 0 || self.trials == 0 {
            return Err(BenchError::Config("layers and trials must be at least 1".into()));
        }
        if self.sweep.fast.trials == 0 {
            return Err(BenchError::Config("fast attempts must be at least 1".into()));
        }
        self.sweep.descent.validate().map_err(|e| BenchError::Config(e.to_string()))
    }
}

/// Records of one initial state: layer 0 first, then one per layer.
pub fn run_wave_seed(cfg: &WaveConfig, index: usize) -> Result<(u64, Vec<SweepRecord>), BenchError> {
    let seed = derive_seed(cfg.seed, index as u64);
    let psi = random_state(cfg.qubits, &mut seeded(derive_seed(seed, PHASE_GENERATE)))?;
    let mut records = vec![initial_record(&psi, cfg.method)?];
    let (_, layers) = disentangle_state(&psi, cfg.layers, cfg.method, &cfg.sweep, &mut seeded(derive_seed(seed, PHASE_FAST)))?;
    records.extend(layers);
    Ok((seed, records))
}

pub fn wave_columns(qubits: usize) -> Vec<String> {
    let mut cols: Vec<String> =
        ["trial", "seed", "method", "layer", "residual", "cumulative_gates", "elapsed"].map(String::from).to_vec();
    cols.extend((1..qubits).map(|c| format!("cut_{c}")));
    cols
}

pub fn run_wave(cfg: &WaveConfig) -> Result<Report, BenchError> {
    cfg.validate()?;
    let columns = wave_columns(cfg.qubits);
    let mut report = Report::new("wave", &columns.iter().map(String::as_str).collect::<Vec<_>>());
    report.config.insert("qubits".into(), cfg.qubits.into());
    report.config.insert("layers".into(), cfg.layers.into());
    report.config.insert("trials".into(), cfg.trials.into());
    report.config.insert("seed".into(), cfg.seed.into());
    report.config.insert("method".into(), cfg.method.as_str().into());
    report.config.insert("descent_max_iters".into(), cfg.sweep.descent.max_iters.into());
    report.config.insert("fast_trials".into(), cfg.sweep.fast.trials.into());
    report.config.insert("unit".into(), if cfg.bits { "bits" } else { "nats" }.into());
    let unit = entropy_unit(cfg.bits);

    let mut finals = Vec::new();
    for index in 0..cfg.trials {
        let (seed, records) = run_wave_seed(cfg, index)?;
        for r in &records {
            let mut row: Vec<Value> = vec![
                index.into(),
                seed.into(),
                cfg.method.as_str().into(),
                r.layer.into(),
                unit(r.residual).into(),
                r.cumulative_gates.into(),
                seconds(r.elapsed, cfg.timings),
            ];
            row.extend(r.entropies.iter().map(|&s| Value::from(unit(s))));
            report.push(row);
        }
        let last = records.last().expect("at least the initial record");
        finals.push(unit(last.residual));
        report.summary.insert("cumulative_gates".into(), last.cumulative_gates.into());
    }
    insert_summary(&mut report, "final_residual", &finals);
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SingleConfig {
    pub tensor: TensorSpec,
    pub seed: u64,
    /// Best-of attempts of the fast algorithm.
    pub attempts: usize,
    pub bits: bool,
}

pub const SINGLE_COLUMNS: [&str; 3] = ["index", "input_value", "output_value"];

/// Cut spectra of `A` and `U·A` side by side, with entropies, the zero count
/// and the unitarity error in the summary. Contains no timings.
pub fn run_single(cfg: &SingleConfig) -> Result<Report, BenchError> {
    cfg.tensor.validate()?;
    if cfg.attempts == 0 {
        return Err(BenchError::Config("trials must be at least 1".into()));
    }
    let d = cfg.tensor.dims;
    let a = cfg.tensor.generate(derive_seed(cfg.seed, PHASE_GENERATE))?;
    let opts = DisentangleOptions { trials: cfg.attempts, seed: derive_seed(cfg.seed, PHASE_FAST), ..DisentangleOptions::default() };
    let (u, _) = disentangle_auto(&a, d.chi1, d.chi2, &opts)?;
    let before = cut_spectrum(&Tensor4::split_first(&a, d.chi1, d.chi2)?)?;
    let after = disentangled_spectrum(&u, &a)?;

    let mut report = Report::new("run", &SINGLE_COLUMNS);
    cfg.tensor.describe(&mut report);
    report.config.insert("seed".into(), cfg.seed.into());
    report.config.insert("trials".into(), cfg.attempts.into());
    report.config.insert("unit".into(), if cfg.bits { "bits" } else { "nats" }.into());
    for (i, (x, y)) in before.values().iter().zip(after.values()).enumerate() {
        report.push(vec![i.into(), (*x).into(), (*y).into()]);
    }
    let unit = entropy_unit(cfg.bits);
    let regime = d.regime()?;
    report.summary.insert("regime".into(), regime_name(regime).into());
    report.summary.insert("entropy_before".into(), unit(before.von_neumann_entropy()).into());
    report.summary.insert("entropy_after".into(), unit(after.von_neumann_entropy()).into());
    report.summary.insert("zero_count_before".into(), before.zero_count(ZERO_REL).into());
    report.summary.insert("zero_count".into(), after.zero_count(ZERO_REL).into());
    if regime == Regime::Base {
        report.summary.insert("zero_count_bound".into(), zero_singular_lower_bound(d).into());
    }
    report.summary.insert("unitarity_error".into(), u.unitarity_error().into());
    Ok(report)
}
