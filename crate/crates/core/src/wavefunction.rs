//! Disentangling a random qubit chain with alternating layers of two-qubit
//! gates.
//!
//! Qubits are numbered `1..=n` and stored big-endian: qubit 1 is the most
//! significant bit of the amplitude index. Bond `i` joins qubits `i` and
//! `i + 1`, and cut `c` separates qubits `1..=c` from the rest.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::descent::{riemannian_descent, DescentConfig};
use crate::disentangle::{disentangle_auto, Dims, DisentangleOptions, Disentangler};
use crate::entanglement::SingularSpectrum;
use crate::error::{Error, Result};
use crate::linalg::{random_unitary, singular_values, CMat, C64};
use crate::tensor::Tensor3;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    n: usize,
    amps: Vec<C64>,
}

impl QubitState {
    /// Wraps `2^n` amplitudes; they must be finite with unit norm.
    pub fn new(n: usize, amps: Vec<C64>) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize || amps.len() != 1 << n {
            return Err(Error::Shape(format!("{} amplitudes for {n} qubits", amps.len())));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let state = Self { n, amps };
        if (state.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::Parameter(format!("state norm {} is not 1", state.norm())));
        }
        Ok(state)
    }

    /// Rescales arbitrary non-zero amplitudes to a unit vector.
    pub fn normalized(n: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm == 0.0 {
            return Err(Error::ZeroInput);
        }
        amps.iter_mut().for_each(|z| *z /= norm);
        Self::new(n, amps)
    }

    /// `|b_1 b_2 … b_n⟩` for the given bits, qubit 1 first.
    pub fn basis(bits: &[bool]) -> Result<Self> {
        let n = bits.len();
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut amps = vec![C64::new(0.0, 0.0); 1usize.checked_shl(n as u32).unwrap_or(0)];
        if amps.is_empty() {
            return Err(Error::Shape("empty qubit chain".into()));
        }
        amps[index] = C64::new(1.0, 0.0);
        Self::new(n, amps)
    }

    /// Tensor product of single-qubit states, qubit 1 first.
    pub fn product(sites: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for site in sites {
            amps = amps.iter().flat_map(|&z| [z * site[0], z * site[1]]).collect();
        }
        Self::normalized(sites.len(), amps)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_bond(&self, i: usize) -> Result<()> {
        if i == 0 || i >= self.n {
            return Err(Error::Parameter(format!("bond {i} out of range 1..={}", self.n - 1)));
        }
        Ok(())
    }

    /// Von Neumann entropy (nats) across cut `c`, `1 ≤ c ≤ n − 1`.
    pub fn cut_entropy(&self, c: usize) -> Result<f64> {
        self.check_bond(c)?;
        let cols = 1usize << (self.n - c);
        let m = CMat::from_fn(1 << c, cols, |r, col| self.amps[r * cols + col]);
        Ok(SingularSpectrum::new(singular_values(&m)?)?.von_neumann_entropy())
    }

    /// Entropies across every cut `1..=n−1`.
    pub fn cut_entropies(&self) -> Result<Vec<f64>> {
        (1..self.n).map(|c| self.cut_entropy(c)).collect()
    }
}

/// Amplitude offset of `(a, k, b)` at bond `i`: `a·2^{n−i+1} + k·2^{n−i−1} + b`.
fn pair_index(n: usize, i: usize, k: usize, a: usize, b: usize) -> usize {
    (a << (n - i + 1)) + (k << (n - i - 1)) + b
}

/// `ψ` viewed as `A_{(k_i k_{i+1}), (left), (right)}` with dims
/// `4 × 2^{i−1} × 2^{n−i−1}`.
pub fn pair_tensor(psi: &QubitState, i: usize) -> Result<Tensor3> {
    psi.check_bond(i)?;
    let n = psi.n;
    Tensor3::from_fn([4, 1 << (i - 1), 1 << (n - i - 1)], |k, a, b| psi.amps[pair_index(n, i, k, a, b)])
}

/// Inverse of [`pair_tensor`].
pub fn state_from_pair_tensor(t: &Tensor3, i: usize) -> Result<QubitState> {
    let [k, a, b] = t.dims();
    if k != 4 || !a.is_power_of_two() || !b.is_power_of_two() || a.trailing_zeros() as usize + 1 != i {
        return Err(Error::Shape(format!("tensor {:?} is not a pair tensor for bond {i}", t.dims())));
    }
    let n = i + 1 + b.trailing_zeros() as usize;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    for kk in 0..4 {
        for aa in 0..a {
            for bb in 0..b {
                amps[pair_index(n, i, kk, aa, bb)] = t.get(kk, aa, bb);
            }
        }
    }
    QubitState::new(n, amps)
}

/// Applies `U_{(k'_i k'_{i+1}), (k_i k_{i+1})}` to qubits `i` and `i + 1`.
pub fn apply_gate(psi: &QubitState, i: usize, u: &Disentangler) -> Result<QubitState> {
    psi.check_bond(i)?;
    if u.chi1() != 2 || u.chi2() != 2 {
        return Err(Error::Shape(format!("two-qubit gate needs χ1 = χ2 = 2, got {}, {}", u.chi1(), u.chi2())));
    }
    let n = psi.n;
    let m = u.matrix();
    let mut out = psi.amps.clone();
    for a in 0..1usize << (i - 1) {
        for b in 0..1usize << (n - i - 1) {
            let old: [C64; 4] = std::array::from_fn(|k| psi.amps[pair_index(n, i, k, a, b)]);
            for row in 0..4 {
                out[pair_index(n, i, row, a, b)] = (0..4).map(|k| m[(row, k)] * old[k]).sum();
            }
        }
    }
    Ok(QubitState { n, amps: out })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    /// Bonds of this parity in ascending order.
    pub fn bonds(self, n: usize) -> Vec<usize> {
        let first = match self {
            Parity::Odd => 1,
            Parity::Even => 2,
        };
        (first..n).step_by(2).collect()
    }

    /// Layers alternate starting with odd; `layer` is 1-based.
    pub fn of_layer(layer: usize) -> Self {
        if layer % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepMethod {
    Fast,
    Descent,
    FastThenDescent,
}

impl SweepMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMethod::Fast => "fast",
            SweepMethod::Descent => "descent",
            SweepMethod::FastThenDescent => "fast-then-descent",
        }
    }
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(SweepMethod::Fast),
            "descent" => Ok(SweepMethod::Descent),
            "fast-then-descent" => Ok(SweepMethod::FastThenDescent),
            _ => Err(Error::Parameter(format!("unknown sweep method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRecord {
    /// 1-based layer index; 0 marks the untouched initial state.
    pub layer: usize,
    pub parity: Option<Parity>,
    pub entropies: Vec<f64>,
    pub residual: f64,
    /// Bond index and gate for every gate of this layer.
    pub gates: Vec<(usize, Disentangler)>,
    pub cumulative_gates: usize,
    /// Cumulative descent objective evaluations; zero for the fast method.
    pub descent_evaluations: usize,
    pub method: SweepMethod,
    /// Time spent in sweeps so far, excluding entropy bookkeeping.
    pub elapsed: Duration,
}

fn max_entropy(entropies: &[f64]) -> f64 {
    entropies.iter().copied().fold(0.0, f64::max)
}

/// Record of the state before any layer.
pub fn initial_record(psi: &QubitState, method: SweepMethod) -> Result<SweepRecord> {
    let entropies = psi.cut_entropies()?;
    Ok(SweepRecord {
        layer: 0,
        parity: None,
        residual: max_entropy(&entropies),
        entropies,
        gates: Vec::new(),
        cumulative_gates: 0,
        descent_evaluations: 0,
        method,
        elapsed: Duration::ZERO,
    })
}

/// Per-gate settings of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Descent budget for the descent-based methods.
    pub descent: DescentConfig,
    /// Attempts and orderings of the fast method; the seed is drawn per gate.
    pub fast: DisentangleOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { descent: DescentConfig::for_sweeps(), fast: DisentangleOptions::default() }
    }
}

/// Pads the environment legs with zeros up to the bond dimension 2 when no
/// regime of the fast algorithm fits, as happens at the ends of a 3-qubit
/// chain. Zero padding leaves every cut spectrum unchanged.
fn fit_regime(a: &Tensor3) -> Result<Tensor3> {
    let [k, left, right] = a.dims();
    if Dims::of(a, 2, 2)?.regime().is_ok() {
        return Ok(a.clone());
    }
    let zero = C64::new(0.0, 0.0);
    Tensor3::from_fn([k, left.max(2), right.max(2)], |kk, aa, bb| {
        if aa < left && bb < right {
            a.get(kk, aa, bb)
        } else {
            zero
        }
    })
}

fn choose_gate<R: Rng + ?Sized>(
    a: &Tensor3,
    method: SweepMethod,
    cfg: &SweepConfig,
    rng: &mut R,
) -> Result<(Disentangler, usize)> {
    let fast = |rng: &mut R| {
        let opts = DisentangleOptions { seed: rng.random(), ..cfg.fast };
        disentangle_auto(&fit_regime(a)?, 2, 2, &opts).map(|(u, _)| u)
    };
    let u0 = match method {
        SweepMethod::Fast => return Ok((fast(rng)?, 0)),
        SweepMethod::Descent => random_unitary(4, rng),
        SweepMethod::FastThenDescent => fast(rng)?.into_matrix(),
    };
    let trace = riemannian_descent(a, 2, 2, &u0, &cfg.descent)?;
    Ok((Disentangler::new(2, 2, trace.unitary)?, trace.evaluations))
}

/// One layer over the bonds of `parity`, each gate applied before the next
/// bond is processed. `record.layer` and the cumulative fields are left for
/// the caller; see [`disentangle_state`].
pub fn sweep_layer<R: Rng + ?Sized>(
    psi: &QubitState,
    parity: Parity,
    method: SweepMethod,
    cfg: &SweepConfig,
    rng: &mut R,
) -> Result<(QubitState, SweepRecord)> {
    if parity == Parity::Even && psi.n < 3 {
        return Err(Error::Parameter("even sweeps need at least 3 qubits".into()));
    }
    let start = Instant::now();
    let mut state = psi.clone();
    let mut gates = Vec::new();
    let mut evaluations = 0;
    for i in parity.bonds(psi.n) {
        let (u, n) = choose_gate(&pair_tensor(&state, i)?, method, cfg, rng)?;
        evaluations += n;
        state = apply_gate(&state, i, &u)?;
        gates.push((i, u));
    }
    let elapsed = start.elapsed();
    let entropies = state.cut_entropies()?;
    let record = SweepRecord {
        layer: 1,
        parity: Some(parity),
        residual: max_entropy(&entropies),
        entropies,
        cumulative_gates: gates.len(),
        descent_evaluations: evaluations,
        gates,
        method,
        elapsed,
    };
    Ok((state, record))
}

/// Runs `layers` alternating sweeps (odd first) and returns one record per
/// layer together with the final state.
pub fn disentangle_state<R: Rng + ?Sized>(
    psi0: &QubitState,
    layers: usize,
    method: SweepMethod,
    cfg: &SweepConfig,
    rng: &mut R,
) -> Result<(QubitState, Vec<SweepRecord>)> {
    if layers == 0 {
        return Err(Error::Parameter("layers must be at least 1".into()));
    }
    if cfg.fast.trials == 0 {
        return Err(Error::Parameter("fast trials must be at least 1".into()));
    }
    cfg.descent.validate()?;
    let mut state = psi0.clone();
    let mut records: Vec<SweepRecord> = Vec::with_capacity(layers);
    for layer in 1..=layers {
        let (next, mut rec) = sweep_layer(&state, Parity::of_layer(layer), method, cfg, rng)?;
        if let Some(prev) = records.last() {
            rec.cumulative_gates += prev.cumulative_gates;
            rec.descent_evaluations += prev.descent_evaluations;
            rec.elapsed += prev.elapsed;
        }
        rec.layer = layer;
        records.push(rec);
        state = next;
    }
    Ok((state, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_state;
    use crate::rng::seeded;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn construction_checks() {
        assert!(QubitState::new(2, vec![c(1.0); 3]).is_err());
        assert!(QubitState::new(1, vec![c(1.0), c(1.0)]).is_err());
        assert!(QubitState::new(1, vec![c(1.0), c(0.0)]).is_ok());
        assert_eq!(QubitState::normalized(1, vec![c(0.0); 2]), Err(Error::ZeroInput));
        assert_eq!(QubitState::normalized(1, vec![c(f64::NAN), c(1.0)]), Err(Error::NonFinite));
        let s = QubitState::basis(&[false, true, true]).unwrap();
        assert_eq!(s.amplitudes()[3], c(1.0));
    }

    #[test]
    fn pair_tensor_shapes_and_round_trip() {
        let psi = random_state(10, &mut seeded(1)).unwrap();
        assert_eq!(pair_tensor(&psi, 1).unwrap().dims(), [4, 1, 256]);
        assert_eq!(pair_tensor(&psi, 5).unwrap().dims(), [4, 16, 16]);
        assert_eq!(pair_tensor(&psi, 9).unwrap().dims(), [4, 256, 1]);
        for i in 1..10 {
            assert_eq!(state_from_pair_tensor(&pair_tensor(&psi, i).unwrap(), i).unwrap(), psi);
        }
        let two = random_state(2, &mut seeded(2)).unwrap();
        assert_eq!(pair_tensor(&two, 1).unwrap().dims(), [4, 1, 1]);
        assert!(pair_tensor(&psi, 0).is_err());
        assert!(pair_tensor(&psi, 10).is_err());
    }

    #[test]
    fn pair_tensor_groups_the_bond_qubits() {
        // |q1 q2 q3⟩ = |1 0 1⟩ at bond 2: k = (q2, q3) = 01, a = q1 = 1
        let psi = QubitState::basis(&[true, false, true]).unwrap();
        let t = pair_tensor(&psi, 2).unwrap();
        assert_eq!(t.get(1, 1, 0), c(1.0));
    }

    #[test]
    fn identity_and_swap_gates() {
        let psi = random_state(4, &mut seeded(3)).unwrap();
        assert_eq!(apply_gate(&psi, 2, &Disentangler::identity(2, 2)).unwrap(), psi);

        let swap = CMat::from_fn(4, 4, |r, k| if r == [0, 2, 1, 3][k] { c(1.0) } else { c(0.0) });
        let swap = Disentangler::new(2, 2, swap).unwrap();
        let out = apply_gate(&QubitState::basis(&[false, true]).unwrap(), 1, &swap).unwrap();
        assert_eq!(out, QubitState::basis(&[true, false]).unwrap());
        assert!(apply_gate(&psi, 2, &Disentangler::identity(2, 4)).is_err());
    }

    #[test]
    fn gates_are_local_and_norm_preserving() {
        let mut rng = seeded(4);
        let mut psi = random_state(4, &mut rng).unwrap();
        let before = psi.cut_entropies().unwrap();
        let u = Disentangler::new(2, 2, random_unitary(4, &mut rng)).unwrap();
        let after = apply_gate(&psi, 1, &u).unwrap();
        assert!((after.cut_entropy(3).unwrap() - before[2]).abs() < 1e-10);
        assert!((after.cut_entropy(2).unwrap() - before[1]).abs() < 1e-10);

        let n = 6;
        psi = random_state(n, &mut rng).unwrap();
        for g in 0..5000 {
            let u = Disentangler::new(2, 2, random_unitary(4, &mut rng)).unwrap();
            psi = apply_gate(&psi, 1 + g % (n - 1), &u).unwrap();
        }
        assert!((psi.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bond_parities() {
        assert_eq!(Parity::Odd.bonds(10), vec![1, 3, 5, 7, 9]);
        assert_eq!(Parity::Even.bonds(10), vec![2, 4, 6, 8]);
        assert_eq!(Parity::Odd.bonds(3), vec![1]);
        assert_eq!(Parity::Even.bonds(3), vec![2]);
        assert_eq!(Parity::of_layer(1), Parity::Odd);
        assert_eq!(Parity::of_layer(2), Parity::Even);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [SweepMethod::Fast, SweepMethod::Descent, SweepMethod::FastThenDescent] {
            assert_eq!(m.as_str().parse::<SweepMethod>().unwrap(), m);
        }
        assert!("newton".parse::<SweepMethod>().is_err());
    }

    #[test]
    fn record_bookkeeping() {
        let mut rng = seeded(5);
        let psi = random_state(10, &mut rng).unwrap();
        let cfg = SweepConfig::default();
        let (_, recs) = disentangle_state(&psi, 4, SweepMethod::Fast, &cfg, &mut rng).unwrap();
        let counts: Vec<usize> = recs.iter().map(|r| r.cumulative_gates).collect();
        assert_eq!(counts, vec![5, 9, 14, 18]);
        for r in &recs {
            assert_eq!(r.entropies.len(), 9);
            assert_eq!(r.residual, r.entropies.iter().copied().fold(0.0, f64::max));
        }
        assert!(recs.windows(2).all(|w| w[1].elapsed >= w[0].elapsed));
        assert!(recs.iter().all(|r| r.descent_evaluations == 0));
        let (_, slow) = disentangle_state(&psi, 2, SweepMethod::Descent, &cfg, &mut rng).unwrap();
        assert!(slow[0].descent_evaluations >= 5 && slow[1].descent_evaluations > slow[0].descent_evaluations);
        let (_, one) = disentangle_state(&psi, 1, SweepMethod::Fast, &cfg, &mut rng).unwrap();
        assert_eq!(one.len(), 1);
        assert!(disentangle_state(&psi, 0, SweepMethod::Fast, &cfg, &mut rng).is_err());
    }

    #[test]
    fn even_sweep_needs_three_qubits() {
        let psi = random_state(2, &mut seeded(6)).unwrap();
        let cfg = SweepConfig::default();
        assert!(sweep_layer(&psi, Parity::Even, SweepMethod::Fast, &cfg, &mut seeded(7)).is_err());
    }

    #[test]
    fn product_state_stays_unentangled() {
        let mut rng = seeded(8);
        let sites: Vec<[C64; 2]> = (0..6)
            .map(|_| [crate::rng::complex_gaussian(&mut rng), crate::rng::complex_gaussian(&mut rng)])
            .collect();
        let psi = QubitState::product(&sites).unwrap();
        assert!(psi.cut_entropies().unwrap().iter().all(|&s| s <= 1e-10));
        let (_, recs) = disentangle_state(&psi, 4, SweepMethod::Fast, &SweepConfig::default(), &mut rng).unwrap();
        assert!(recs.iter().all(|r| r.residual <= 1e-10), "{:?}", recs.iter().map(|r| r.residual).collect::<Vec<_>>());
    }
}
