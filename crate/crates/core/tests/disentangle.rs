use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use tensor_disentangle::disentangle::{
    disentangle_once, fast_disentangle_with, fold_tensor, trial_seed, Regime, StepOrdering,
};
use tensor_disentangle::entanglement::{disentangled_entropy, disentangled_spectrum};
use tensor_disentangle::generators::{ansatz_tensor, gaussian_tensor};
use tensor_disentangle::linalg::{random_unitary, singular_values, CMat};
use tensor_disentangle::rng::{complex_gaussian, derive_seed, seeded};
use tensor_disentangle::{
    disentangle_auto, extended_disentangle, zero_singular_lower_bound, Dims, DisentangleOptions, Error, Tensor3,
};

fn dims(a: usize, b: usize, c: usize, d: usize) -> Dims {
    Dims::new(a, b, c, d).unwrap()
}

fn gaussian_matrix<R: Rng>(r: usize, c: usize, rng: &mut R) -> CMat {
    DMatrix::from_fn(r, c, |_, _| complex_gaussian(rng))
}

fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Entropy of the normalized squared values.
fn entropy_of(values: &[f64]) -> f64 {
    let total: f64 = values.iter().map(|v| v * v).sum();
    values
        .iter()
        .map(|v| v * v / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

#[test]
fn unitary_in_every_regime() {
    let mut rng = seeded(1);
    let mut seen = [0usize; 3];
    let mut tried = 0;
    while seen.iter().sum::<usize>() < 150 {
        tried += 1;
        assert!(tried < 10_000);
        let d = dims(rng.random_range(1..=4), rng.random_range(1..=4), rng.random_range(1..=6), rng.random_range(1..=6));
        let Ok(regime) = d.regime() else { continue };
        let a = gaussian_tensor(d, &mut rng);
        let u = disentangle_once(&a, d.chi1, d.chi2, false, &mut rng).unwrap();
        assert!(u.unitarity_error() <= 1e-10, "{:?}", d);
        seen[regime as usize] += 1;
    }
    assert!(seen.iter().all(|&s| s > 0), "{seen:?}");
}

#[test]
fn zero_singular_values_meet_the_bound() {
    let mut rng = seeded(2);
    for d in [dims(2, 2, 2, 2), dims(4, 4, 4, 4), dims(2, 3, 3, 3), dims(3, 3, 3, 4)] {
        let bound = zero_singular_lower_bound(d);
        for _ in 0..20 {
            let a = gaussian_tensor(d, &mut rng);
            let u = disentangle_once(&a, d.chi1, d.chi2, false, &mut rng).unwrap();
            let zeros = disentangled_spectrum(&u, &a).unwrap().zero_count(1e-10);
            assert!(zeros >= bound, "{:?}: {zeros} < {bound}", d);
        }
    }
    assert_eq!(zero_singular_lower_bound(dims(2, 3, 3, 3)), 1);
}

#[test]
fn triangular_after_step_six() {
    let mut rng = seeded(3);
    for (d, ordering) in [
        (dims(2, 3, 3, 4), StepOrdering::RowMajor),
        (dims(3, 2, 4, 3), StepOrdering::ColumnMajor),
        (dims(3, 3, 3, 3), StepOrdering::ColumnMajor),
    ] {
        let a = gaussian_tensor(d, &mut rng);
        let run = fast_disentangle_with(&a, d.chi1, d.chi2, ordering, &mut rng).unwrap();
        let ub = run.disentangler.matrix() * &run.b;
        let tol = 1e-10 * frob(&run.b);
        let key = |r: usize| ordering.key(d.chi1, d.chi2, r / d.chi2, r % d.chi2);
        for r in 0..ub.nrows() {
            for c in 0..ub.ncols() {
                if key(r) > key(c) {
                    assert!(ub[(r, c)].norm() <= tol, "{:?} ({r},{c}) = {}", d, ub[(r, c)]);
                }
            }
        }
    }
}

/// Condition number of a square matrix from its singular values.
fn condition(m: &CMat) -> f64 {
    let s = singular_values(m).unwrap();
    s[0] / s[s.len() - 1]
}

#[test]
fn ansatz_spectrum_is_recovered() {
    let mut rng = seeded(4);
    let shapes = [(2, 2, 2, 2), (2, 2, 4, 4), (1, 2, 3, 4), (2, 1, 4, 3), (3, 3, 3, 3), (1, 1, 4, 4), (2, 2, 4, 2)];
    let mut checked = 0;
    for t in 0..100 {
        let (c1, c2, r3, c3) = shapes[t % shapes.len()];
        let m1 = gaussian_matrix(c1, c1, &mut rng);
        let m2 = gaussian_matrix(c2, c2, &mut rng);
        let m3 = gaussian_matrix(r3 / c1.min(r3), c3 / c2.min(c3), &mut rng);
        if condition(&m1) > 1e4 || condition(&m2) > 1e4 {
            continue;
        }
        checked += 1;
        let a = ansatz_tensor(&m1, &m2, &m3).unwrap();
        let [_, ac, bc] = a.dims();
        let u = disentangle_once(&a, c1, c2, false, &mut rng).unwrap();
        let got = disentangled_spectrum(&u, &a).unwrap();
        let scale = frob(&m1) * frob(&m2);
        let want = singular_values(&m3).unwrap();
        assert_eq!(got.len(), (c1 * ac).min(c2 * bc));
        for (i, v) in got.values().iter().enumerate() {
            let w = want.get(i).map_or(0.0, |s| s * scale);
            assert!((v - w).abs() <= 1e-7 * got.values()[0], "trial {t}: value {i} {v} vs {w}");
        }
        let s = disentangled_entropy(&u, &a).unwrap();
        assert!((s - entropy_of(&want)).abs() <= 1e-7, "trial {t}");
    }
    assert!(checked >= 98);
}

#[test]
fn extension_bookkeeping() {
    let d = dims(4, 2, 2, 8);
    assert_eq!(d.regime().unwrap(), Regime::Extended);
    assert_eq!(d.extension(), (2, 4));
    let mut rng = seeded(5);
    let a = gaussian_tensor(d, &mut rng);
    assert_eq!(fold_tensor(&a, d).unwrap().dims(), [8, 4, 4]);
    let u = extended_disentangle(&a, 4, 2, &mut rng).unwrap();
    assert_eq!((u.chi1(), u.chi2(), u.matrix().ncols()), (4, 2, 8));
    assert!(u.unitarity_error() < 1e-10);

    let bad = dims(4, 3, 3, 4);
    assert_eq!(bad.extension(), (2, 2));
    let a = gaussian_tensor(bad, &mut rng);
    assert_eq!(extended_disentangle(&a, 4, 3, &mut rng), Err(Error::Regime([4, 3, 3, 4])));
    assert!(disentangle_auto(&a, 4, 3, &DisentangleOptions::default()).is_err());
}

#[test]
fn chain_edge_routes_to_the_extension() {
    let d = dims(2, 2, 1, 256);
    assert_eq!(d.regime().unwrap(), Regime::Extended);
    assert_eq!(dims(2, 2, 256, 1).regime().unwrap(), Regime::SwappedExtended);
    let a = gaussian_tensor(d, &mut seeded(6));
    let (u, s) = disentangle_auto(&a, 2, 2, &DisentangleOptions::default()).unwrap();
    assert!(u.unitarity_error() < 1e-10);
    assert!((disentangled_entropy(&u, &a).unwrap() - s).abs() < 1e-14);
    let (v, _) = disentangle_auto(&a.transpose_last(), 2, 2, &DisentangleOptions::default()).unwrap();
    assert!(v.unitarity_error() < 1e-10);
}

#[test]
fn extension_on_thin_ansatz() {
    // M1 is 4×2 so χ1 > χ3, and M3 is 1×4: the ideal residual entropy is 0
    let mut rng = seeded(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m1 = gaussian_matrix(4, 2, &mut rng);
        let m2 = gaussian_matrix(2, 2, &mut rng);
        let m3 = gaussian_matrix(1, 4, &mut rng);
        let a = ansatz_tensor(&m1, &m2, &m3).unwrap();
        assert_eq!(a.dims(), [8, 2, 8]);
        let u = extended_disentangle(&a, 4, 2, &mut rng).unwrap();
        worst = worst.max(disentangled_entropy(&u, &a).unwrap());
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn best_of_replays_from_trial_seeds() {
    let d = dims(2, 2, 2, 2);
    let a = gaussian_tensor(d, &mut seeded(8));
    let opts = DisentangleOptions { trials: 8, try_both_orderings: false, seed: 99 };
    let (u, s) = disentangle_auto(&a, 2, 2, &opts).unwrap();
    let singles: Vec<f64> = (0..8)
        .map(|t| {
            let once = disentangle_once(&a, 2, 2, false, &mut seeded(trial_seed(99, t))).unwrap();
            disentangled_entropy(&once, &a).unwrap()
        })
        .collect();
    let best = singles.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(s, best);
    assert_eq!(disentangled_entropy(&u, &a).unwrap(), best);

    let one = DisentangleOptions { trials: 1, ..opts };
    let (_, s1) = disentangle_auto(&a, 2, 2, &one).unwrap();
    assert_eq!(s1, singles[0]);
    assert!(disentangle_auto(&a, 2, 2, &DisentangleOptions { trials: 0, ..opts }).is_err());
}

#[test]
fn rejects_zero_tensor() {
    let a = Tensor3::new([4, 2, 2], vec![Complex64::new(0.0, 0.0); 16]).unwrap();
    assert_eq!(disentangle_once(&a, 2, 2, false, &mut seeded(9)).unwrap_err(), Error::ZeroInput);
}

fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Applies `w` to leg `leg` of `a`.
fn rotate_leg(a: &Tensor3, leg: usize, w: &CMat) -> Tensor3 {
    let [n, c3, c4] = a.dims();
    Tensor3::from_fn([n, c3, c4], |k, x, y| match leg {
        0 => (0..n).map(|q| w[(k, q)] * a.get(q, x, y)).sum(),
        1 => (0..c3).map(|q| w[(x, q)] * a.get(k, q, y)).sum(),
        _ => (0..c4).map(|q| w[(y, q)] * a.get(k, x, q)).sum(),
    })
    .unwrap()
}

#[test]
fn entropy_distribution_is_leg_invariant() {
    let d = dims(2, 2, 2, 2);
    let a = gaussian_tensor(d, &mut seeded(10));
    let sample = |t: &Tensor3, root: u64| -> Vec<f64> {
        (0..500)
            .map(|i| {
                let u = disentangle_once(t, 2, 2, false, &mut seeded(derive_seed(root, i))).unwrap();
                disentangled_entropy(&u, t).unwrap()
            })
            .collect()
    };
    let (m0, se0) = mean_and_se(&sample(&a, 11));
    for leg in 0..3 {
        let size = a.dims()[leg];
        let w = random_unitary(size, &mut seeded(20 + leg as u64));
        let (m, se) = mean_and_se(&sample(&rotate_leg(&a, leg, &w), 12 + leg as u64));
        let tol = 3.0 * (se0 * se0 + se * se).sqrt();
        assert!((m - m0).abs() <= tol.max(1e-12), "leg {leg}: {m} vs {m0} (±{tol})");
    }
}
