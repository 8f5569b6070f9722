use nalgebra::DMatrix;
use rand::Rng;
use tensor_disentangle::descent::{
    entropy_and_gradient, estimate_min_entropy, riemannian_descent, DescentConfig, EntropyObjective,
};
use tensor_disentangle::entanglement::disentangled_entropy;
use tensor_disentangle::generators::{gaussian_tensor, random_ansatz};
use tensor_disentangle::linalg::{random_unitary, CMat};
use tensor_disentangle::rng::{complex_gaussian, derive_seed, seeded};
use tensor_disentangle::{disentangle::disentangle_once, Dims};

fn real_inner(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

fn riemannian_norm(u: &CMat, g: &CMat) -> f64 {
    let x = u.adjoint() * g;
    let r = u * (&x - x.adjoint()).scale(0.5);
    real_inner(&r, &r).sqrt()
}

#[test]
fn gradient_matches_finite_differences_on_small_instances() {
    let mut rng = seeded(1);
    for _ in 0..50 {
        let d = Dims::new(rng.random_range(1..=4), rng.random_range(1..=4), rng.random_range(1..=4), rng.random_range(1..=4))
            .unwrap();
        let a = gaussian_tensor(d, &mut rng);
        let n = d.chi1 * d.chi2;
        let u = random_unitary(n, &mut rng);
        let obj = EntropyObjective::new(&a, d.chi1, d.chi2).unwrap();
        let (_, g) = obj.entropy_and_gradient(&u).unwrap();
        let h = 1e-5;
        for _ in 0..5 {
            let dir = DMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng));
            let fd = (obj.entropy(&(&u + dir.scale(h))).unwrap() - obj.entropy(&(&u - dir.scale(h))).unwrap()) / (2.0 * h);
            let an = real_inner(&g, &dir);
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(fd.abs()).max(1e-3), "{:?}: {fd} vs {an}", d);
        }
    }
}

#[test]
fn ansatz_minimum_is_stationary() {
    let mut rng = seeded(2);
    for _ in 0..5 {
        let d = Dims::new(2, 2, 4, 4).unwrap();
        let a = random_ansatz(d, None, &mut rng).unwrap();
        let u = disentangle_once(&a, 2, 2, false, &mut rng).unwrap();
        let (s, g) = entropy_and_gradient(u.matrix(), &a, 2, 2).unwrap();
        assert!(riemannian_norm(u.matrix(), &g) <= 1e-6);
        let trace = riemannian_descent(&a, 2, 2, u.matrix(), &DescentConfig::default()).unwrap();
        assert!(trace.iterations() <= 2, "{:?}", trace.halt);
        assert!((trace.final_entropy() - s).abs() <= 1e-10);
    }
}

#[test]
fn minimum_estimate_is_a_lower_envelope() {
    let d = Dims::new(2, 2, 2, 2).unwrap();
    let cfg = DescentConfig::default();
    let mut below = 0;
    for t in 0..200 {
        let mut rng = seeded(derive_seed(3, t));
        let a = gaussian_tensor(d, &mut rng);
        let fast = disentangle_once(&a, 2, 2, false, &mut rng).unwrap();
        let s_fast = disentangled_entropy(&fast, &a).unwrap();
        let m = estimate_min_entropy(&a, 2, 2, &cfg, &mut rng).unwrap();
        assert_eq!(m.restarts.len(), 8);
        if m.entropy <= s_fast {
            below += 1;
        }
    }
    assert!(below >= 190, "{below} of 200");
}
