use ivr_core::gaussian::{overlap, GaussianState};
use ivr_core::quadrature::GaussLegendre;
use ivr_core::{Complex64, GaussianState64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn adaptive<F: Fn(f64) -> Complex64>(rule: &GaussLegendre<f64>, f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
    let panel = |a: f64, b: f64| {
        Complex64::new(rule.integrate(a, b, |x| f(x).re), rule.integrate(a, b, |x| f(x).im))
    };
    let whole = panel(a, b);
    let m = 0.5 * (a + b);
    let split = panel(a, m) + panel(m, b);
    if (whole - split).norm() < tol || depth == 0 {
        split
    } else {
        adaptive(rule, f, a, m, tol / 2.0, depth - 1) + adaptive(rule, f, m, b, tol / 2.0, depth - 1)
    }
}

fn random_state(rng: &mut ChaCha8Rng, hbar: f64) -> GaussianState64 {
    let width = Complex64::new(rng.random_range(0.3..20.0), rng.random_range(-10.0..10.0));
    GaussianState::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), width, hbar).unwrap()
}

#[test]
fn closed_form_matches_adaptive_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let rule = GaussLegendre::new(24);
    for _ in 0..200 {
        let hbar = rng.random_range(0.05..1.5);
        let bra = random_state(&mut rng, hbar);
        let ket = random_state(&mut rng, hbar);
        let exact = overlap(&bra, &ket).unwrap();
        let reach = |g: &GaussianState64| 9.0 / g.width.re.sqrt();
        let a = (bra.q - reach(&bra)).min(ket.q - reach(&ket));
        let b = (bra.q + reach(&bra)).max(ket.q + reach(&ket));
        let f = |x: f64| bra.amplitude(x).conj() * ket.amplitude(x);
        let quad = adaptive(&rule, &f, a, b, 1e-13, 30);
        let err = (exact - quad).norm();
        assert!(err < 1e-10, "{bra:?} {ket:?}: {exact} vs {quad}");
        if exact.norm() > 1e-3 {
            let dphase = (exact / quad).arg().abs();
            assert!(dphase < 1e-10 / exact.norm(), "phase {dphase}");
        }
    }
}

#[test]
fn cauchy_schwarz() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let a = random_state(&mut rng, 0.7);
        let b = random_state(&mut rng, 0.7);
        assert!(overlap(&a, &b).unwrap().norm() < 1.0);
        assert!((overlap(&a, &a).unwrap() - 1.0).norm() < 1e-14);
    }
}
