use std::f64::consts::LN_2;

use proptest::prelude::*;
use statrs::function::gamma::digamma;
use uncq::bernoulli::*;
use uncq::measures::{EnsembleMeasures, PosteriorEnsemble, ProbabilityVector, View};
use uncq::Nats;

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Antiderivative of `θ ln θ + (1 − θ) ln(1 − θ)`.
fn neg_entropy_antiderivative(t: f64) -> f64 {
    let s = 1.0 - t;
    let half_sq_log = |x: f64| if x == 0.0 { 0.0 } else { 0.5 * x * x * x.ln() };
    (half_sq_log(t) - 0.25 * t * t) - (half_sq_log(s) - 0.25 * s * s)
}

/// Closed-form aleatoric uncertainty, independent of the quadrature path.
fn aleatoric_oracle(post: &Posterior1D) -> f64 {
    match post.shape() {
        Shape::Uniform { low, high } => {
            -(neg_entropy_antiderivative(*high) - neg_entropy_antiderivative(*low)) / (high - low)
        }
        Shape::Beta { alpha, beta } => {
            let (a, b) = (*alpha, *beta);
            let n = a + b;
            // E[θ ln θ] = a/n (ψ(a+1) − ψ(n+1))
            -(a / n * (digamma(a + 1.0) - digamma(n + 1.0))
                + b / n * (digamma(b + 1.0) - digamma(n + 1.0)))
        }
        Shape::DeltaMixture(atoms) => atoms
            .iter()
            .map(|a| -a.weight * (xlogx(a.theta) + xlogx(1.0 - a.theta)))
            .sum(),
    }
}

fn continuous_posteriors() -> impl Strategy<Value = Posterior1D> {
    prop_oneof![
        (0.0..0.95f64, 0.01..1.0f64)
            .prop_map(|(a, w)| Posterior1D::uniform(a, (a + w).min(1.0)).unwrap()),
        (0.05..20.0f64, 0.05..20.0f64).prop_map(|(a, b)| Posterior1D::beta(a, b).unwrap()),
    ]
}

fn mixtures() -> impl Strategy<Value = Posterior1D> {
    prop::collection::btree_set(0u32..=1000, 1..6).prop_flat_map(|locs| {
        let n = locs.len();
        (Just(locs), prop::collection::vec(0.05..1.0f64, n)).prop_map(|(locs, w)| {
            let total: f64 = w.iter().sum();
            Posterior1D::delta_mixture(
                locs.into_iter()
                    .zip(w)
                    .map(|(l, w)| (l as f64 / 1000.0, w / total)),
            )
            .unwrap()
        })
    })
}

fn close(a: Nats, b: Nats, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        a.is_infinite() && b.is_infinite()
    } else {
        (a.value() - b.value()).abs() <= tol
    }
}

#[test]
fn unit_uniform_matches_analytic_values() {
    let u = Posterior1D::uniform(0.0, 1.0).unwrap();
    let r = BernoulliReport::compute(&u).unwrap();
    assert!((r.mi.aleatoric().value() - 0.5).abs() <= 1e-8);
    assert!((r.epkl.epistemic().value() - 0.5).abs() <= 1e-8);
    assert!((r.mi.epistemic().value() - (LN_2 - 0.5)).abs() <= 1e-8);
    assert!((r.mi.total().value() - LN_2).abs() <= 1e-8);
    let (lt, ls) = expected_log_moments_by_quadrature(&u).unwrap();
    assert!((lt + 1.0).abs() <= 1e-8 && (ls + 1.0).abs() <= 1e-8);
}

#[test]
fn reference_posteriors_match_closed_form_aleatoric() {
    for post in reference_posteriors() {
        let got = aleatoric(&post).unwrap().value();
        assert!((got - aleatoric_oracle(&post)).abs() <= 1e-10, "{post}");
    }
}

#[test]
fn beta_five_five_satisfies_gap_identity() {
    let p = Posterior1D::beta(5.0, 5.0).unwrap();
    let r = BernoulliReport::compute(&p).unwrap();
    let gap = r.epkl.epistemic().value() - r.mi.epistemic().value();
    assert!((gap - r.rmi.value()).abs() <= 1e-8);
    assert!(r.rmi.value() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn log_moments_agree_with_quadrature(post in continuous_posteriors()) {
        let (ct, cs) = expected_log_moments(&post);
        let (qt, qs) = expected_log_moments_by_quadrature(&post).unwrap();
        prop_assert!((ct - qt).abs() <= 1e-8, "{post}: {ct} vs {qt}");
        prop_assert!((cs - qs).abs() <= 1e-8, "{post}: {cs} vs {qs}");
    }

    #[test]
    fn aleatoric_matches_closed_form(post in continuous_posteriors()) {
        let got = aleatoric(&post).unwrap().value();
        prop_assert!((got - aleatoric_oracle(&post)).abs() <= 1e-9, "{post}");
        prop_assert!(got <= LN_2);
    }

    #[test]
    fn epkl_gap_is_rmi(post in prop_oneof![continuous_posteriors(), mixtures()]) {
        let r = BernoulliReport::compute(&post).unwrap();
        let (k, i) = (r.epkl.epistemic(), r.mi.epistemic());
        prop_assert!(k >= i && i >= Nats::ZERO);
        prop_assert_eq!(r.mi.aleatoric(), r.epkl.aleatoric());
        if k.is_finite() {
            prop_assert!((k.value() - (i.value() + r.rmi.value())).abs() <= 1e-8);
        } else {
            prop_assert!(r.rmi.is_infinite());
        }
    }

    #[test]
    fn reflection_leaves_everything_unchanged(post in prop_oneof![continuous_posteriors(), mixtures()]) {
        let a = BernoulliReport::compute(&post).unwrap();
        let b = BernoulliReport::compute(&post.reflect()).unwrap();
        for (x, y) in [
            (a.mi.total(), b.mi.total()),
            (a.mi.aleatoric(), b.mi.aleatoric()),
            (a.mi.epistemic(), b.mi.epistemic()),
            (a.epkl.total(), b.epkl.total()),
            (a.epkl.epistemic(), b.epkl.epistemic()),
            (a.rmi, b.rmi),
        ] {
            prop_assert!(close(x, y, 1e-10), "{post}: {x} vs {y}");
        }
    }

    #[test]
    fn mixtures_agree_with_finite_ensembles(post in mixtures()) {
        let Shape::DeltaMixture(atoms) = post.shape() else { unreachable!() };
        let ens = PosteriorEnsemble::with_weights(
            atoms.iter().map(|a| ProbabilityVector::bernoulli(a.theta).unwrap()).collect(),
            atoms.iter().map(|a| a.weight).collect(),
        ).unwrap();
        let m = EnsembleMeasures::compute(&ens);
        let r = BernoulliReport::compute(&post).unwrap();
        let pairs = [
            (r.mi.total(), m.triple(View::MiBased).total()),
            (r.mi.aleatoric(), m.triple(View::MiBased).aleatoric()),
            (r.mi.epistemic(), m.triple(View::MiBased).epistemic()),
            (r.epkl.total(), m.triple(View::EpklBased).total()),
            (r.epkl.aleatoric(), m.triple(View::EpklBased).aleatoric()),
            (r.epkl.epistemic(), m.triple(View::EpklBased).epistemic()),
            (r.rmi, m.reverse_mutual_information),
        ];
        for (lab, ens) in pairs {
            prop_assert!(close(lab, ens, 1e-9), "{post}: {lab} vs {ens}");
        }
    }
}

#[test]
fn matched_degenerates_share_mi_but_not_epkl() {
    // Close to ln 2 every posterior is nearly a point mass at ½ and the EPKL
    // values converge, so distinctness is only checked up to 0.65.
    for target in [0.1, 0.3, 0.5, 0.54, 0.6, 0.65] {
        let m = construct_matched_degenerates(target).unwrap();
        let reports: Vec<_> = m
            .posteriors()
            .iter()
            .map(|p| BernoulliReport::compute(p).unwrap())
            .collect();
        for (p, r) in m.posteriors().iter().zip(&reports) {
            assert!((expected_theta(p) - m.mean).abs() < 1e-12, "{p}");
            assert!((aleatoric_oracle(p) - target).abs() <= 1e-10, "{p}");
            assert!((r.mi.aleatoric().value() - target).abs() <= 1e-10, "{p}");
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (&reports[i], &reports[j]);
                for (x, y) in [
                    (a.mi.total(), b.mi.total()),
                    (a.mi.aleatoric(), b.mi.aleatoric()),
                    (a.mi.epistemic(), b.mi.epistemic()),
                ] {
                    assert!((x.value() - y.value()).abs() <= 1e-8);
                }
                let gap = (a.epkl.epistemic().value() - b.epkl.epistemic().value()).abs();
                assert!(gap > 1e-3, "target {target}: gap {gap}");
            }
        }
    }
}

#[test]
fn matched_degenerates_centre_on_a_half_when_possible() {
    let m = construct_matched_degenerates(0.65).unwrap();
    assert_eq!(m.mean, 0.5);
    let Shape::DeltaMixture(atoms) = m.delta_mixture.shape() else { panic!() };
    assert_eq!(atoms[0].weight, 0.5);
    assert!((atoms[0].theta + atoms[1].theta - 1.0).abs() < 1e-15);
}
