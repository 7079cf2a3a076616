use prevalence_core::calib::{fit_isotonic, fit_platt, platt_gradient, platt_objective};
use prevalence_core::curve::sigmoid;
use prevalence_core::estim::{
    estimate_acc, estimate_cc, estimate_cpcc, estimate_median_sweep, estimate_mixture,
    mixture_distances,
};
use prevalence_core::histogram::histogram_with_edges;
use prevalence_core::{
    hellinger, histogram_of, mix, CalibrationCurve, ClassConditionals, Histogram, JointDistribution,
};
use proptest::collection::vec;
use proptest::prelude::*;

fn weights(bins: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(0.0..1.0f64, bins).prop_filter("nonzero total", |w| w.iter().sum::<f64>() > 1e-3)
}

fn histogram(bins: usize) -> impl Strategy<Value = Histogram> {
    weights(bins).prop_map(move |w| {
        Histogram::from_weights(prevalence_core::histogram::uniform_edges(bins), &w).unwrap()
    })
}

fn strictly_positive_histogram(bins: usize) -> impl Strategy<Value = Histogram> {
    vec(0.01..1.0f64, bins).prop_map(move |w| {
        Histogram::from_weights(prevalence_core::histogram::uniform_edges(bins), &w).unwrap()
    })
}

fn curve() -> impl Strategy<Value = CalibrationCurve> {
    prop_oneof![
        (0.0..40.0f64, -20.0..5.0f64).prop_map(|(w, b)| CalibrationCurve::Platt { w, b }),
        (0.1..5.0f64).prop_map(|t| CalibrationCurve::Temperature {
            t,
            clip_epsilon: 1e-4
        }),
        vec(0.0..1.0f64, 1..12).prop_map(|mut probs| {
            probs.sort_by(f64::total_cmp);
            let n = probs.len();
            let edges = prevalence_core::histogram::uniform_edges(n);
            CalibrationCurve::Binned { edges, probs }
        }),
        (vec(0.0..1.0f64, 1..10), vec(0.0..1.0f64, 10)).prop_map(|(mut scores, mut probs)| {
            scores.sort_by(f64::total_cmp);
            scores.dedup();
            probs.truncate(scores.len());
            probs.sort_by(f64::total_cmp);
            CalibrationCurve::Isotonic { scores, probs }
        }),
        (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_map(|(threshold, a, b)| {
            CalibrationCurve::Step {
                threshold,
                p_below: a.min(b),
                p_above: a.max(b),
            }
        }),
        Just(CalibrationCurve::Identity),
    ]
}

/// Mean negative log-likelihood plus the ridge term, written out directly.
/// `-ln sigmoid(z) = ln(1 + e^-z)`, evaluated without overflow.
fn oracle_objective(points: &[(f64, bool)], w: f64, b: f64) -> f64 {
    let neg_log_sigmoid = |z: f64| {
        if z > 0.0 {
            (-z).exp().ln_1p()
        } else {
            -z + z.exp().ln_1p()
        }
    };
    let nll: f64 = points
        .iter()
        .map(|&(s, y)| {
            let z = w * s + b;
            if y {
                neg_log_sigmoid(z)
            } else {
                neg_log_sigmoid(-z)
            }
        })
        .sum();
    nll / points.len() as f64 + 1e-6 * (w * w + b * b)
}

fn finite_difference(points: &[(f64, bool)], w: f64, b: f64) -> [f64; 2] {
    let h = 1e-5;
    [
        (oracle_objective(points, w + h, b) - oracle_objective(points, w - h, b)) / (2.0 * h),
        (oracle_objective(points, w, b + h) - oracle_objective(points, w, b - h)) / (2.0 * h),
    ]
}

fn labeled_points(min: usize, max: usize) -> impl Strategy<Value = Vec<(f64, bool)>> {
    vec((0.0..1.0f64, any::<bool>()), min..=max).prop_filter("both classes", |pts| {
        pts.iter().any(|p| p.1) && pts.iter().any(|p| !p.1)
    })
}

/// Isotonic regression by exhaustive search over contiguous partitions of
/// the distinct scores, returning the fitted value at each distinct score.
fn brute_force_isotonic(points: &[(f64, bool)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for &(s, y) in &sorted {
        let y = if y { 1.0 } else { 0.0 };
        match groups.last_mut() {
            Some(g) if g.0 == s => {
                g.1 += y;
                g.2 += 1.0;
            }
            _ => groups.push((s, y, 1.0)),
        }
    }
    let m = groups.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (m - 1)) {
        let mut values = vec![0.0; m];
        let mut means = Vec::new();
        let mut start = 0;
        let mut sse = 0.0;
        for end in 1..=m {
            if end == m || mask & (1 << (end - 1)) != 0 {
                let sum: f64 = groups[start..end].iter().map(|g| g.1).sum();
                let weight: f64 = groups[start..end].iter().map(|g| g.2).sum();
                let mean = sum / weight;
                means.push(mean);
                for (v, g) in values[start..end].iter_mut().zip(&groups[start..end]) {
                    *v = mean;
                    sse += g.1 * (1.0 - mean).powi(2) + (g.2 - g.1) * mean.powi(2);
                }
                start = end;
            }
        }
        if means.windows(2).any(|w| w[0] > w[1] + 1e-12) {
            continue;
        }
        if best.as_ref().is_none_or(|(b, _)| sse < *b - 1e-12) {
            best = Some((sse, values));
        }
    }
    let values = best.unwrap().1;
    groups.iter().map(|g| g.0).zip(values).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hellinger_is_a_metric(
        (a, b, c) in (2usize..16).prop_flat_map(|n| (histogram(n), histogram(n), histogram(n)))
    ) {
        let ab = hellinger(&a, &b).unwrap();
        let ba = hellinger(&b, &a).unwrap();
        let bc = hellinger(&b, &c).unwrap();
        let ac = hellinger(&a, &c).unwrap();
        prop_assert!(hellinger(&a, &a).unwrap().abs() < 1e-12);
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(ac <= ab + bc + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn pav_matches_brute_force(points in labeled_points(2, 12).prop_map(|pts| {
        // Coarse scores so ties occur.
        pts.into_iter().map(|(s, y)| ((s * 8.0).floor() / 8.0, y)).collect::<Vec<_>>()
    }).prop_filter("both classes", |pts| pts.iter().any(|p| p.1) && pts.iter().any(|p| !p.1))) {
        let fitted = fit_isotonic(&points).unwrap();
        for (score, expected) in brute_force_isotonic(&points) {
            let got = fitted.eval(score).unwrap();
            prop_assert!((got - expected).abs() < 1e-9, "at {score}: {got} vs {expected}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn joint_round_trip_through_class_conditionals(
        (density, probs) in (2usize..25).prop_flat_map(|n| (strictly_positive_histogram(n), vec(0.001..0.999f64, n)))
    ) {
        let curve = CalibrationCurve::Binned { edges: density.edges().to_vec(), probs: probs.clone() };
        let joint = JointDistribution::new(density.clone(), curve).unwrap();
        let back = JointDistribution::from_class_conditionals(&joint.to_class_conditionals().unwrap()).unwrap();
        for (x, y) in back.density.mass().iter().zip(density.mass()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        for (c, p) in density.centers().into_iter().zip(&probs) {
            prop_assert!((back.curve.eval(c).unwrap() - p).abs() < 1e-9);
        }
    }

    #[test]
    fn class_conditionals_round_trip_through_joint(
        (f_pos, f_neg, p) in (2usize..25).prop_flat_map(|n| (histogram(n), histogram(n), 0.01..0.99f64))
    ) {
        let cc = ClassConditionals::new(f_pos.clone(), f_neg.clone(), p).unwrap();
        let joint = cc.to_joint().unwrap();
        prop_assert!((joint.prevalence() - p).abs() < 1e-9);
        let back = joint.to_class_conditionals().unwrap();
        prop_assert!((back.prevalence - p).abs() < 1e-9);
        for (x, y) in back.f_pos.mass().iter().zip(f_pos.mass()) {
            prop_assert!((x - y).abs() < 1e-6);
        }
        for (x, y) in back.f_neg.mass().iter().zip(f_neg.mass()) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn fitted_and_stored_curves_are_monotone(c in curve()) {
        let mut prev = c.eval(0.0).unwrap();
        for i in 1..=1000 {
            let v = c.eval(i as f64 / 1000.0).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v >= prev - 1e-12, "{c:?} decreases at {i}");
            prev = v;
        }
    }

    #[test]
    fn histogram_of_sums_to_one(scores in vec(0.0..=1.0f64, 1..300), bins in 1usize..50) {
        let h = histogram_of(&scores, bins).unwrap();
        prop_assert!((h.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cc_is_non_increasing_in_threshold(scores in vec(0.0..=1.0f64, 1..200)) {
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = estimate_cc(&scores, i as f64 / 100.0).unwrap();
            prop_assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn platt_gradient_matches_finite_differences(
        points in labeled_points(5, 60), w in -30.0..30.0f64, b in -15.0..15.0f64
    ) {
        let (ours, oracle) = (platt_objective(&points, w, b), oracle_objective(&points, w, b));
        prop_assert!((ours - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "{ours} vs {oracle}");
        let g = platt_gradient(&points, w, b);
        let fd = finite_difference(&points, w, b);
        for (x, y) in g.iter().zip(fd) {
            prop_assert!((x - y).abs() <= 1e-4 * x.abs().max(y.abs()).max(1e-3), "{g:?} vs {fd:?}");
        }
    }

    #[test]
    fn platt_fit_is_stationary(points in labeled_points(5, 60)) {
        let CalibrationCurve::Platt { w, b } = fit_platt(&points).unwrap() else { unreachable!() };
        let fd = finite_difference(&points, w, b);
        prop_assert!(fd[0].abs().max(fd[1].abs()) < 1e-6, "{fd:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cpcc_stays_within_curve_range(c in curve(), scores in vec(0.0..=1.0f64, 1..200)) {
        let values: Vec<f64> = scores.iter().map(|&s| c.eval(s).unwrap()).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let est = estimate_cpcc(&scores, &c).unwrap();
        prop_assert!(est >= lo - 1e-12 && est <= hi + 1e-12);
        prop_assert!((0.0..=1.0).contains(&est));
    }

    #[test]
    fn mixture_recovers_exact_mixtures(
        (f_pos, f_neg) in (3usize..25).prop_flat_map(|n| (strictly_positive_histogram(n), strictly_positive_histogram(n)))
            .prop_filter("distinct classes", |(a, b)| hellinger(a, b).unwrap() > 0.05)
    ) {
        let cc = ClassConditionals::new(f_pos.clone(), f_neg.clone(), 0.5).unwrap();
        for k in 0..=20 {
            let p = k as f64 * 0.05;
            let target = mix(&f_pos, &f_neg, p).unwrap();
            let est = estimate_mixture(&target, &cc, 0.001).unwrap();
            prop_assert!((est - p).abs() <= 0.001 + 1e-12, "p={p} est={est}");
        }
    }

    #[test]
    fn mixture_estimate_is_the_first_grid_minimum(
        (f_pos, f_neg, target) in (3usize..20).prop_flat_map(|n| (histogram(n), histogram(n), histogram(n)))
    ) {
        let cc = ClassConditionals::new(f_pos, f_neg, 0.5).unwrap();
        let est = estimate_mixture(&target, &cc, 0.01).unwrap();
        let distances = mixture_distances(&target, &cc, 0.01).unwrap();
        let best = distances.iter().find(|(p, _)| *p == est).unwrap().1;
        for &(p, d) in &distances {
            prop_assert!(d >= best);
            if p < est {
                prop_assert!(d > best);
            }
        }
    }

    #[test]
    fn adjusted_counts_reproduce_base_prevalence(
        scores in vec(0.0..=1.0f64, 50..400), w in 2.0..30.0f64, b in -15.0..0.0f64
    ) {
        let density = histogram_of(&scores, 20).unwrap();
        let joint = JointDistribution::new(density.clone(), CalibrationCurve::Platt { w, b }).unwrap();
        let prevalence = joint.prevalence();
        prop_assume!(prevalence > 0.0 && prevalence < 1.0);
        let cc = joint.to_class_conditionals().unwrap();
        let mut any = false;
        for k in 1..20 {
            let t = density.edges()[k];
            if let Ok(est) = estimate_acc(&scores, t, &joint, 0.05) {
                any = true;
                prop_assert!((est - prevalence).abs() < 1e-9, "t={t}: {est} vs {prevalence}");
            }
        }
        if any {
            let target = histogram_with_edges(&scores, density.edges()).unwrap();
            let est = estimate_median_sweep(&target, &cc, 0.05).unwrap();
            prop_assert!((est - prevalence).abs() < 1e-9);
        }
    }
}

#[test]
fn sigmoid_matches_direct_formula() {
    for z in [-30.0, -2.0, 0.0, 0.5, 12.0] {
        assert!((sigmoid(z) - 1.0 / (1.0 + (-z).exp())).abs() < 1e-15);
    }
}
