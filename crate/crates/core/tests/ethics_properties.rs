use proptest::prelude::*;
use siov_core::ethics::{
    crash_force, personal_ethical_value, total_ethical_value, total_utilitarian_force,
    CandidateAction, LifeStageCategory, Occupant, Participant, SafetyRating,
};

#[test]
fn pev_monotone_over_grid() {
    // 5 categories x 50 ratings = 250 grid points.
    let ratings: Vec<f64> = (1..=50).map(|i| f64::from(i) * 0.1).collect();
    for c in LifeStageCategory::ALL {
        for w in ratings.windows(2) {
            let lo = personal_ethical_value(c, SafetyRating::new(w[0]).unwrap()).units();
            let hi = personal_ethical_value(c, SafetyRating::new(w[1]).unwrap()).units();
            assert!(lo > hi, "PEV must fall as rating rises ({c}, {} -> {})", w[0], w[1]);
        }
    }
    for &r in &ratings {
        let rating = SafetyRating::new(r).unwrap();
        for w in LifeStageCategory::ALL.windows(2) {
            assert!(
                personal_ethical_value(w[1], rating).units()
                    > personal_ethical_value(w[0], rating).units()
            );
        }
    }
}

fn occupants() -> impl Strategy<Value = Vec<Occupant>> {
    prop::collection::vec(0.0f64..100.0, 0..8)
        .prop_map(|ages| ages.into_iter().map(|a| Occupant::new(a).unwrap()).collect())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn tev_permutation_invariant(mut occ in occupants(), r in 0.1f64..5.0, seed in any::<u64>()) {
        let rating = SafetyRating::new(r).unwrap();
        let before = total_ethical_value(&occ, rating).units();
        // deterministic shuffle
        let n = occ.len();
        if n > 1 {
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                occ.swap(i, (s >> 33) as usize % (i + 1));
            }
        }
        prop_assert!(close(before, total_ethical_value(&occ, rating).units()));
    }

    #[test]
    fn tev_additive_over_concatenation(a in occupants(), b in occupants(), r in 0.1f64..5.0) {
        let rating = SafetyRating::new(r).unwrap();
        let joined: Vec<Occupant> = a.iter().chain(b.iter()).copied().collect();
        let sum = total_ethical_value(&a, rating).units() + total_ethical_value(&b, rating).units();
        prop_assert!(close(total_ethical_value(&joined, rating).units(), sum));
    }

    #[test]
    fn crash_force_scaling_is_exact(m in 1.0f64..40_000.0, v in 0.0f64..60.0, d in 0.1f64..200.0) {
        let f = crash_force(m, v, d).unwrap().newtons();
        prop_assert_eq!(crash_force(2.0 * m, v, d).unwrap().newtons(), 2.0 * f);
        prop_assert_eq!(crash_force(m, 2.0 * v, d).unwrap().newtons(), 4.0 * f);
        prop_assert_eq!(crash_force(m, v, 2.0 * d).unwrap().newtons(), f / 2.0);
    }

    #[test]
    fn tuf_properties(
        parts in prop::collection::vec((0.1f64..100.0, 1.0f64..5000.0), 1..6),
        extra in (0.1f64..100.0, 1.0f64..5000.0),
    ) {
        let build = |ps: &[(f64, f64)]| {
            let participants = ps
                .iter()
                .enumerate()
                .map(|(i, &(t, f))| Participant::new(format!("p{i}"), t, f).unwrap())
                .collect();
            CandidateAction::new("x", participants).unwrap()
        };
        let tuf = total_utilitarian_force(&build(&parts)).unwrap().value();

        let mut rev = parts.clone();
        rev.reverse();
        prop_assert!(close(tuf, total_utilitarian_force(&build(&rev)).unwrap().value()));

        let max_uf = parts.iter().map(|(t, f)| t * f).fold(0.0, f64::max);
        prop_assert!(tuf >= max_uf);

        let mut more = parts.clone();
        more.push(extra);
        prop_assert!(total_utilitarian_force(&build(&more)).unwrap().value() > tuf);
    }
}
