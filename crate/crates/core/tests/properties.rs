use civic_core::legitimacy::{curve_from_weights, knee_index, legitimacy_of_weights};
use civic_core::qol::{smote_with_origins, FeatureMatrix, FeatureSet, MinMaxScaler, MlpConfig, MlpParams};
use civic_core::relocation::{migration_matrix, pqi_value, rqi, Pqi};
use civic_core::survey::{
    mean_satisfaction, proposal_counts, Axis, QolAnswer, QolClass, SatisfactionCodes, SatisfactionSector,
    SurveyDataset, SurveyResponse,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const HOODS: [&str; 4] = ["A", "B", "C", "D"];
const SECTORS: [&str; 5] = ["s1", "s2", "s3", "s4", "s5"];

fn response(id: usize, hood: usize, prev: Option<usize>, codes: &[Option<u8>], proposals: &[usize]) -> SurveyResponse {
    let mut satisfaction = SatisfactionCodes::default();
    for (s, c) in SatisfactionSector::ALL.iter().zip(codes) {
        satisfaction.set(*s, *c);
    }
    SurveyResponse {
        respondent_id: id.to_string(),
        neighborhood: HOODS[hood].into(),
        previous_neighborhood: prev.map(|p| HOODS[p].to_string()),
        qol: QolAnswer::Good,
        satisfaction,
        participation: Default::default(),
        demographics: Default::default(),
        proposals: proposals.iter().map(|&s| SECTORS[s].to_string()).collect(),
    }
}

fn dataset(responses: Vec<SurveyResponse>) -> SurveyDataset {
    SurveyDataset {
        responses,
        neighborhood_labels: HOODS.map(String::from).to_vec(),
        sector_labels: SECTORS.map(String::from).to_vec(),
    }
}

type RawResponse = (usize, Option<usize>, Vec<Option<u8>>, Vec<usize>);

fn raw_response() -> impl Strategy<Value = RawResponse> {
    (
        0..HOODS.len(),
        proptest::option::of(0..HOODS.len()),
        proptest::collection::vec(proptest::option::of(0u8..=5), 11),
        proptest::collection::vec(0..SECTORS.len(), 0..4),
    )
}

fn build(raw: &[RawResponse], offset: usize) -> Vec<SurveyResponse> {
    raw.iter()
        .enumerate()
        .map(|(i, (h, p, c, s))| response(offset + i, *h, *p, c, s))
        .collect()
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1000.0, 1..40).prop_filter("positive total", |w| w.iter().sum::<f64>() > 1e-6)
}

fn labelled_matrix() -> impl Strategy<Value = FeatureMatrix> {
    (1usize..5, 8usize..40).prop_flat_map(|(dim, n)| {
        (
            proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, dim), n),
            proptest::collection::vec(0usize..3, n),
        )
            .prop_map(move |(rows, labels)| {
                let cols = (0..dim).map(|j| format!("f{j}")).collect();
                let labels = labels.into_iter().map(|l| QolClass::from_index(l).unwrap()).collect();
                FeatureMatrix::new(FeatureSet::S, cols, rows, labels).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn legitimacy_is_scale_invariant(w in weights(), c in 0.001f64..1000.0) {
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        for k in 1..=w.len() {
            let a = legitimacy_of_weights(&w, k).unwrap();
            let b = legitimacy_of_weights(&scaled, k).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn legitimacy_curve_shape(w in weights()) {
        let n = w.len();
        let curve = curve_from_weights(&w).unwrap();
        prop_assert!((curve.legitimacy[n - 1] - n as f64).abs() < 1e-9 * n as f64);
        prop_assert!(curve.legitimacy[0] >= 1.0 - 1e-12);
        for k in 1..n {
            prop_assert!(curve.legitimacy[k] >= curve.legitimacy[k - 1] - 1e-9);
            // gains never increase once items are sorted by demand
            prop_assert!(curve.gain[k] <= curve.gain[k - 1] + 1e-9);
        }
        for k in 0..n {
            prop_assert!((curve.share[k] - curve.legitimacy[k] / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn knee_is_scale_invariant(w in weights(), c in 0.01f64..100.0) {
        prop_assume!(w.len() >= 3);
        let a = curve_from_weights(&w).unwrap();
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        let b = curve_from_weights(&scaled).unwrap();
        let ka = knee_index(&a.legitimacy).unwrap();
        let kb = knee_index(&b.legitimacy).unwrap();
        prop_assert!(ka >= 1 && ka <= w.len());
        prop_assert_eq!(ka, kb);
    }

    #[test]
    fn proposal_counts_add_over_disjoint_unions(
        a in proptest::collection::vec(raw_response(), 0..30),
        b in proptest::collection::vec(raw_response(), 0..30),
    ) {
        let da = dataset(build(&a, 0));
        let db = dataset(build(&b, a.len()));
        let mut all = build(&a, 0);
        all.extend(build(&b, a.len()));
        let du = dataset(all);
        for (axis, scopes) in [
            (Axis::SectorsWithinNeighborhood, &HOODS[..]),
            (Axis::NeighborhoodsWithinSector, &SECTORS[..]),
        ] {
            for scope in scopes {
                let ta = proposal_counts(&da, axis, scope).unwrap();
                let tb = proposal_counts(&db, axis, scope).unwrap();
                let tu = proposal_counts(&du, axis, scope).unwrap();
                prop_assert_eq!(tu.total(), ta.total() + tb.total());
                for e in tu.entries() {
                    prop_assert_eq!(e.count, ta.get(&e.label).unwrap_or(0) + tb.get(&e.label).unwrap_or(0));
                }
            }
        }
    }

    #[test]
    fn mean_satisfaction_is_bounded_by_ratings(raw in proptest::collection::vec(raw_response(), 1..40)) {
        let ds = dataset(build(&raw, 0));
        let sat = mean_satisfaction(&ds);
        for (sector, hood, cell) in sat.iter() {
            let codes: Vec<u8> = ds
                .responses
                .iter()
                .filter(|r| r.neighborhood == hood)
                .filter_map(|r| r.satisfaction.rated(sector))
                .collect();
            prop_assert_eq!(cell.support as usize, codes.len());
            let lo = f64::from(*codes.iter().min().unwrap());
            let hi = f64::from(*codes.iter().max().unwrap());
            prop_assert!(cell.mean >= lo - 1e-12 && cell.mean <= hi + 1e-12);
            prop_assert!((1.0..=5.0).contains(&cell.mean));
        }
    }

    #[test]
    fn migration_normalization_ignores_duplication(
        raw in proptest::collection::vec(raw_response(), 1..40),
        times in 2usize..4,
    ) {
        let once = migration_matrix(&dataset(build(&raw, 0)));
        let mut rs = Vec::new();
        for t in 0..times {
            rs.extend(build(&raw, t * raw.len()));
        }
        let many = migration_matrix(&dataset(rs));
        prop_assert_eq!(once.flows.len(), many.flows.len());
        for f in &once.flows {
            let g = many.get(&f.from, &f.to).unwrap();
            prop_assert_eq!(g.count, f.count * times as u64);
            prop_assert!((g.normalized - f.normalized).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&f.normalized));
            prop_assert!(f.from != f.to);
        }
    }

    #[test]
    fn rqi_of_a_neighborhood_with_itself_is_zero(raw in proptest::collection::vec(raw_response(), 1..40)) {
        let ds = dataset(build(&raw, 0));
        let sat = mean_satisfaction(&ds);
        for h in HOODS {
            let r = rqi(&sat, h, h, &SatisfactionSector::ALL);
            for s in &r.per_sector {
                prop_assert_eq!(s.rqi, 0.0);
            }
            prop_assert!(r.overall.is_none_or(|v| v == 0.0));
        }
    }

    #[test]
    fn pqi_is_affine_in_the_individual_rating(
        from in 1.0f64..5.0, to in 1.0f64..5.0, q in 1.0f64..5.0, dq in -3.0f64..3.0,
    ) {
        prop_assume!((to - from).abs() > 1e-3);
        let v = |x: f64| match pqi_value(from, to, x) {
            Pqi::Value(v) => v,
            Pqi::Undefined(_) => panic!("defined"),
        };
        let slope = 1.0 / (to - from);
        prop_assert!((v(q + dq) - v(q) - slope * dq).abs() < 1e-9 * (1.0 + slope.abs() * 3.0));
        prop_assert!((v(to) - 1.0).abs() < 1e-12);
        prop_assert!(v(from).abs() < 1e-12);
    }

    #[test]
    fn predicted_probabilities_lie_on_the_simplex(
        seed in any::<u64>(),
        input in 1usize..12,
        hidden in 1usize..24,
        scale in 0.0f64..50.0,
    ) {
        let cfg = MlpConfig { hidden_units: hidden, ..MlpConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = MlpParams::init(input, &cfg, &mut rng);
        for (i, v) in p.data.iter_mut().enumerate() {
            *v *= 1.0 + scale * ((i % 7) as f64 - 3.0);
        }
        let x: Vec<f64> = (0..input).map(|j| ((seed >> (j % 60)) & 0xff) as f64 / 25.5 - 5.0).collect();
        let probs = p.predict_proba(&x).unwrap();
        prop_assert_eq!(probs.len(), cfg.classes);
        prop_assert!(probs.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smote_rows_are_convex_combinations(x in labelled_matrix(), k in 1usize..6, seed in any::<u64>()) {
        let counts = x.class_counts();
        prop_assume!(counts.iter().filter(|&&c| c > 0).count() >= 2);
        prop_assume!(counts.iter().filter(|&&c| c > 0).all(|&c| c >= 2));
        let out = smote_with_origins(&x, k, seed).unwrap();
        let n = x.len();
        let m = &out.matrix;
        prop_assert_eq!(m.len(), n + out.origins.len());
        prop_assert_eq!(&m.rows[..n], &x.rows[..]);
        let target = *counts.iter().max().unwrap();
        for c in m.class_counts().iter().filter(|&&c| c > 0) {
            prop_assert_eq!(*c, target);
        }
        for (i, o) in out.origins.iter().enumerate() {
            let row = &m.rows[n + i];
            let (a, b) = (&x.rows[o.base], &x.rows[o.neighbor]);
            prop_assert_eq!(x.labels[o.base], x.labels[o.neighbor]);
            prop_assert_eq!(m.labels[n + i], x.labels[o.base]);
            // solve row = a + u (b - a) on the widest coordinate, then check every coordinate
            let j = (0..a.len())
                .max_by(|&p, &q| (b[p] - a[p]).abs().total_cmp(&(b[q] - a[q]).abs()))
                .unwrap();
            let d = b[j] - a[j];
            let u = if d.abs() < 1e-12 { 0.0 } else { (row[j] - a[j]) / d };
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&u), "u = {}", u);
            for t in 0..a.len() {
                prop_assert!((row[t] - (a[t] + u * (b[t] - a[t]))).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scaler_maps_training_rows_into_unit_box(x in labelled_matrix()) {
        let s = MinMaxScaler::fit(&x).unwrap();
        let t = s.transform(&x).unwrap();
        for row in &t.rows {
            for v in row {
                prop_assert!((0.0..=1.0).contains(v), "{}", v);
            }
        }
        for j in 0..x.dim() {
            let col = t.column_values(j);
            let spread = x.column_values(j).iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
                - x.column_values(j).iter().fold(f64::INFINITY, |m, v| m.min(*v));
            if spread > 0.0 {
                prop_assert!(col.contains(&0.0));
                prop_assert!(col.iter().any(|v| (*v - 1.0).abs() < 1e-12));
            }
        }
    }
}
