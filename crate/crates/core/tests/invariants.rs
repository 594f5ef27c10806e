use molsynth_core::chem::random_smiles;
use molsynth_core::eval::{bleu, levenshtein, meteor_simple, regression_metrics, rouge, RougeVariant};
use molsynth_core::instruct::split_dataset;
use molsynth_core::props::{exact_mol_wt, tanimoto, Fingerprint, FingerprintKind};
use molsynth_core::{descriptor_vector, parse_smiles, Registry};
use proptest::prelude::*;

const MOLECULES: &[&str] = &[
    "CC(=O)Oc1ccccc1C(=O)O",
    "CN1CCC[C@H]1c1cccnc1",
    "O=C(CN1CCN(c2ccc(Cl)cc2)CC1)Nc1ccc(F)cc1F",
    "NN=c1sc2ccccc2n1-c1ccccc1",
    "C[N+](C)(C)CC(=O)[O-]",
    "O=S(=O)(Nc1ccccn1)c1ccc2occc2c1",
    "C1CC2CCC1CC2",
    "Brc1ccc2[nH]ccc2c1",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_is_a_partition(n in 10usize..400, seed: u64) {
        let ids: Vec<usize> = (0..n).collect();
        let s = split_dataset(&ids, seed).unwrap();
        prop_assert_eq!(s.train.len(), n * 8 / 10);
        prop_assert_eq!(s.validation.len(), n * 9 / 10 - n * 8 / 10);
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort();
        prop_assert_eq!(all, ids.clone());
        prop_assert_eq!(split_dataset(&ids, seed).unwrap(), s);
    }

    #[test]
    fn levenshtein_is_a_metric(a in "[CNOc1()=]{0,12}", b in "[CNOc1()=]{0,12}", c in "[CNOc1()=]{0,12}") {
        let d = levenshtein(&a, &b);
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert_eq!(d, levenshtein(&b, &a));
        prop_assert!(d <= levenshtein(&a, &c) + levenshtein(&c, &b));
        prop_assert!(d >= a.len().abs_diff(b.len()) && d <= a.len().max(b.len()));
        prop_assert_eq!(d == 0, a == b);
    }

    #[test]
    fn identical_text_scores_top_marks(words in prop::collection::vec("[a-z]{1,6}", 4..20)) {
        let s = vec![words.join(" ")];
        prop_assert_eq!(bleu(&s, &s, 4).unwrap(), 1.0);
        for v in [RougeVariant::One, RougeVariant::Two, RougeVariant::L] {
            prop_assert_eq!(rouge(&s, &s, v).unwrap(), 1.0);
        }
        // one chunk of m matches leaves a 0.5/m^3 fragmentation penalty
        let m = words.len() as f64;
        prop_assert!((meteor_simple(&s, &s).unwrap() - (1.0 - 0.5 / (m * m * m))).abs() < 1e-12);
    }

    #[test]
    fn regression_matches_the_textbook_formulas(pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..60)) {
        let (pred, truth): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let r = regression_metrics(&pred, &truth).unwrap();
        let n = truth.len() as f64;
        let mut sq = 0.0;
        for i in 0..truth.len() {
            sq += (pred[i] - truth[i]).powi(2);
        }
        prop_assert!((r.rmse - (sq / n).sqrt()).abs() < 1e-9);
        let mean = truth.iter().sum::<f64>() / n;
        let var: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
        prop_assert!((r.r2.unwrap() - (1.0 - sq / var)).abs() < 1e-9);
    }

    #[test]
    fn tanimoto_is_a_similarity(a in prop::collection::btree_set(0usize..256, 0..40), b in prop::collection::btree_set(0usize..256, 0..40)) {
        let fa = Fingerprint::from_bits(FingerprintKind::Morgan, 256, a.iter().copied());
        let fb = Fingerprint::from_bits(FingerprintKind::Morgan, 256, b.iter().copied());
        let t = tanimoto(&fa, &fb).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert_eq!(t, tanimoto(&fb, &fa).unwrap());
        prop_assert_eq!(tanimoto(&fa, &fa).unwrap(), 1.0);
        let expected = if a.is_empty() && b.is_empty() { 1.0 } else { a.intersection(&b).count() as f64 / a.union(&b).count() as f64 };
        prop_assert!((t - expected).abs() < 1e-12 || (a.is_empty() != b.is_empty() && t == 0.0));
    }

    #[test]
    fn descriptors_ignore_atom_order(i in 0..MOLECULES.len(), seed: u64) {
        let m = parse_smiles(MOLECULES[i]).unwrap();
        let shuffled = parse_smiles(&random_smiles(&m, seed)).unwrap();
        let reg = Registry::default();
        let a = descriptor_vector(&m, &reg).unwrap();
        let b = descriptor_vector(&shuffled, &reg).unwrap();
        for (k, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
            prop_assert!((x - y).abs() < 1e-9, "{} {} vs {}", reg.names()[k], x, y);
        }
    }

    #[test]
    fn exact_mass_adds_over_components(i in 0..MOLECULES.len(), j in 0..MOLECULES.len()) {
        let a = exact_mol_wt(&parse_smiles(MOLECULES[i]).unwrap()).unwrap();
        let b = exact_mol_wt(&parse_smiles(MOLECULES[j]).unwrap()).unwrap();
        let ab = exact_mol_wt(&parse_smiles(&format!("{}.{}", MOLECULES[i], MOLECULES[j])).unwrap()).unwrap();
        prop_assert!((ab - a - b).abs() < 1e-9);
    }
}
