use molsynth_align::{build_vocabularies, grad_check, AlignModel, Batch, Example, LossTerm, ModelConfig};
use molsynth_core::instruct::Triplet;
use molsynth_core::Registry;

fn toy_batch() -> (AlignModel, Vec<Example>) {
    let reg = Registry::new(molsynth_core::props::CONSTRAINT_IDS.to_vec()).unwrap();
    let corpus: Vec<Triplet> = [
        ("CCO", "ethanol is a small alcohol."),
        ("c1ccncc1", "pyridine is an aromatic base."),
        ("CC(=O)O", "acetic acid is a weak acid."),
        ("CCN", "ethylamine is a small amine."),
    ]
    .iter()
    .map(|(s, c)| Triplet::from_smiles(s, c, &reg).unwrap())
    .collect();
    let vocabs = build_vocabularies(&corpus, 30, 4).unwrap();
    let model = AlignModel::new(ModelConfig::toy(), vocabs, 17);
    let ex = corpus.iter().map(|t| model.example(t).unwrap()).collect();
    (model, ex)
}

#[test]
fn every_loss_term_matches_finite_differences() {
    let (model, ex) = toy_batch();
    let refs: Vec<&Example> = ex.iter().collect();
    let batch = Batch::new(&refs, vec![1, 2, 3, 0], vec![2, 3, 1, 0]);
    for term in LossTerm::ALL {
        let r = grad_check(&model, &batch, term, 1e-4).unwrap();
        println!("{term}: max rel error {:.2e} at {:?} over {} entries", r.max_rel_error, r.worst, r.entries_checked);
        assert!(r.passed, "{term}: {:?}", r);
    }
}
