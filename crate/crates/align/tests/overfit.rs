use molsynth_align::{build_vocabularies, train, AdamWConfig, AlignModel, ModelConfig, TrainConfig};
use molsynth_core::instruct::Triplet;
use molsynth_core::Registry;

#[test]
fn overfit_pair_reproduces_captions_and_clm_vanishes() {
    let reg = Registry::new(molsynth_core::props::CONSTRAINT_IDS.to_vec()).unwrap();
    let corpus: Vec<Triplet> = [
        ("c1ccncc1O", "The molecule is a pyridine derivative bearing a hydroxy group."),
        ("CCCCC(Cl)", "The molecule is an acyclic five-carbon chain bearing a chloro group."),
    ]
    .iter()
    .map(|(s, c)| Triplet::from_smiles(s, c, &reg).unwrap())
    .collect();
    let vocabs = build_vocabularies(&corpus, 100, 4).unwrap();
    let config = ModelConfig { dim: 16, layers: 1, heads: 2, ff: 32, joint: 8, max_len: 32, tau: 0.07 };
    let mut model = AlignModel::new(config, vocabs, 4);
    let cfg = TrainConfig { epochs: 300, batch_size: 2, optimizer: AdamWConfig { lr: 1e-2, ..Default::default() }, ..Default::default() };
    let history = train(&mut model, &corpus, &cfg).unwrap().history;
    let last = history.last().unwrap();
    assert!(last.clm_st < 1e-2 && last.clm_sp < 1e-2, "{last:?}");
    for t in &corpus {
        let want = model.vocabs.text.decode_text(&model.vocabs.text.encode_text(&t.caption));
        assert_eq!(model.generate_caption(&t.smiles, 40).unwrap(), want);
    }
}
