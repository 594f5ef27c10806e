"""Smoke test for the molsynth extension module.

Build and install it first:
    pip install --no-build-isolation ./crates/python
then run with pytest or plain python.
"""

import math

import molsynth


def test_canonical_smiles_ignores_atom_order():
    assert molsynth.canonical_smiles("OCC") == molsynth.canonical_smiles("CCO")
    assert molsynth.is_valid_smiles("c1ccccc1")
    assert not molsynth.is_valid_smiles("C1CC")
    try:
        molsynth.canonical_smiles("C(C)(C)(C)(C)C")
    except ValueError as e:
        assert "C(C)(C)(C)(C)C" in str(e)
    else:
        raise AssertionError("pentavalent carbon accepted")


def test_descriptors():
    d = molsynth.descriptors("CCO")
    assert list(d)[:5] == ["BalabanJ", "ExactMolWt", "MolLogP", "TPSA", "QED"]
    assert math.isclose(d["ExactMolWt"], 46.0419, abs_tol=1e-3)
    assert math.isclose(d["TPSA"], 20.23, abs_tol=1e-2)
    only = molsynth.descriptors("c1ccccc1O", names=["TPSA"])
    assert list(only) == ["TPSA"]


def test_similarity_and_metrics():
    assert molsynth.similarity("CCO", "OCC") == 1.0
    assert 0.0 <= molsynth.similarity("CCO", "c1ccccc1", kind="maccs_lite") < 1.0
    caps = ["the molecule is an alcohol", "the molecule is an aromatic ring"]
    m = molsynth.caption_metrics(caps, caps)
    assert m["BLEU-4"] == 1.0 and m["ROUGE-L"] == 1.0
    g = molsynth.molgen_metrics(["CCO", "C1CC"], ["CCO", "CCC"])
    assert g["Validity"] == 0.5
    targets = [list(molsynth.descriptors(s, names=["BalabanJ", "ExactMolWt", "MolLogP", "TPSA", "QED"]).values())
               for s in ["CCO", "c1ccccc1O", "CC(=O)Nc1ccc(O)cc1"]]
    mc = molsynth.multiconstraint_metrics(targets, ["CCO", "c1ccccc1O", "CC(=O)Nc1ccc(O)cc1"])
    assert mc["TPSA RMSE"] == 0.0


def test_synthesize():
    pairs = [("CCO", "The molecule is ethanol."), ("c1ccccc1O", "The molecule is phenol."),
             ("CC(=O)O", "The molecule is acetic acid.")]
    recs = molsynth.synthesize(pairs, 2, tasks=["mc", "mcmg"], seed=3)
    assert [r["task"] for r in recs].count("MC") == 2
    assert all(set(r) == {"task", "instruction", "response", "source_smiles"} for r in recs)
    assert recs == molsynth.synthesize(pairs, 2, tasks=["mc", "mcmg"], seed=3)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
    print("molsynth", molsynth.__version__, "smoke test ok")
