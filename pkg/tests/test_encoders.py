import numpy as np
import pytest

from bindkit import espf
from bindkit.encoders import (CompatibilityError, EncoderKind, FeatureContext,
                              ModelSpec, UnknownEncoder, compose, valid_dti_pairs,
                              validate_combination, MissingContext,
                              SMILES_ALPHABET_SIZE)
from bindkit.nn import autograd as ag
from bindkit.nn.autograd import backward

DRUGS = ["CCO", "CC(=O)O", "c1ccccc1", "C1CC1N"]
PROTS = ["MKTAYIAKQRQISFVKSHFSRQLEERLGLIEVQA" * 2,
         "ACDEFGHIKLMNPQRSTVWYACDEFGHIKLMNPQRSTVWY",
         "GGGGSGGGGSAAAALLLLKKKKEEEEFFFFWWWWYYYYHH",
         "MKKKEEEDDDRRRHHHCCCAAAVVVIIILLLMMMFFFYYW"]


def small_ctx():
    return FeatureContext(
        drug_vocab=espf.train_vocab(DRUGS, 40, alphabet="drug", max_tokens=16),
        protein_vocab=espf.train_vocab(PROTS, 60, alphabet="protein", max_tokens=32),
    )


def test_exactly_56_valid_pairs():
    pairs = valid_dti_pairs()
    assert len(pairs) == 56
    assert ("MPNN", "CNN") in pairs


def test_protein_mpnn_is_incompatible():
    with pytest.raises(CompatibilityError):
        EncoderKind("protein", "MPNN")


def test_unknown_encoder_name():
    with pytest.raises(UnknownEncoder):
        EncoderKind("drug", "GNN-9000")


def test_validate_task_arity():
    with pytest.raises(CompatibilityError):
        validate_combination(ModelSpec(task="DTI", drug_encoder="Morgan-MLP"))
    with pytest.raises(CompatibilityError):
        validate_combination(ModelSpec(task="DrugProperty", drug_encoder="CNN",
                                       target_encoder="CNN"))
    validate_combination(ModelSpec(task="DrugProperty", drug_encoder="CNN"))
    validate_combination(ModelSpec(task="PPI", target_encoder="AAC-MLP"))


def test_mpnn_drug_with_cnn_protein_is_valid():
    validate_combination(ModelSpec(task="DTI", drug_encoder="MPNN", target_encoder="CNN"))


def test_unknown_hyperparam_rejected():
    spec = ModelSpec(task="DTI", drug_encoder="Morgan-MLP", target_encoder="AAC-MLP",
                     hyperparams={"warp_factor": 9})
    with pytest.raises(Exception) as err:
        spec.merged_hp()
    assert "warp_factor" in str(err.value)


def test_transformer_requires_vocab():
    spec = ModelSpec(task="DTI", drug_encoder="Transformer", target_encoder="AAC-MLP")
    with pytest.raises(MissingContext):
        compose(spec, FeatureContext(), seed=0)


def test_decoder_input_is_concat_of_latents():
    spec = ModelSpec(task="DTI", drug_encoder="Morgan-MLP", target_encoder="AAC-MLP",
                     hyperparams={"latent_dim": 32, "mlp_hidden": (64, 32)},
                     decoder_hidden=(24, 12))
    model = compose(spec, seed=0)
    assert model.decoder.layers[0].in_dim == 64  # 32 + 32


def test_property_task_single_branch():
    spec = ModelSpec(task="DrugProperty", drug_encoder="Morgan-MLP",
                     hyperparams={"latent_dim": 16, "mlp_hidden": (32,)},
                     decoder_hidden=(8,))
    model = compose(spec, seed=0)
    assert len(model.branches) == 1
    out = model(DRUGS)
    assert out.shape == (4,)


SMALL_HP = {
    "latent_dim": 16, "mlp_hidden": (32,), "transformer_dim": 16,
    "transformer_heads": 2, "transformer_blocks": 1, "transformer_ff": 32,
    "rnn_hidden": 8, "mpnn_hidden": 8, "mpnn_steps": 2, "dropout": 0.0,
    "drug_maxlen": 40, "protein_maxlen": 120,
}


@pytest.mark.parametrize("drug_enc,protein_enc", [
    ("Morgan-MLP", "AAC-MLP"),
    ("Daylight-MLP", "QuasiSeq-MLP"),
    ("CNN", "CNN"),
    ("CNN-RNN", "CNN-RNN"),
    ("Transformer", "Transformer"),
    ("MPNN", "CNN"),
    ("Morgan-MLP", "PseAAC-MLP"),
    ("MPNN", "ConjointTriad-MLP"),
])
def test_forward_backward_shapes(drug_enc, protein_enc):
    spec = ModelSpec(task="DTI", drug_encoder=drug_enc, target_encoder=protein_enc,
                     decoder_hidden=(16,), hyperparams=dict(SMALL_HP))
    model = compose(spec, small_ctx(), seed=1)
    out = model(DRUGS, PROTS)
    assert out.shape == (4,)
    backward(ag.tsum(out))
    grads = [p.grad for p in model.parameters()]
    assert all(g is not None for g in grads)
    assert any(np.abs(g).sum() > 0 for g in grads)


def test_encoder_swap_preserves_interface():
    scores = {}
    for drug_enc in ("Morgan-MLP", "MPNN"):
        spec = ModelSpec(task="DTI", drug_encoder=drug_enc, target_encoder="AAC-MLP",
                         decoder_hidden=(16,), hyperparams=dict(SMALL_HP))
        model = compose(spec, small_ctx(), seed=1)
        scores[drug_enc] = model(DRUGS, PROTS)
    assert all(v.shape == (4,) for v in scores.values())


def test_mpnn_permutation_equivariance():
    spec = ModelSpec(task="DrugProperty", drug_encoder="MPNN",
                     decoder_hidden=(16,), hyperparams=dict(SMALL_HP))
    model = compose(spec, seed=2).eval()
    # same molecule written with different traversal orders
    with ag.no_grad():
        a = model(["C(=O)(O)CC"]).data
        b = model(["CCC(O)=O"]).data
    assert np.allclose(a, b, atol=1e-5)


def test_cnn_padding_insensitivity():
    spec = ModelSpec(task="DTI", drug_encoder="CNN", target_encoder="CNN",
                     decoder_hidden=(16,), hyperparams=dict(SMALL_HP))
    model = compose(spec, seed=3).eval()
    with ag.no_grad():
        # same pair alone vs batched with a much longer partner (more padding)
        alone = model([DRUGS[0]], [PROTS[0]]).data[0]
        padded = model([DRUGS[0], DRUGS[2] * 3], [PROTS[0], PROTS[1]]).data[0]
    assert abs(alone - padded) < 1e-5


def test_transformer_padding_insensitivity():
    ctx = small_ctx()
    spec = ModelSpec(task="DTI", drug_encoder="Transformer", target_encoder="Transformer",
                     decoder_hidden=(16,), hyperparams=dict(SMALL_HP))
    model = compose(spec, ctx, seed=4).eval()
    with ag.no_grad():
        alone = model([DRUGS[0]], [PROTS[1][:34]]).data[0]
        padded = model([DRUGS[0], DRUGS[1]], [PROTS[1][:34], PROTS[0]]).data[0]
    assert abs(alone - padded) < 1e-5


def test_batch_of_identical_pairs_identical_scores():
    spec = ModelSpec(task="DTI", drug_encoder="Morgan-MLP", target_encoder="AAC-MLP",
                     decoder_hidden=(16,), hyperparams=dict(SMALL_HP))
    model = compose(spec, seed=5).eval()
    with ag.no_grad():
        out = model([DRUGS[0]] * 3, [PROTS[0]] * 3).data
    assert out[0] == out[1] == out[2]


def test_smiles_alphabet_is_64():
    assert SMILES_ALPHABET_SIZE == 64
