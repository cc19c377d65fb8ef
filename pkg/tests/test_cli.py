import numpy as np
import pytest

from bindkit.cli import main

PROT_A = "MKTAYIAKQRQISFVKSHFSRQLEERLGLIEVQA"
PROT_B = "ACDEFGHIKLMNPQRSTVWYACDEFGHIKLMNPQRSTVWY"


@pytest.fixture
def dataset(tmp_path):
    drugs = ["CCO", "CCC", "CCN", "c1ccccc1", "CCCl", "C=O"]
    rows = ["smiles\ttarget_sequence\tlabel"]
    for i, d in enumerate(drugs):
        for j, p in enumerate((PROT_A, PROT_B)):
            rows.append(f"{d}\t{p}\t{0.2 * i + 0.1 * j}")
    path = tmp_path / "data.tsv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def test_data_split(dataset, tmp_path, capsys):
    out = tmp_path / "splits"
    code = main(["data", "split", "--data", str(dataset), "--strategy", "random",
                 "--fractions", "0.5,0.25,0.25", "--seed", "7", "--out", str(out)])
    assert code == 0
    assert (out / "train.tsv").exists() and (out / "test.tsv").exists()
    train_lines = (out / "train.tsv").read_text().strip().splitlines()
    assert len(train_lines) == 1 + 6  # header + floor(0.5*12)


def test_vocab_train(dataset, tmp_path):
    out = tmp_path / "vocab.txt"
    code = main(["vocab", "train", "--input", str(dataset), "--alphabet", "protein",
                 "--size", "30", "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith("#espf\tprotein")


def test_train_predict_eval_cycle(dataset, tmp_path, capsys):
    model_dir = tmp_path / "model"
    code = main(["train", "--train", str(dataset), "--valid", str(dataset),
                 "--drug-encoder", "Morgan-MLP", "--target-encoder", "AAC-MLP",
                 "--epochs", "2", "--batch-size", "8", "--lr", "0.001",
                 "--out", str(model_dir)])
    assert code == 0
    assert (model_dir / "weights.bin").exists()
    capsys.readouterr()

    code = main(["predict", "--model", str(model_dir), "--smiles", "CCO",
                 "--target", PROT_A])
    assert code == 0
    printed = capsys.readouterr().out.strip()
    float(printed)  # one numeric score on stdout

    code = main(["eval", "--model", str(model_dir), "--data", str(dataset)])
    assert code == 0
    out = capsys.readouterr().out
    assert "mse" in out and "concordance_index" in out


def test_unknown_encoder_lists_valid_names(dataset, tmp_path, capsys):
    code = main(["train", "--train", str(dataset), "--valid", str(dataset),
                 "--drug-encoder", "Quantum-MLP", "--target-encoder", "AAC-MLP",
                 "--out", str(tmp_path / "m")])
    assert code == 1
    err = capsys.readouterr().err
    for name in ("Morgan-MLP", "Pubchem-MLP", "Daylight-MLP", "Descriptor2D-MLP",
                 "CNN", "CNN-RNN", "Transformer", "MPNN", "AAC-MLP", "PseAAC-MLP",
                 "ConjointTriad-MLP", "QuasiSeq-MLP"):
        assert name in err
    assert "15" in err


def test_usage_error_exit_code(capsys):
    assert main(["train"]) == 1  # missing required arguments


def test_missing_file_is_data_error(tmp_path, capsys):
    code = main(["eval", "--model", str(tmp_path / "nope"), "--data", str(tmp_path / "x.tsv")])
    assert code == 2


def test_bad_header_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("a\tb\tc\n1\t2\t3\n", encoding="utf-8")
    code = main(["data", "split", "--data", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2


def test_predict_malformed_smiles_data_error(dataset, tmp_path, capsys):
    model_dir = tmp_path / "model"
    main(["train", "--train", str(dataset), "--valid", str(dataset),
          "--drug-encoder", "Morgan-MLP", "--target-encoder", "AAC-MLP",
          "--epochs", "0", "--out", str(model_dir)])
    code = main(["predict", "--model", str(model_dir), "--smiles", "C1CC",
                 "--target", PROT_A])
    assert code == 2
    assert "byte" in capsys.readouterr().err


def test_repurpose_cli(dataset, tmp_path, capsys):
    lib = tmp_path / "lib.tsv"
    lib.write_text("id\tname\tsmiles\nd1\tethanol\tCCO\nd2\tbenzene\tc1ccccc1\n",
                   encoding="utf-8")
    config = tmp_path / "cfg"
    config.write_text("epochs = 1\nbatch_size = 8\nlatent_dim = 8\n"
                      "decoder_hidden = 8\ndropout = 0.0\n", encoding="utf-8")
    out = tmp_path / "ranked.tsv"
    code = main(["--config", str(config), "repurpose", "--target", PROT_A,
                 "--library", str(lib), "--train-data", str(dataset),
                 "--out", str(out)])
    assert code == 0
    text = out.read_text(encoding="utf-8")
    assert "# ranked screening list" in text
    assert "\nrank\tid\tname\taggregate" in text


def test_screen_cli(dataset, tmp_path, capsys):
    targets = tmp_path / "targets.tsv"
    targets.write_text(f"id\tname\tsequence\np1\tkinase-a\t{PROT_A}\np2\tkinase-b\t{PROT_B}\n",
                       encoding="utf-8")
    config = tmp_path / "cfg"
    config.write_text("epochs = 1\nbatch_size = 8\nlatent_dim = 8\n"
                      "decoder_hidden = 8\ndropout = 0.0\n", encoding="utf-8")
    out = tmp_path / "ranked.tsv"
    code = main(["--config", str(config), "screen", "--smiles", "CCO",
                 "--targets", str(targets), "--train-data", str(dataset),
                 "--out", str(out)])
    assert code == 0
    lines = [l for l in out.read_text(encoding="utf-8").splitlines()
             if l and not l.startswith("#")]
    assert len(lines) == 3  # header + two targets


def test_hyperopt_cli(dataset, tmp_path, capsys):
    space = tmp_path / "space.txt"
    space.write_text("lr = 0.001,0.005\nbatch_size = 8\n", encoding="utf-8")
    config = tmp_path / "cfg"
    config.write_text("epochs = 1\nlatent_dim = 8\ndecoder_hidden = 8\n", encoding="utf-8")
    code = main(["--config", str(config), "hyperopt", "--train", str(dataset),
                 "--valid", str(dataset), "--drug-encoder", "Morgan-MLP",
                 "--target-encoder", "AAC-MLP", "--space", str(space),
                 "--budget", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("trial\t")
    assert "best\t" in out
