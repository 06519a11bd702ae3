import json

import numpy as np
import pytest

from netspace.corpus import CorpusSpec, load_corpus_json, net_corpus, parse_corpus_spec, random_net, su2_corpus, torus_corpus
from netspace.errors import ConfigError, DomainError
from netspace.lattice import make_su2_dual


def test_parse_corpus_specs():
    assert parse_corpus_spec("deterministic") == CorpusSpec(kind="deterministic")
    assert parse_corpus_spec("random:50:seed=7") == CorpusSpec(kind="random", size=50, seed=7)
    assert parse_corpus_spec("random:5:seed=1:decay=2").decay == 2
    assert parse_corpus_spec("mixed:20:seed=0").size == 20
    assert parse_corpus_spec("file:coefficients.json").path == "coefficients.json"
    assert parse_corpus_spec("random:5:seed=1:scale=2.5").scale == 2.5
    assert parse_corpus_spec("deterministic:scale=3") == CorpusSpec(kind="deterministic", scale=3.0)


@pytest.mark.parametrize(
    "spec",
    ["gaussian:10", "random", "random:ten:seed=1", "random:5:seed=1:decay=7", "random:5:colour=red", "mixed:5:seed=1:decay=1", "random:-3", "random:5:scale=0", "random:5:scale=inf", "deterministic:seed=2"],
)
def test_invalid_corpus_specs(spec):
    with pytest.raises(ConfigError):
        parse_corpus_spec(spec)


def test_scaled_corpora_multiply_every_member():
    lattice = make_su2_dual(1)
    plain = net_corpus("mixed:6:seed=2", lattice)
    scaled = net_corpus("mixed:6:seed=2:scale=3", lattice)
    assert [name for name, _ in scaled] == [name for name, _ in plain]
    for (_, F), (_, G) in zip(plain, scaled):
        assert all(np.allclose(3.0 * a, b, rtol=1e-15) for a, b in zip(F.matrices, G.matrices))
    su2 = su2_corpus("deterministic:scale=0.5", two_l_max=4)
    assert su2[0][1].coeffs == {0: 0.5}
    torus = torus_corpus("random:2:seed=1:scale=2", bandwidth=3)
    reference = torus_corpus("random:2:seed=1", bandwidth=3)
    assert np.allclose(torus[1][1].grid, 2.0 * reference[1][1].grid, rtol=1e-15)


def test_decays_cycle_without_an_explicit_decay():
    spec = parse_corpus_spec("random:6:seed=0")
    assert [spec.decay_for(i) for i in range(6)] == [0, 1, 2, 0, 1, 2]
    assert parse_corpus_spec("random:3:seed=0:decay=1").decay_for(2) == 1


def test_torus_mixed_corpus():
    corpus = torus_corpus("mixed:10:seed=0", bandwidth=8)
    names = [name for name, _ in corpus]
    assert len(corpus) == 10
    assert names[:6] == ["constant", "exponential:m=1", "exponential:m=8", "dirichlet:N=2", "dirichlet:N=4", "fejer:N=4"]
    assert names[6:] == ["random[0]:decay=0", "random[1]:decay=1", "random[2]:decay=2", "random[3]:decay=0"]
    assert all(f.M == 36 for _, f in corpus)


def test_torus_corpus_is_reproducible():
    first = torus_corpus("random:3:seed=5", bandwidth=4, grid_size=64)
    second = torus_corpus("random:3:seed=5", bandwidth=4, grid_size=64)
    for (_, f), (_, g) in zip(first, second):
        assert np.array_equal(f.grid, g.grid)
    other = torus_corpus("random:3:seed=6", bandwidth=4, grid_size=64)
    assert not np.array_equal(first[0][1].grid, other[0][1].grid)


def test_torus_corpus_needs_bandwidth():
    with pytest.raises(DomainError):
        torus_corpus("deterministic", bandwidth=0)


def test_su2_deterministic_corpus():
    corpus = su2_corpus("deterministic", two_l_max=6)
    names = [name for name, _ in corpus]
    assert names == ["character:l=0", "character:l=1/2", "character:2l=6", "dirichlet:2k=3", "dirichlet:2k=6", "fejer:2k=6"]
    dirichlet = dict(corpus)["dirichlet:2k=3"]
    assert dirichlet.coeffs == {0: 1.0, 1: 2.0, 2: 3.0, 3: 4.0}


def test_random_net_decay(rng):
    lattice = make_su2_dual(2)
    F = random_net(lattice, rng, decay=2, diagonal=True)
    assert F.matrices[4].shape == (5, 5)
    assert not np.any(F.matrices[4] - np.diag(np.diag(F.matrices[4])))
    real = random_net(lattice, rng, real=True)
    assert real.is_real()


def test_net_corpus():
    lattice = make_su2_dual(1)
    corpus = net_corpus("mixed:6:seed=2", lattice)
    assert [name for name, _ in corpus][:4] == ["minimal-element", "unit-traces", "alternating-traces", "dirichlet-traces"]
    assert len(corpus) == 6
    with pytest.raises(ConfigError):
        net_corpus("file:nets.json", lattice)


def test_corpus_files(tmp_path):
    torus_file = tmp_path / "torus.json"
    torus_file.write_text(json.dumps([{"name": "wave", "coefficients": {"1": [1.0, 0.0], "-1": [0.0, 1.0]}}]), encoding="utf-8")
    (name, f), = torus_corpus(f"file:{torus_file}", bandwidth=4)
    assert name == "wave"
    assert f.bandwidth == 1

    su2_file = tmp_path / "su2.json"
    su2_file.write_text(json.dumps([{"0": [1.0, 0.0], "3": [0.5, -0.5]}]), encoding="utf-8")
    (name, g), = su2_corpus(f"file:{su2_file}", two_l_max=4)
    assert name == "file[0]"
    assert g.coeffs == {0: 1.0, 3: 0.5 - 0.5j}

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"1,2": [1.0, 0.0]}]), encoding="utf-8")
    with pytest.raises(DomainError):
        load_corpus_json(bad, "torus", n=1)
