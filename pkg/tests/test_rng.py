import pytest

from xfersel.rng import subsample_indices, word

from oracles import subsample_reference, word_reference


def test_words_match_documented_algorithm():
    for seed in (0, 1, 42, 2**64 - 1):
        for i in range(20):
            assert word(seed, i) == word_reference(seed, i)


def test_subsample_matches_reference_sampler():
    for seed in (7, 42, 123456789):
        for n, k in ((4, 2), (10, 3), (100, 17), (4096, 256)):
            assert subsample_indices(n, k, seed) == \
                subsample_reference(n, k, seed)


def test_subsample_full_when_k_at_least_n():
    assert subsample_indices(5, 5, 1) == [0, 1, 2, 3, 4]
    assert subsample_indices(5, 9, 1) == [0, 1, 2, 3, 4]


def test_subsample_properties():
    out = subsample_indices(1000, 64, 99)
    assert len(out) == 64
    assert len(set(out)) == 64
    assert out == sorted(out)
    assert all(0 <= i < 1000 for i in out)
    # deterministic
    assert out == subsample_indices(1000, 64, 99)
    # seed-sensitive
    assert out != subsample_indices(1000, 64, 100)


def test_subsample_rejects_negative():
    with pytest.raises(ValueError):
        subsample_indices(-1, 2, 0)
