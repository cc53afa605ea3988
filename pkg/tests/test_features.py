import math

import numpy as np
import pytest

from hatewatch import features as ft


def brute_force_tfidf(docs, doc, ngram_range=(1, 2)):
    """Independent tf·idf oracle: literal counting, no shared code paths."""
    def grams(tokens):
        out = []
        for n in range(ngram_range[0], ngram_range[1] + 1):
            out += [" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]
        return out

    vocab = sorted({g for d in docs for g in grams(d)})
    n = len(docs)
    weights = {}
    for g in set(grams(doc)) & set(vocab):
        tf = grams(doc).count(g)
        df = sum(g in set(grams(d)) for d in docs)
        weights[vocab.index(g)] = tf * (math.log((1 + n) / (1 + df)) + 1.0)
    norm = math.sqrt(sum(w * w for w in weights.values()))
    return {i: w / norm for i, w in weights.items()} if norm else {}


class TestFit:
    def test_single_doc_idf_is_one(self):
        vocab = ft.fit([["a", "b"]], ngram_range=(1, 1))
        assert vocab.idf["a"] == pytest.approx(math.log(2 / 2) + 1.0)
        assert vocab.idf["a"] == pytest.approx(1.0)

    def test_three_docs_one_hit(self):
        vocab = ft.fit([["rare"], ["x"], ["y"]], ngram_range=(1, 1))
        assert vocab.idf["rare"] == pytest.approx(math.log(4 / 2) + 1.0)
        assert vocab.idf["rare"] == pytest.approx(1.6931471805599454)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            ft.fit([])

    def test_indices_dense_sorted(self):
        vocab = ft.fit([["b", "a"], ["c", "a"]], ngram_range=(1, 1))
        assert vocab.index == {"a": 0, "b": 1, "c": 2}

    def test_bigrams_included(self):
        vocab = ft.fit([["a", "b", "c"]])
        assert "a b" in vocab.index and "b c" in vocab.index

    def test_min_df_filters(self):
        vocab = ft.fit([["a", "b"], ["a", "c"]], ngram_range=(1, 1), min_df=2)
        assert set(vocab.index) == {"a"}

    def test_max_size_by_df_then_lex(self):
        docs = [["a", "b", "z"], ["a", "b"], ["b"]]
        vocab = ft.fit(docs, ngram_range=(1, 1), max_size=2)
        # df: b=3, a=2, z=1 → keep b, a; indices assigned in sorted order
        assert set(vocab.index) == {"a", "b"}
        assert vocab.index == {"a": 0, "b": 1}

    def test_max_size_lexicographic_tiebreak(self):
        docs = [["b"], ["a"]]
        vocab = ft.fit(docs, ngram_range=(1, 1), max_size=1)
        assert set(vocab.index) == {"a"}

    def test_idf_monotone_in_df(self):
        base = [["t"], ["x"]]
        more = base + [["t", "y"]]
        v1 = ft.fit(base, ngram_range=(1, 1))
        v2 = ft.fit(more, ngram_range=(1, 1))
        # adding a document containing t must not increase idf(t) beyond
        # what the +1 smoothing of N alone adds; compare at equal N
        same_n = base + [["y"]]
        v3 = ft.fit(same_n, ngram_range=(1, 1))
        assert v2.idf["t"] <= v3.idf["t"]


class TestTransform:
    def test_oov_is_zero_vector(self):
        vocab = ft.fit([["a"]], ngram_range=(1, 1))
        vec = ft.transform(vocab, ["zzz", "qqq"])
        assert vec.pairs == ()
        assert vec.norm() == 0.0

    def test_unit_norm(self):
        vocab = ft.fit([["a", "b"], ["b", "c"]])
        vec = ft.transform(vocab, ["a", "b", "b"])
        assert vec.norm() == pytest.approx(1.0, abs=1e-9)

    def test_deterministic(self):
        vocab = ft.fit([["a", "b"], ["b", "c"]])
        assert ft.transform(vocab, ["a", "b"]) == ft.transform(vocab, ["a", "b"])

    def test_indices_strictly_increasing(self):
        vocab = ft.fit([["a", "b", "c", "d"]])
        vec = ft.transform(vocab, ["a", "b", "c", "d"])
        idx = [i for i, _ in vec.pairs]
        assert idx == sorted(set(idx))

    def test_matches_brute_force_oracle_on_toy(self):
        docs = [["a", "a", "b"], ["b", "c"], ["a", "c", "c"]]
        vocab = ft.fit(docs, ngram_range=(1, 1))
        vec = dict(ft.transform(vocab, ["a", "a", "b"]).pairs)
        oracle = brute_force_tfidf([d for d in docs], ["a", "a", "b"], (1, 1))
        assert set(vec) == set(oracle)
        for i in oracle:
            assert vec[i] == pytest.approx(oracle[i], abs=1e-12)

    def test_matches_brute_force_on_50_random_corpora(self):
        rng = np.random.default_rng(7)
        alphabet = [f"w{i}" for i in range(30)]
        for _ in range(50):
            n_docs = int(rng.integers(1, 21))
            docs = [
                [alphabet[int(k)] for k in rng.integers(0, 30, size=int(rng.integers(1, 12)))]
                for _ in range(n_docs)
            ]
            vocab = ft.fit(docs, ngram_range=(1, 2))
            doc = docs[int(rng.integers(0, n_docs))]
            got = dict(ft.transform(vocab, doc).pairs)
            want = brute_force_tfidf(docs, doc, (1, 2))
            assert set(got) == set(want)
            for i in want:
                assert abs(got[i] - want[i]) < 1e-12


class TestProfanityFeatures:
    def test_zero_block(self, lexicons):
        assert ft.profanity_features(["have", "a", "nice", "day"], lexicons) == (0.0, 0.0, 0.0)

    def test_two_hits_sum(self, lexicons):
        # shit=0.70, motherfucker=0.90 in the bundled en lexicon
        out = ft.profanity_features(["shit", "motherfucker"], lexicons)
        assert out[0] == 2.0
        assert out[1] == pytest.approx(1.6)
        assert out[2] == 0.0

    def test_censored_only(self, lexicons):
        assert ft.profanity_features(["<censored>"], lexicons) == (0.0, 0.0, 1.0)

    def test_codemix_hit(self, lexicons):
        count, total, _ = ft.profanity_features(["madarchod"], lexicons)
        assert count == 1.0
        assert total == pytest.approx(0.98)


class TestCsr:
    def test_shape_and_aux_block(self, lexicons):
        vocab = ft.fit([["a", "b"], ["b", "c"]], ngram_range=(1, 1))
        vecs = [
            ft.transform(vocab, ["a", "b"], lexicons),
            ft.transform(vocab, ["shit", "b"], lexicons),
        ]
        X = ft.to_csr(vecs, vocab.size)
        assert X.shape == (2, vocab.size + ft.AUX_DIM)
        assert X[1, vocab.size] == 1.0  # profane count column
        assert X[1, vocab.size + 1] == pytest.approx(0.70)

    def test_no_aux_when_absent(self):
        vocab = ft.fit([["a"]], ngram_range=(1, 1))
        X = ft.to_csr([ft.transform(vocab, ["a"])], vocab.size)
        assert X.shape == (1, vocab.size)

    def test_row_norms_unit(self):
        vocab = ft.fit([["a", "b"], ["b", "c"]], ngram_range=(1, 1))
        X = ft.to_csr([ft.transform(vocab, ["a", "b"])], vocab.size)
        assert np.linalg.norm(X.toarray()[0]) == pytest.approx(1.0, abs=1e-9)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        docs = [["a", "b"], ["b", "c"], ["a", "c", "d"]]
        vocab = ft.fit(docs, ngram_range=(1, 2), min_df=1, max_size=10)
        path = tmp_path / "vocab.tsv"
        ft.save_vocabulary(vocab, path)
        loaded = ft.load_vocabulary(path)
        assert loaded.index == vocab.index
        assert loaded.df == vocab.df
        assert loaded.n_docs == vocab.n_docs
        assert loaded.ngram_range == vocab.ngram_range
        for ng in vocab.idf:
            assert loaded.idf[ng] == vocab.idf[ng]  # exact via repr round-trip

    def test_transform_identical_after_reload(self, tmp_path):
        docs = [["x", "y", "z"], ["y", "z"]]
        vocab = ft.fit(docs)
        path = tmp_path / "vocab.tsv"
        ft.save_vocabulary(vocab, path)
        loaded = ft.load_vocabulary(path)
        assert ft.transform(loaded, ["x", "y"]) == ft.transform(vocab, ["x", "y"])
