import numpy as np
import pytest

from garden.dedup import (
    LshIndex,
    ShingleSet,
    dedup_corpus,
    estimate_jaccard,
    exact_jaccard,
    minhash,
    shingles,
)
from garden.errors import GardenError
from garden.textutil import tokenize

from conftest import make_docs


def hash_set(ids, seed=12345):
    """Synthetic shingle hashes: distinct 64-bit values from a fixed RNG."""
    rng = np.random.default_rng(seed)
    universe = rng.integers(0, 2**63, size=4096, dtype=np.uint64)
    return ShingleSet(doc_id="synthetic", hashes=frozenset(int(universe[i]) for i in ids))


def pair_with_jaccard(j):
    """Two sets with exact Jaccard j, by construction on the shared count."""
    sizes = {0.0: (40, 0), 0.25: (40, 16), 0.5: (39, 26), 0.75: (35, 30), 1.0: (40, 40)}
    m, shared = sizes[j]
    a = hash_set(range(m))
    b = hash_set(list(range(shared)) + list(range(1000, 1000 + m - shared)))
    assert exact_jaccard(a, b) == pytest.approx(j, abs=1e-12)
    return a, b


class TestShingles:
    def test_ten_tokens_one_shingle(self):
        text = " ".join(f"w{i}" for i in range(10))
        assert len(shingles(text, n=10).hashes) == 1

    def test_twelve_tokens_three_shingles(self):
        text = " ".join(f"w{i}" for i in range(12))
        assert len(shingles(text, n=10).hashes) == 3

    def test_short_text_single_degenerate_shingle(self):
        assert len(shingles("just four little tokens", n=10).hashes) == 1

    def test_empty_text_empty_set(self):
        assert shingles("", n=10).hashes == frozenset()

    def test_whitespace_variants_shingle_identically(self):
        a = "alpha beta   gamma\tdelta epsilon zeta eta theta iota kappa lambda"
        b = "alpha  beta gamma delta\n\nepsilon zeta eta theta iota kappa  lambda"
        assert tokenize(a) == tokenize(b)  # tokenizer oracle
        assert shingles(a).hashes == shingles(b).hashes

    def test_seed_changes_hashes(self):
        text = "one two three"
        assert shingles(text, seed=1).hashes != shingles(text, seed=2).hashes

    def test_char_mode(self):
        got = shingles("abcd", n=3, mode="char")
        assert len(got.hashes) == 2  # "abc", "bcd"


class TestMinhash:
    def test_deterministic(self):
        s = hash_set(range(30))
        a = minhash(s, seed=7)
        b = minhash(s, seed=7)
        assert np.array_equal(a.values, b.values)
        assert a.num_perm == 128

    def test_union_is_componentwise_min(self):
        a = hash_set(range(20))
        b = hash_set(range(15, 40))
        union = ShingleSet(doc_id="u", hashes=a.hashes | b.hashes)
        sig_a, sig_b, sig_u = (minhash(x, seed=3) for x in (a, b, union))
        assert np.array_equal(sig_u.values, np.minimum(sig_a.values, sig_b.values))

    def test_empty_set_rejected(self):
        with pytest.raises(GardenError) as err:
            minhash(ShingleSet(doc_id="e", hashes=frozenset()))
        assert err.value.code == "no_shingles"

    def test_mean_match_rate_estimates_jaccard(self):
        # Over 50 seeds the mean component-match rate converges to J.
        for j in [0.0, 0.25, 0.5, 0.75, 1.0]:
            a, b = pair_with_jaccard(j)
            estimates = [
                estimate_jaccard(minhash(a, seed=s), minhash(b, seed=s)) for s in range(50)
            ]
            assert abs(sum(estimates) / len(estimates) - j) <= 0.04


class TestEstimateJaccard:
    def test_identical_signatures(self):
        sig = minhash(hash_set(range(25)), seed=1)
        assert estimate_jaccard(sig, sig) == 1.0

    def test_disjoint_sets_near_zero(self):
        a = minhash(hash_set(range(40)), seed=5)
        b = minhash(hash_set(range(100, 140)), seed=5)
        assert estimate_jaccard(a, b) <= 0.02

    def test_seed_mismatch_rejected(self):
        s = hash_set(range(10))
        with pytest.raises(GardenError) as err:
            estimate_jaccard(minhash(s, seed=1), minhash(s, seed=2))
        assert err.value.code == "signature_mismatch"

    def test_half_jaccard_within_bound_95_percent(self):
        a, b = pair_with_jaccard(0.5)
        hits = sum(
            1
            for s in range(200)
            if abs(estimate_jaccard(minhash(a, seed=s), minhash(b, seed=s)) - 0.5) <= 0.12
        )
        assert hits >= 190


class TestExactJaccard:
    def test_identical(self):
        s = hash_set(range(12))
        assert exact_jaccard(s, s) == 1.0

    def test_disjoint(self):
        assert exact_jaccard(hash_set(range(5)), hash_set(range(10, 15))) == 0.0

    def test_half_overlap(self):
        a = ShingleSet(doc_id="a", hashes=frozenset({1, 2, 3}))
        b = ShingleSet(doc_id="b", hashes=frozenset({2, 3, 4}))
        assert exact_jaccard(a, b) == 0.5

    def test_both_empty(self):
        e = ShingleSet(doc_id="e", hashes=frozenset())
        assert exact_jaccard(e, e) == 0.0


class TestLshIndex:
    def test_banding_geometry(self):
        index = LshIndex(bands=16, num_perm=128)
        assert index.rows == 8
        assert index.implied_threshold == pytest.approx((1 / 16) ** (1 / 8), abs=1e-12)
        assert abs(index.implied_threshold - 0.7071) < 1e-3

    def test_identical_signatures_share_buckets(self):
        index = LshIndex()
        sig = minhash(hash_set(range(30)), seed=2)
        index.insert(0, sig)
        index.insert(1, sig)
        assert (0, 1) in index.candidate_pairs()

    def test_bad_banding_rejected(self):
        with pytest.raises(GardenError):
            LshIndex(bands=7, num_perm=128)


class TestDedupCorpus:
    def test_three_identical_docs(self):
        text = " ".join(f"tok{i}" for i in range(30))
        docs = make_docs([text, text, text])
        kept, clusters, report = dedup_corpus(docs, seed=1)
        assert len(kept) == 1
        assert kept[0].id == docs[0].id
        assert len(clusters) == 1
        assert clusters[0].members == [d.id for d in docs]
        assert clusters[0].representative == docs[0].id
        assert report["dropped"] == 2

    def test_disjoint_docs_all_kept(self):
        docs = make_docs([" ".join(f"d{i}w{j}" for j in range(25)) for i in range(8)])
        kept, clusters, report = dedup_corpus(docs, seed=1)
        assert len(kept) == 8
        assert clusters == []
        assert report["dropped"] == 0

    def test_deterministic_and_order_preserving(self):
        texts = []
        for i in range(20):
            base = [f"p{i}t{j}" for j in range(30)]
            texts.append(" ".join(base))
            if i % 4 == 0:
                texts.append(" ".join(base + ["tail"]))
        docs = make_docs(texts)
        kept1, clusters1, _ = dedup_corpus(docs, seed=9)
        kept2, clusters2, _ = dedup_corpus(docs, seed=9)
        assert [d.id for d in kept1] == [d.id for d in kept2]
        assert [c.members for c in clusters1] == [c.members for c in clusters2]
        input_order = {d.id: i for i, d in enumerate(docs)}
        positions = [input_order[d.id] for d in kept1]
        assert positions == sorted(positions)

    def test_tokenless_docs_exempt(self):
        docs = make_docs(["!!!", "???", "real words here we go again ok fine ten tokens"])
        kept, clusters, _ = dedup_corpus(docs, seed=0)
        assert len(kept) == 3
        assert clusters == []

    def test_empty_corpus(self):
        kept, clusters, report = dedup_corpus([], seed=0)
        assert kept == [] and clusters == []
        assert report["input_count"] == 0

    def test_bad_threshold(self):
        with pytest.raises(GardenError):
            dedup_corpus([], threshold=0.0)

    def test_planted_pairs_found_small(self):
        # 20 near-dup pairs among 60 distractors, disjoint token universes.
        texts, pair_ids = [], []
        for i in range(20):
            base = [f"pair{i}tok{j}" for j in range(50)]
            a, b = len(texts), len(texts) + 1
            texts.append(" ".join(base))
            texts.append(" ".join(base + [f"pair{i}extra"]))
            pair_ids.append((a, b))
        for i in range(60):
            texts.append(" ".join(f"lone{i}tok{j}" for j in range(40)))
        docs = make_docs(texts)
        sets = [shingles(t, seed=4) for t in texts]
        for a, b in pair_ids:
            assert exact_jaccard(sets[a], sets[b]) >= 0.8
        kept, clusters, _ = dedup_corpus(docs, threshold=0.7, seed=4)
        by_cluster = {m: i for i, c in enumerate(clusters) for m in c.members}
        found = sum(
            1
            for a, b in pair_ids
            if docs[a].id in by_cluster and by_cluster.get(docs[b].id) == by_cluster[docs[a].id]
        )
        assert found == 20
        assert len(kept) == 80
