import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sasoca import genome as gn
from oracles import straight_decode

TOTAL_1D = 22


def spans_as_tuples(spans):
    return [(s.start_index, s.n_in, s.n_out, list(s.input_ids), list(s.output_ids), list(s.table_codons)) for s in spans]


# Two genes wired like the example network: gate 1 reads two inputs and a
# hidden variable and writes two hidden variables; gate 2 reads two hidden
# variables and writes the output and a hidden variable.  Codon values above
# the ranges exercise the mod mapping.
FIG6_GENES = [
    [42, 213, 6, 5, 23, 3, 10, 12, 36, 0, 1, 2, 3, 0, 1, 2, 3],
    [42, 213, 1, 1, 10, 12, 5, 14, 0, 1, 2, 3],
]


class TestScan:
    def test_no_start_codon(self):
        assert gn.scan_genes([5, 9, 17], TOTAL_1D) == []

    def test_hand_decoded_gene(self):
        codons = [42, 213, 1, 0, 0, 1, 5, 1, 0, 1, 1] + [0] * 20
        (span,) = gn.scan_genes(codons, TOTAL_1D)
        assert (span.n_in, span.n_out) == (2, 1)
        assert span.input_ids == (0, 1)
        assert span.output_ids == (5,)
        assert span.table_codons == (1, 0, 1, 1)

    def test_two_gene_example(self):
        g = gn.genome_from_genes(FIG6_GENES)
        spans = gn.scan_genes(g, TOTAL_1D)
        assert len(spans) == 2
        a, b = spans
        assert (a.n_in, a.n_out) == (3, 2)
        assert a.input_ids == (1, 3, 10) and a.output_ids == (12, 14)
        assert (b.n_in, b.n_out) == (2, 2)
        assert b.input_ids == (10, 12) and b.output_ids == (5, 14)

    def test_wraps_around_end(self):
        body = [42, 213, 0, 0, 7, 6, 1, 0]
        codons = [9] * 10 + body[:5]
        codons = body[5:] + codons  # start codon near the end, tail at the front
        spans = gn.scan_genes(codons, TOTAL_1D)
        assert len(spans) == 1
        s = spans[0]
        assert s.start_index == len(codons) - 5
        assert s.input_ids == (7,) and s.output_ids == (6,) and s.table_codons == (1, 0)

    def test_start_codon_split_across_end(self):
        codons = [213, 0, 0, 3, 4, 1, 1] + [9] * 5 + [42]
        (s,) = gn.scan_genes(codons, TOTAL_1D)
        assert s.start_index == len(codons) - 1
        assert s.input_ids == (3,) and s.output_ids == (4,)

    def test_overlapping_genes(self):
        # A start codon inside the first gene's table begins a second gene.
        codons = [42, 213, 1, 0, 0, 1, 5, 42, 213, 0, 0] + [0] * 10
        spans = gn.scan_genes(codons, TOTAL_1D)
        assert [s.start_index for s in spans] == [0, 7]

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.sampled_from([42, 213, 0, 1, 2, 3, 4, 5, 200, 255]), min_size=0, max_size=80),
           st.integers(1, 64))
    def test_matches_straight_decoder(self, codons, total):
        assert spans_as_tuples(gn.scan_genes(codons, total)) == straight_decode(codons, total)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 255), min_size=1, max_size=300), st.integers(1, 64))
    def test_ids_in_range_and_deterministic(self, codons, total):
        spans = gn.scan_genes(codons, total)
        assert spans == gn.scan_genes(codons, total)
        for s in spans:
            assert all(i < total for i in s.input_ids + s.output_ids)
            assert 1 <= s.n_in <= 4 and 1 <= s.n_out <= 4
            assert len(s.table_codons) == 2**s.n_in

    def test_rejects_out_of_range_codons(self):
        with pytest.raises(gn.GenomeError):
            gn.scan_genes([42, 213, 256], TOTAL_1D)


class TestRandomGenome:
    def test_paper_defaults(self):
        g = gn.random_genome(10_000, 16, TOTAL_1D, np.random.default_rng(7))
        assert len(g) == 10_000
        assert len(gn.scan_genes(g, TOTAL_1D)) >= 16

    def test_no_seed_genes(self):
        g = gn.random_genome(1000, 0, TOTAL_1D, np.random.default_rng(1))
        assert len(g) == 1000

    def test_seeded_gene_round_trips(self):
        rng = np.random.default_rng(3)
        g = gn.random_genome(1000, 1, TOTAL_1D, rng)
        decoded = straight_decode(g.codons, TOTAL_1D)
        # Recreate the seeded gene with the same draws to find what was written.
        rng = np.random.default_rng(3)
        rng.integers(0, 256, 1000)
        written = gn.random_gene(TOTAL_1D, rng)
        n_in, n_out = written[2] + 1, written[3] + 1
        expected = (n_in, n_out, written[4 : 4 + n_in], written[4 + n_in : 4 + n_in + n_out], written[4 + n_in + n_out :])
        assert expected in [d[1:] for d in decoded]

    @pytest.mark.parametrize("length", [999, 40_000, 0])
    def test_length_bounds(self, length):
        with pytest.raises(gn.GenomeError):
            gn.random_genome(length, 0, TOTAL_1D, np.random.default_rng(0))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 40))
    def test_always_at_least_k_genes(self, seed, k):
        g = gn.random_genome(1000, k, 44, np.random.default_rng(seed))
        assert len(gn.scan_genes(g, 44)) >= k


def _genome(n=10_000, seed=0):
    return gn.Genome(np.random.default_rng(seed).integers(0, 256, n))


class TestPointMutation:
    def test_zero_rate_identity(self):
        g = _genome()
        out = gn.point_mutate(g, gn.MutationConfig(point_rate=0), np.random.default_rng(1))
        assert out == g

    def test_full_rate_randomises(self):
        g = _genome()
        out = gn.point_mutate(g, gn.MutationConfig(point_rate=1), np.random.default_rng(1))
        same = int((out.codons == g.codons).sum())
        # Binomial(10000, 1/256): mean 39.06, sd 6.24
        assert abs(same - 10_000 / 256) < 5 * np.sqrt(10_000 / 256 * 255 / 256)

    def test_mean_changed_count(self):
        g = _genome()
        cfg = gn.MutationConfig(point_rate=0.01)
        rng = np.random.default_rng(5)
        changed = [int((gn.point_mutate(g, cfg, rng).codons != g.codons).sum()) for _ in range(1000)]
        p = 0.01 * 255 / 256
        mean, sd = 10_000 * p, np.sqrt(10_000 * p * (1 - p))
        assert abs(np.mean(changed) - mean) < 3 * sd / np.sqrt(1000)

    def test_reproducible(self):
        g = _genome()
        cfg = gn.MutationConfig()
        a = gn.mutate(g, cfg, np.random.default_rng(9))
        b = gn.mutate(g, cfg, np.random.default_rng(9))
        assert a == b


class TestIndel:
    def test_zero_rate_identity(self):
        g = _genome(1200)
        out = gn.indel_mutate(g, gn.MutationConfig(indel_rate=0), np.random.default_rng(1))
        assert out == g

    def test_forced_insertion(self):
        c = _genome(1200).codons
        out = gn.insert_segment(c, 100, 16, 500)
        assert out.size == 1216
        np.testing.assert_array_equal(out[500:516], c[100:116])
        np.testing.assert_array_equal(out[:500], c[:500])
        np.testing.assert_array_equal(out[516:], c[500:])

    def test_insertion_wraps_source(self):
        c = np.arange(1000) % 256
        out = gn.insert_segment(c, 990, 20, 0)
        np.testing.assert_array_equal(out[:20], np.r_[c[990:], c[:10]])

    def test_deletion_wraps(self):
        c = np.arange(1100) % 256
        out = gn.delete_segment(c, 1090, 20)
        assert out.size == 1080
        np.testing.assert_array_equal(out, c[10:1090])

    def test_oversize_insertion_skipped(self):
        g = _genome(39_900)
        cfg = gn.MutationConfig(indel_rate=1.0, indel_size_range=(100, 512))
        for seed in range(20):
            out = gn.indel_mutate(g, cfg, np.random.default_rng(seed))
            # insertion always skipped; deletion of [100, 512) always allowed here
            assert 39_900 - 512 < len(out) <= 39_900 - 100

    def test_undersize_deletion_skipped(self):
        g = _genome(1010)
        cfg = gn.MutationConfig(indel_rate=1.0, indel_size_range=(16, 17), max_length=1020)
        out = gn.indel_mutate(g, cfg, np.random.default_rng(0))
        # insertion would reach 1026 >= 1020, deletion would leave 994 < 1000
        assert out == g

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([1000, 1020, 20_000, 39_990]))
    def test_bounds_hold_after_many_mutations(self, seed, n):
        g = _genome(n, seed % 7)
        cfg = gn.MutationConfig(point_rate=0.05, indel_rate=0.9)
        rng = np.random.default_rng(seed)
        for _ in range(20):
            g = gn.mutate(g, cfg, rng)
            assert 1000 <= len(g) < 40_000
            assert g.codons.dtype == np.uint8


class TestFileFormat:
    def test_round_trip(self, tmp_path):
        g = _genome(1500)
        gn.save(tmp_path / "a.genome", g, 42)
        g2, total = gn.load(tmp_path / "a.genome")
        assert g2 == g and total == 42
        assert (tmp_path / "a.genome").read_text().startswith("sasoca-genome v1 total_states=42\n")

    @pytest.mark.parametrize(
        "text",
        [
            "sasoca-genome v1 total_states=22\n" + " ".join(["256"] * 1000),
            "sasoca-genome v1 total_states=22\n" + " ".join(["1"] * 999),
            "sasoca-genome v2 total_states=22\n" + " ".join(["1"] * 1000),
            "sasoca-genome v1 total_states=22\n" + " ".join(["-1"] * 1000),
            "sasoca-genome v1\n1 2 3",
            "",
        ],
    )
    def test_rejects_bad_files(self, text):
        with pytest.raises(gn.GenomeError):
            gn.loads(text)
