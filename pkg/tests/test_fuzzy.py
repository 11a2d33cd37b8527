import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import trapezoid_oracle
from pvrelay.fuzzy import (FuzzyError, FuzzySystem, FuzzyVariable, GaParams, Rule, Trapezoid, decode,
                           default_system, encode, ga_tune, gene_bounds, infer, repair, system_fitness, trap_mu)

GRID_TOL = 1.0 / 200


def one_input_system(out_sets, rules):
    inp = FuzzyVariable("x", (0.0, 1.0), (("lo", Trapezoid(0.0, 0.0, 0.0, 1.0)),
                                         ("hi", Trapezoid(0.0, 1.0, 1.0, 1.0))))
    return FuzzySystem((inp,), FuzzyVariable("y", (0.0, 1.0), out_sets), rules)


class TestMembership:
    def test_examples(self):
        t = Trapezoid(0.0, 0.2, 0.4, 0.6)
        assert trap_mu(0.3, t) == 1.0
        assert trap_mu(0.1, t) == pytest.approx(0.5)
        assert trap_mu(0.7, t) == 0.0

    def test_degenerate_shoulders(self):
        t = Trapezoid(-1.0, -1.0, -0.6, -0.2)
        assert trap_mu(-1.0, t) == 1.0
        assert trap_mu(-0.4, t) == pytest.approx(0.5)

    @given(st.floats(-2, 2), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
    @settings(max_examples=300, deadline=None)
    def test_matches_oracle(self, x, verts):
        a, b, c, d = sorted(verts)
        mu = trap_mu(x, Trapezoid(a, b, c, d))
        assert 0.0 <= mu <= 1.0
        assert mu == pytest.approx(trapezoid_oracle(x, a, b, c, d), abs=1e-12)

    def test_vertex_order(self):
        with pytest.raises(FuzzyError):
            Trapezoid(0.3, 0.2, 0.4, 0.5)


class TestCentroid:
    def test_single_symmetric_set(self):
        sys_ = one_input_system((("mid", Trapezoid(0.5, 0.6, 0.8, 0.9)), ("other", Trapezoid(0.0, 0.0, 0.1, 0.2))),
                                (Rule(("hi",), "mid"),))
        assert abs(infer(sys_, [1.0]) - 0.7) <= GRID_TOL

    def test_two_equal_sets(self):
        sys_ = one_input_system((("low", Trapezoid(0.0, 0.1, 0.3, 0.4)), ("high", Trapezoid(0.6, 0.7, 0.9, 1.0))),
                                (Rule(("lo",), "low"), Rule(("hi",), "high")))
        assert abs(infer(sys_, [0.5]) - 0.5) <= GRID_TOL

    def test_no_rule_fires(self):
        sys_ = one_input_system((("low", Trapezoid(0.0, 0.1, 0.3, 0.4)), ("high", Trapezoid(0.6, 0.7, 0.9, 1.0))),
                                (Rule(("hi",), "high"),))
        assert infer(sys_, [0.0]) == 0.5

    def test_wildcard_rule(self):
        sys_ = one_input_system((("low", Trapezoid(0.0, 0.1, 0.3, 0.4)), ("high", Trapezoid(0.6, 0.7, 0.9, 1.0))),
                                (Rule(("*",), "high"),))
        assert infer(sys_, [0.0]) == pytest.approx(0.8, abs=GRID_TOL)


class TestDefaultSystem:
    def test_shape(self):
        s = default_system()
        assert len(s.rules) == 27 and len(s.inputs) == 3 and s.defuzz_grid == 201

    def test_calm_and_strong(self):
        s = default_system()
        assert infer(s, [0.0, 0.0, 0.0]) < 0.5
        assert infer(s, [0.95, 0.95, 0.95]) > 0.5
        assert infer(s, [-0.95, -0.95, 0.0]) > 0.5

    def test_clamping_flag(self):
        s = default_system()
        val, clamped = s.infer_detail([1.7, 0.0, 0.0])
        assert clamped and val == infer(s, [1.0, 0.0, 0.0])
        assert not s.infer_detail([0.2, 0.0, 0.0])[1]

    def test_wrong_arity(self):
        with pytest.raises(FuzzyError):
            infer(default_system(), [0.1, 0.2])

    def test_continuity(self):
        s = default_system()
        xs = np.linspace(-1, 1, 401)
        out = s.infer_batch(np.column_stack([xs, xs, np.zeros_like(xs)]))
        assert np.max(np.abs(np.diff(out))) < 0.1

    def test_text_round_trip(self):
        s = default_system()
        text = s.to_text()
        back = FuzzySystem.from_text(text)
        assert back == s and back.to_text() == text

    def test_bad_text(self):
        with pytest.raises(FuzzyError):
            FuzzySystem.from_text("pvrelay-fuzzy 1\n")
        with pytest.raises(FuzzyError):
            FuzzySystem.from_text("nope\n")

    def test_unknown_rule_label(self):
        s = default_system()
        with pytest.raises(FuzzyError):
            FuzzySystem(s.inputs, s.output, (Rule(("neg", "flat", "huge"), "fault"),))


class TestCoding:
    def test_encode_decode_identity(self):
        s = default_system()
        assert decode(encode(s), s) == s

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_repair_idempotent(self, seed):
        s = default_system()
        lo, hi = gene_bounds(s)
        genes = np.random.default_rng(seed).uniform(lo - 1.0, hi + 1.0)
        once = repair(genes, s)
        assert np.array_equal(repair(once, s), once)
        assert np.all((once >= lo) & (once <= hi))
        decode(genes, s)  # always a valid system


def separable_set(n=300, seed=0):
    rng = np.random.default_rng(seed)
    fault = rng.uniform(0.7, 1.0, size=(n // 2, 3)) * rng.choice([-1.0, 1.0], size=(n // 2, 1))
    calm = rng.uniform(-0.15, 0.15, size=(n - n // 2, 3))
    X = np.vstack([fault, calm])
    y = np.array([True] * (n // 2) + [False] * (n - n // 2))
    return X, y


class TestGa:
    def test_trace_monotone(self):
        X, y = separable_set()
        X = X + np.random.default_rng(1).normal(0, 0.3, X.shape)
        res = ga_tune(X, y, ga_params=GaParams(population=20, generations=15, seed=2))
        best = [b for _, b, _ in res.trace]
        assert len(best) == 16 and all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
        assert system_fitness(res.system, X, y) == res.best_fitness

    def test_zero_generations(self):
        X, y = separable_set()
        res = ga_tune(X, y, ga_params=GaParams(population=4, generations=0))
        assert res.system == default_system() and len(res.trace) == 1

    def test_deterministic(self):
        X, y = separable_set()
        p = GaParams(population=10, generations=5, seed=3)
        assert ga_tune(X, y, ga_params=p).system.to_text() == ga_tune(X, y, ga_params=p).system.to_text()

    def test_separable_reaches_high_fitness(self):
        X, y = separable_set()
        res = ga_tune(X, y, ga_params=GaParams(population=20, generations=10, seed=4))
        assert res.best_fitness >= 0.95

    def test_single_class_rejected(self):
        X, _ = separable_set()
        with pytest.raises(FuzzyError):
            ga_tune(X, np.ones(X.shape[0], dtype=bool))

    def test_trace_csv(self, tmp_path):
        X, y = separable_set()
        res = ga_tune(X, y, ga_params=GaParams(population=4, generations=2))
        res.write_csv(tmp_path / "ga.csv")
        lines = (tmp_path / "ga.csv").read_text().splitlines()
        assert lines[0] == "generation,best_fitness,mean_fitness" and len(lines) == 4

    def test_param_validation(self):
        with pytest.raises(FuzzyError):
            GaParams(population=1)
        with pytest.raises(FuzzyError):
            GaParams(elitism=0)
