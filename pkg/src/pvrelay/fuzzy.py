"""Mamdani fuzzy detector with trapezoidal sets and GA tuning of the vertices."""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import kernels

FUZZY_MAGIC = "pvrelay-fuzzy 1"
WILDCARD = "*"


class FuzzyError(ValueError):
    pass


@dataclass(frozen=True)
class Trapezoid:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not self.a <= self.b <= self.c <= self.d:
            raise FuzzyError(f"trapezoid vertices out of order: {self.vertices}")

    @property
    def vertices(self) -> tuple:
        return (self.a, self.b, self.c, self.d)


def trap_mu(x: float, trap: Trapezoid) -> float:
    """Membership of ``x``; equal vertices behave right-continuously (a == b is a step up)."""
    return float(kernels._trap_scalar(float(x), trap.a, trap.b, trap.c, trap.d))


@dataclass(frozen=True)
class FuzzyVariable:
    name: str
    universe: tuple
    sets: tuple  # ((label, Trapezoid), ...)

    @property
    def labels(self) -> list:
        return [lab for lab, _ in self.sets]


@dataclass(frozen=True)
class Rule:
    antecedent: tuple  # one label per input, or WILDCARD
    consequent: str


@dataclass(frozen=True)
class FuzzySystem:
    inputs: tuple
    output: FuzzyVariable
    rules: tuple
    defuzz_grid: int = 201

    def __post_init__(self):
        self.validate()

    def validate(self) -> "FuzzySystem":
        if self.defuzz_grid < 2:
            raise FuzzyError("defuzz_grid must be >= 2")
        for var in self.inputs:
            if len(var.sets) < 2:
                raise FuzzyError(f"input {var.name!r} needs at least 2 sets")
        if len(self.output.sets) < 2:
            raise FuzzyError("output needs at least 2 sets")
        for rule in self.rules:
            if len(rule.antecedent) != len(self.inputs):
                raise FuzzyError(f"rule {rule} does not cover every input")
            for var, lab in zip(self.inputs, rule.antecedent):
                if lab != WILDCARD and lab not in var.labels:
                    raise FuzzyError(f"rule label {lab!r} unknown for input {var.name!r}")
            if rule.consequent not in self.output.labels:
                raise FuzzyError(f"rule consequent {rule.consequent!r} unknown")
        return self

    # -- compiled form for the kernels ---------------------------------

    def grid(self) -> np.ndarray:
        lo, hi = self.output.universe
        return np.linspace(lo, hi, self.defuzz_grid)

    def compiled(self):
        n_vars = len(self.inputs)
        max_sets = max(len(v.sets) for v in self.inputs)
        in_params = np.zeros((n_vars, max_sets, 4))
        in_nsets = np.zeros(n_vars, dtype=np.int64)
        for i, var in enumerate(self.inputs):
            in_nsets[i] = len(var.sets)
            for j, (_, t) in enumerate(var.sets):
                in_params[i, j] = t.vertices
        ante = np.full((len(self.rules), n_vars), -1, dtype=np.int64)
        cons = np.zeros(len(self.rules), dtype=np.int64)
        for r, rule in enumerate(self.rules):
            for v, lab in enumerate(rule.antecedent):
                if lab != WILDCARD:
                    ante[r, v] = self.inputs[v].labels.index(lab)
            cons[r] = self.output.labels.index(rule.consequent)
        grid = self.grid()
        out_mu = np.array([kernels.trap_numpy(grid, *t.vertices) for _, t in self.output.sets])
        return in_params, in_nsets, ante, cons, out_mu, grid

    def clamp_inputs(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.inputs):
            raise FuzzyError(f"expected {len(self.inputs)} inputs, got {X.shape[1]}")
        lo = np.array([v.universe[0] for v in self.inputs])
        hi = np.array([v.universe[1] for v in self.inputs])
        clamped = np.clip(X, lo, hi)
        return np.ascontiguousarray(clamped), np.any(clamped != X, axis=1)

    def infer_batch(self, X) -> np.ndarray:
        Xc, _ = self.clamp_inputs(X)
        return kernels.fuzzy_infer_batch(Xc, *self.compiled())

    def infer_detail(self, inputs) -> tuple[float, bool]:
        """Crisp output and whether any input had to be clamped to its universe."""
        Xc, flag = self.clamp_inputs(inputs)
        return float(kernels.fuzzy_infer_batch(Xc, *self.compiled())[0]), bool(flag[0])

    # -- text form -------------------------------------------------------

    def to_text(self) -> str:
        lines = [FUZZY_MAGIC, f"grid {self.defuzz_grid}"]
        for kind, var in [("input", v) for v in self.inputs] + [("output", self.output)]:
            lines.append(f"{kind} {var.name} {float(var.universe[0])!r} {float(var.universe[1])!r} {len(var.sets)}")
            for lab, t in var.sets:
                lines.append("set " + lab + " " + " ".join(repr(float(v)) for v in t.vertices))
        lines.append(f"rules {len(self.rules)}")
        for rule in self.rules:
            lines.append("rule " + " ".join(rule.antecedent) + " -> " + rule.consequent)
        lines.append("end fuzzy")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FuzzySystem":
        return cls.from_lines(iter(text.splitlines()))

    @classmethod
    def from_lines(cls, lines) -> "FuzzySystem":
        try:
            if next(lines) != FUZZY_MAGIC:
                raise FuzzyError("missing fuzzy header")
            grid = int(next(lines).split()[1])
            variables = []
            line = next(lines)
            while line.startswith("input ") or line.startswith("output "):
                kind, name, lo, hi, n = line.split()
                sets = []
                for _ in range(int(n)):
                    parts = next(lines).split()
                    if parts[0] != "set":
                        raise FuzzyError("expected set line")
                    sets.append((parts[1], Trapezoid(*map(float, parts[2:6]))))
                variables.append((kind, FuzzyVariable(name, (float(lo), float(hi)), tuple(sets))))
                line = next(lines)
            n_rules = int(line.split()[1])
            rules = []
            for _ in range(n_rules):
                body = next(lines).split()
                if body[0] != "rule" or body[-2] != "->":
                    raise FuzzyError("malformed rule line")
                rules.append(Rule(tuple(body[1:-2]), body[-1]))
            if next(lines) != "end fuzzy":
                raise FuzzyError("missing fuzzy trailer")
        except StopIteration:
            raise FuzzyError("truncated fuzzy text") from None
        except (IndexError, TypeError) as exc:
            raise FuzzyError(f"malformed fuzzy text: {exc}") from None
        inputs = tuple(v for k, v in variables if k == "input")
        outputs = [v for k, v in variables if k == "output"]
        if len(outputs) != 1:
            raise FuzzyError("exactly one output variable required")
        return cls(inputs, outputs[0], tuple(rules), grid)


def infer(system: FuzzySystem, inputs) -> float:
    return system.infer_detail(inputs)[0]


def default_system(input_names: Sequence[str] = ("r_a", "r_b", "r_c")) -> FuzzySystem:
    """Three trend sets per input and a fault/no-fault output.

    Rule base: a fault needs the same strong trend (both rising or both
    falling) on at least two phases; every other combination, including all
    flat, is no-fault.
    """
    in_sets = (("neg", Trapezoid(-1.0, -1.0, -0.6, -0.2)),
               ("flat", Trapezoid(-0.6, -0.2, 0.2, 0.6)),
               ("pos", Trapezoid(0.2, 0.6, 1.0, 1.0)))
    inputs = tuple(FuzzyVariable(n, (-1.0, 1.0), in_sets) for n in input_names)
    output = FuzzyVariable("fault", (0.0, 1.0),
                           (("no-fault", Trapezoid(0.0, 0.0, 0.3, 0.6)),
                            ("fault", Trapezoid(0.4, 0.7, 1.0, 1.0))))
    rules = []
    for combo in itertools.product(("neg", "flat", "pos"), repeat=len(inputs)):
        strong = any(combo.count(s) >= 2 for s in ("neg", "pos"))
        rules.append(Rule(combo, "fault" if strong else "no-fault"))
    return FuzzySystem(inputs, output, tuple(rules))


# ---------------------------------------------------------------------------
# chromosome coding


def _variables(system: FuzzySystem):
    return list(system.inputs) + [system.output]


def encode(system: FuzzySystem) -> np.ndarray:
    genes = []
    for var in _variables(system):
        for _, t in var.sets:
            genes.extend(t.vertices)
    return np.array(genes, dtype=np.float64)


def gene_bounds(system: FuzzySystem) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = [], []
    for var in _variables(system):
        for _ in var.sets:
            lo.extend([var.universe[0]] * 4)
            hi.extend([var.universe[1]] * 4)
    return np.array(lo), np.array(hi)


def repair(genes, system: FuzzySystem) -> np.ndarray:
    """Sort every vertex quadruple and clamp it to its variable's universe."""
    lo, hi = gene_bounds(system)
    g = np.clip(np.asarray(genes, dtype=np.float64), lo, hi).reshape(-1, 4)
    return np.sort(g, axis=1).ravel()


def decode(genes, system: FuzzySystem) -> FuzzySystem:
    g = repair(genes, system).reshape(-1, 4)
    k = 0
    new_vars = []
    for var in _variables(system):
        sets = []
        for lab, _ in var.sets:
            sets.append((lab, Trapezoid(*map(float, g[k]))))
            k += 1
        new_vars.append(replace(var, sets=tuple(sets)))
    return replace(system, inputs=tuple(new_vars[:-1]), output=new_vars[-1])


# ---------------------------------------------------------------------------
# genetic tuning


@dataclass(frozen=True)
class GaParams:
    population: int = 50
    generations: int = 100
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_sigma: float = 0.05
    elitism: int = 2
    tournament: int = 3
    blend_alpha: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise FuzzyError("population must be >= 2")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise FuzzyError(f"{name} must lie in [0, 1]")
        if self.generations < 0 or self.mutation_sigma < 0:
            raise FuzzyError("generations and mutation_sigma must be non-negative")
        if not 1 <= self.elitism <= self.population:
            raise FuzzyError("elitism must be between 1 and the population size")
        if self.tournament < 1:
            raise FuzzyError("tournament size must be >= 1")


@dataclass
class GaResult:
    system: FuzzySystem
    trace: list = field(default_factory=list)  # (generation, best_fitness, mean_fitness)

    @property
    def best_fitness(self) -> float:
        return self.trace[-1][1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["generation", "best_fitness", "mean_fitness"])
            for g, best, mean in self.trace:
                w.writerow([g, repr(best), repr(mean)])


def _binary_fitness(scores: np.ndarray, is_fault: np.ndarray) -> float:
    pred = scores >= 0.5
    return 0.5 * (float(np.mean(pred[is_fault])) + float(np.mean(~pred[~is_fault])))


def system_fitness(system: FuzzySystem, features, is_fault) -> float:
    """Balanced accuracy of the ``score >= 0.5`` decision."""
    is_fault = np.asarray(is_fault, dtype=bool)
    return _binary_fitness(system.infer_batch(features), is_fault)


def ga_tune(train_features, train_labels, base_system: Optional[FuzzySystem] = None,
            ga_params: Optional[GaParams] = None) -> GaResult:
    """Tune every trapezoid vertex with a real-coded genetic algorithm.

    Operators: tournament selection, blend crossover, per-gene Gaussian
    mutation scaled by the universe width, and elitism, so the best fitness
    never decreases from one generation to the next.
    """
    base = base_system or default_system()
    params = ga_params or GaParams()
    is_fault = np.asarray(train_labels, dtype=bool)
    if is_fault.all() or not is_fault.any():
        raise FuzzyError("GA tuning needs both fault and no-fault examples")
    X, _ = base.clamp_inputs(train_features)
    if X.shape[0] != is_fault.shape[0]:
        raise FuzzyError("features and labels differ in length")
    in_params, in_nsets, ante, cons, _, grid = base.compiled()
    lo, hi = gene_bounds(base)
    width = hi - lo
    n_in_genes = int(in_nsets.sum()) * 4
    rng = np.random.default_rng(params.seed)

    def fitness(genes):
        g = genes.reshape(-1, 4)
        ip = np.zeros_like(in_params)
        k = 0
        for v in range(in_params.shape[0]):
            for s in range(in_nsets[v]):
                ip[v, s] = g[k]
                k += 1
        out_mu = np.array([kernels.trap_numpy(grid, *row) for row in g[n_in_genes // 4:]])
        scores = kernels.fuzzy_infer_batch(X, ip, in_nsets, ante, cons, out_mu, grid)
        return _binary_fitness(scores, is_fault)

    start = repair(encode(base), base)
    pop = np.empty((params.population, start.shape[0]))
    pop[0] = start
    for i in range(1, params.population):
        pop[i] = repair(start + rng.normal(0.0, params.mutation_sigma, start.shape) * width, base)
    fit = np.array([fitness(p) for p in pop])
    trace = [(0, float(fit.max()), float(fit.mean()))]
    if params.generations == 0:
        return GaResult(base, trace)

    for gen in range(1, params.generations + 1):
        order = np.argsort(-fit, kind="stable")
        children = [pop[i].copy() for i in order[:params.elitism]]
        while len(children) < params.population:
            parents = []
            for _ in range(2):
                contenders = rng.integers(0, params.population, size=params.tournament)
                parents.append(pop[contenders[np.argmax(fit[contenders])]])
            p1, p2 = parents
            if rng.random() < params.crossover_rate:
                span = np.abs(p1 - p2)
                low = np.minimum(p1, p2) - params.blend_alpha * span
                child = low + rng.random(p1.shape) * (1.0 + 2.0 * params.blend_alpha) * span
            else:
                child = p1.copy()
            mutate = rng.random(child.shape) < params.mutation_rate
            child = child + mutate * rng.normal(0.0, params.mutation_sigma, child.shape) * width
            children.append(repair(child, base))
        pop = np.array(children)
        fit = np.concatenate([fit[order[:params.elitism]],
                              [fitness(p) for p in pop[params.elitism:]]])
        trace.append((gen, float(fit.max()), float(fit.mean())))
    best = int(np.argmax(fit))
    return GaResult(decode(pop[best], base), trace)
