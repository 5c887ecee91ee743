"""Default hyperparameter grids shared by the verify suites and the tests."""

import itertools

from .core import EntropyParams, Family, HYPERPARAMETERS

P = EntropyParams

FAMILY_GRID = {
    Family.SHANNON: [P.shannon()],
    Family.TSALLIS: [P.tsallis(q) for q in (0.5, 1.0, 1.5)],
    Family.KANIADAKIS: [P.kaniadakis(k) for k in (0.0, 0.3, 0.6)],
    Family.KLS: [P.kls(0.5, 0.0), P.kls(0.5, 0.25)],
    Family.SCHWAMMLE_TSALLIS: [P.schwammle_tsallis(0.8, 1.2), P.schwammle_tsallis(0.7, 1.5),
                               P.schwammle_tsallis(1.5, 1.2)],
    Family.CORCINO: [P.corcino(0.8, 1.2, 1.1), P.corcino(0.7, 1.3, 0.8),
                     P.corcino(0.6, 1.1, 0.9)],
    Family.EULER: [P.euler(-0.3, 0.5), P.euler(-0.5, 0.25), P.euler(0.6, -0.2)],
}

# the descent grid of the optimizer invariants
DESCENT_GRID = (FAMILY_GRID[Family.TSALLIS] + FAMILY_GRID[Family.KANIADAKIS]
                + FAMILY_GRID[Family.KLS])


def all_params(families=None):
    fams = list(Family) if families is None else [Family(f) for f in families]
    return [p for fam in fams for p in FAMILY_GRID[fam]]


def params_product(family, values):
    """Cartesian product of ``{name: [v1, v2, ...]}`` as EntropyParams, in input order.

    Hyperparameters are iterated in the family's canonical order.
    """
    fam = Family(family)
    names = HYPERPARAMETERS[fam]
    extra = set(values) - set(names)
    if extra:
        raise KeyError(f"{fam.value} has no hyperparameter(s) {sorted(extra)}")
    missing = [n for n in names if n not in values]
    if missing:
        raise KeyError(f"{fam.value} needs values for {missing}")
    combos = itertools.product(*(values[n] for n in names))
    return [EntropyParams(fam, **dict(zip(names, c))) for c in combos]
