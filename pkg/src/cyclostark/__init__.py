"""cyclostark: exact and p-adic computations in the cyclotomic Z_p-tower over Q.

Layers, bottom up:

* ``exact_cyclotomic``: Q(zeta_N) arithmetic, Dirichlet characters, Bernoulli
  data, L-values, Gauss sums, finite abelian groups and their group rings.
* ``padic_tower``: H(zeta_{p^(n+1)}) with tracked precision and the embedding j.
* ``series_measures``: bounded power series, the operators D, V and Dcheck,
  measures on Z_p and Iwasawa-type interpolation.
* ``coleman``: cyclotomic unit sequences, Coleman series, Coates-Wiles maps
  and p-adic regulators, global and semilocal.
* ``stark_engine``: tower bookkeeping, zeta values and the verification checks.
* ``cli``: the ``cyclostark`` command.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from .coleman import (
    ColemanSeries,
    CyclotomicUnitSequence,
    ExplicitLocalSequence,
    L_map,
    cw_delta,
    regulator_p,
)
from .exact_cyclotomic import (
    CyclotomicNumber,
    DirichletCharacter,
    GroupRingElem,
    UnitGroupModSign,
    gauss_sum,
    generalized_bernoulli,
    l_value_at_one,
    l_value_nonpositive,
)
from .padic_tower import Tower, TowerElem, embed_j
from .series_measures import BoundedSeries, IwasawaSeries, IwasawaSeriesFitter, apply_operator
from .stark_engine import CHECK_KINDS, CheckReport, TowerContext, calibration, run_check, tower_context

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.1.0"

__all__ = [
    "BoundedSeries",
    "CHECK_KINDS",
    "CheckReport",
    "ColemanSeries",
    "CyclotomicNumber",
    "CyclotomicUnitSequence",
    "DirichletCharacter",
    "ExplicitLocalSequence",
    "GroupRingElem",
    "IwasawaSeries",
    "IwasawaSeriesFitter",
    "L_map",
    "Tower",
    "TowerContext",
    "TowerElem",
    "UnitGroupModSign",
    "__version__",
    "apply_operator",
    "calibration",
    "cw_delta",
    "embed_j",
    "gauss_sum",
    "generalized_bernoulli",
    "l_value_at_one",
    "l_value_nonpositive",
    "regulator_p",
    "run_check",
    "tower_context",
]
