"""Built-in test elements, available on every group.

With ``S`` the symmetric generating set (``k`` generator pairs):

* ``identity``: ``delta_e``
* ``shift``: ``delta_s`` for the first generator ``s``
* ``srw``: ``(1/2k) sum_{s in S} delta_s``, the simple random walk
* ``signed-srw``: ``srw - delta_e / 2``
* ``laplace4``: ``4 delta_e - (1/k) sum_{s in S} delta_s``; on Z this is
  ``4 delta_0 - delta_1 - delta_-1``
"""

from __future__ import annotations

from .algebra import DiagonalForm
from .errors import GroupError
from .groups import GroupModel, get_group


def _srw(G: GroupModel) -> dict:
    w = 1.0 / len(G.generators)
    return {s: w for s in G.generators}


def _builtin_coeffs(G: GroupModel, name: str) -> dict:
    k = len(G.generators) // 2
    if name == "identity":
        return {G.identity: 1.0}
    if name == "shift":
        return {G.generators[0]: 1.0}
    if name == "srw":
        return _srw(G)
    if name == "signed-srw":
        c = _srw(G)
        c[G.identity] = -0.5
        return c
    if name == "laplace4":
        c = {s: -1.0 / k for s in G.generators}
        c[G.identity] = 4.0
        return c
    raise GroupError(f"unknown built-in element {name!r}; known: {', '.join(BUILTINS)}")


BUILTINS = {
    "identity": "delta_e",
    "shift": "delta_s, s the first generator",
    "srw": "simple random walk (1/|S|) sum_s delta_s",
    "signed-srw": "srw - delta_e / 2",
    "laplace4": "4 delta_e - (1/k) sum_s delta_s (k generator pairs)",
}


def builtin_element(group: GroupModel | str, name: str) -> DiagonalForm:
    G = get_group(group) if isinstance(group, str) else group
    return DiagonalForm.from_coefficients(G, _builtin_coeffs(G, name))
