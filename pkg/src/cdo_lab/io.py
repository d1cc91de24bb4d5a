"""JSON / CSV / SVG serialization.

DiagonalForm JSON is a list of terms::

    [{"v": <element literal>, "constant": [re, im],
      "perturbation": [{"x": <element literal>, "value": [re, im]}, ...]}, ...]

where ``value`` is the offset from the constant, i.e. ``m_v(x) = constant + value``.
Element literals: arrays for Z^d and H3, strings over "aAbB" for F2,
``{"k", "num", "exp"}`` objects for BS12.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from .algebra import DiagonalForm, Multiplier
from .errors import GroupError
from .groups import GroupModel, get_group


def _cjson(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _from_cjson(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    try:
        re, im = obj
    except (TypeError, ValueError) as exc:
        raise GroupError(f"bad complex literal {obj!r}") from exc
    return complex(float(re), float(im))


def form_to_json(f: DiagonalForm) -> list:
    G = f.group
    out = []
    for v in sorted(f.terms, key=lambda g: json.dumps(G.to_literal(g), sort_keys=True)):
        m = f.terms[v]
        pert = [
            {"x": G.to_literal(x), "value": _cjson(p)}
            for x, p in sorted(m.perturbation.items(), key=lambda kv: json.dumps(G.to_literal(kv[0]), sort_keys=True))
        ]
        out.append({"v": G.to_literal(v), "constant": _cjson(m.constant), "perturbation": pert})
    return out


def form_from_json(group: GroupModel | str, obj) -> DiagonalForm:
    G = get_group(group) if isinstance(group, str) else group
    if not isinstance(obj, list):
        raise GroupError("DiagonalForm literal must be a list of terms")
    terms: dict = {}
    for item in obj:
        try:
            v = G.from_literal(item["v"])
            c = _from_cjson(item.get("constant", [0.0, 0.0]))
            pert = {G.from_literal(p["x"]): _from_cjson(p["value"]) for p in item.get("perturbation", [])}
        except (KeyError, TypeError) as exc:
            raise GroupError(f"bad DiagonalForm term {item!r}") from exc
        m = Multiplier(c, pert)
        terms[v] = terms[v] + m if v in terms else m
    return DiagonalForm(G, terms)


def dumps(obj) -> str:
    """Stable JSON text (sorted keys, UTF-8, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def csv_text(header: Iterable, rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for r in rows:
        w.writerow(list(r))
    return buf.getvalue()


def write_atomic(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_csv(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def svg_log_plot(csv_path: str | Path, svg_path: str | Path, x: str = "shell", y: str = "mass", title: str = "") -> Path:
    """Semilog plot of a two-column CSV; the data come only from the CSV."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(csv_path)
    xs = [float(r[x]) for r in rows]
    ys = [float(r[y]) for r in rows]
    pts = [(a, b) for a, b in zip(xs, ys) if b > 0]
    matplotlib.rcParams["svg.hashsalt"] = "cdo-lab"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if pts:
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg_path
