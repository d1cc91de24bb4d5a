"""``cdo-lab`` command line: ball | gap | invert | axioms | spectrum.

Exit codes: 0 ok, 2 bad input, 3 computation error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import io as cio
from ._jit import thread_cap
from .algebra import DiagonalForm
from .axioms import mutant_product, run_axiom_suite
from .decay import COND_LIMIT, decay_report
from .errors import CdoLabError, GroupError, IllConditionedError
from .groups import GROUP_IDS, get_group
from .library import BUILTINS, builtin_element
from .spectral import POWER_MAX_ITER, POWER_TOL, hermitian_spectrum, hulanicki_gap

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_NUMERIC = 0, 2, 3, 4
FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    group: str
    elements: list = field(default_factory=lambda: ["srw"])
    radii: list[int] = field(default_factory=lambda: [8])
    depth: int = 6
    core_radius: int | None = None
    power_tol: float = POWER_TOL
    max_iter: int = POWER_MAX_ITER
    cond_limit: float = COND_LIMIT
    out: str | None = None
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        tols = d.pop("tolerances", {}) or {}
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "group" not in d:
            raise ConfigError("config needs a 'group'")
        for key in ("power_tol", "max_iter", "cond_limit"):
            if key in tols:
                d[key] = tols[key]
        return cls(**d)

    def validate(self) -> None:
        get_group(self.group)
        if not self.radii or any(not isinstance(r, int) or r <= 0 for r in self.radii):
            raise ConfigError("radii must be positive integers")
        if list(self.radii) != sorted(set(self.radii)):
            raise ConfigError("radii must be strictly ascending")
        if self.depth < 1:
            raise ConfigError("depth must be >= 1")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown formats {sorted(bad)}")
        for e in self.elements:
            if isinstance(e, str):
                if e not in BUILTINS:
                    raise ConfigError(f"unknown built-in element {e!r}")
            elif not (isinstance(e, dict) and "name" in e and "form" in e):
                raise ConfigError(f"element spec must be a built-in name or {{'name', 'form'}}: {e!r}")

    def resolved_elements(self) -> list[tuple[str, DiagonalForm]]:
        G = get_group(self.group)
        out = []
        for e in self.elements:
            if isinstance(e, str):
                out.append((e, builtin_element(G, e)))
            else:
                out.append((str(e["name"]), cio.form_from_json(G, e["form"])))
        return out


def _load_config(args) -> ExperimentConfig:
    data: dict = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if args.group:
        data["group"] = args.group
    if args.element:
        data["elements"] = list(args.element)
    if args.radius:
        data["radii"] = list(args.radius)
    if args.depth is not None:
        data["depth"] = args.depth
    if getattr(args, "core_radius", None) is not None:
        data["core_radius"] = args.core_radius
    if args.out:
        data["out"] = args.out
    if args.format:
        data["formats"] = [f.strip() for f in args.format.split(",") if f.strip()]
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = ExperimentConfig.from_dict(data)
    cfg.validate()
    return cfg


def _run_jobs(fn, jobs: list):
    """Run independent jobs, results in job order. Exceptions are returned, not raised."""

    def safe(job):
        try:
            return fn(*job)
        except Exception as exc:  # reported per job
            return exc

    workers = thread_cap() or 1
    if workers == 1 or len(jobs) <= 1:
        return [safe(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(safe, jobs))


def _err(msg: str) -> None:
    print(f"cdo-lab: {msg}", file=sys.stderr)


# -- commands ---------------------------------------------------------------


def cmd_ball(args) -> int:
    G = get_group(args.group)
    radius = args.radius[0] if args.radius else 0
    if radius < 0:
        raise ConfigError("radius must be >= 0")
    sizes = G.sphere_sizes(radius)
    rows, total = [], 0
    for r, s in enumerate(sizes):
        total += s
        rows.append((r, total))
    text = cio.csv_text(("r", "size"), rows)
    sys.stdout.write(text)
    if args.out:
        cio.write_atomic(Path(args.out) / f"ball_{G.name}.csv", text)
    return EXIT_OK


def cmd_gap(args) -> int:
    cfg = _load_config(args)
    elements = cfg.resolved_elements()
    jobs = [(name, f, r) for name, f in elements for r in cfg.radii]

    def job(name, f, r):
        return hulanicki_gap(
            f, r, cfg.depth, element_id=name, tol=cfg.power_tol, max_iter=cfg.max_iter, seed=cfg.seed
        )

    results = _run_jobs(job, jobs)
    reports = [r for r in results if not isinstance(r, Exception)]
    failures = [(j, r) for j, r in zip(jobs, results) if isinstance(r, Exception)]
    text = cio.csv_text(reports[0].CSV_FIELDS if reports else ("group", "element", "radius", "depth", "r_est", "nu_est", "gap"),
                        [rep.csv_row() for rep in reports])
    sys.stdout.write(text)
    if cfg.out:
        out = Path(cfg.out)
        if "csv" in cfg.formats:
            cio.write_atomic(out / f"gap_{cfg.group}.csv", text)
        if "json" in cfg.formats:
            cio.write_atomic(out / f"gap_{cfg.group}.json", cio.dumps([rep.to_dict() for rep in reports]))
    for (name, _, r), exc in failures:
        _err(f"gap {name} radius {r}: {type(exc).__name__}: {exc}")
    return EXIT_COMPUTE if failures else EXIT_OK


def cmd_invert(args) -> int:
    cfg = _load_config(args)
    if "svg" in cfg.formats and not cfg.out:
        raise ConfigError("svg output needs --out")
    elements = cfg.resolved_elements()
    jobs = [(name, f, r) for name, f in elements for r in cfg.radii]

    def job(name, f, r):
        core = cfg.core_radius if cfg.core_radius is not None else r // 2
        if core > r:
            raise ConfigError(f"core radius {core} exceeds radius {r}")
        return decay_report(f, r, core, element_id=name, cond_limit=cfg.cond_limit)

    results = _run_jobs(job, jobs)
    code = EXIT_OK
    summaries = []
    for (name, _, r), rep in zip(jobs, results):
        if isinstance(rep, IllConditionedError):
            _err(f"invert {name} radius {r}: {rep} (condition estimate {rep.condition:.6e})")
            code = max(code, EXIT_NUMERIC)
            continue
        if isinstance(rep, ConfigError):
            raise rep
        if isinstance(rep, Exception):
            _err(f"invert {name} radius {r}: {type(rep).__name__}: {rep}")
            code = max(code, EXIT_COMPUTE)
            continue
        shells = cio.csv_text(("shell", "mass"), [(s, repr(m)) for s, m in rep.masses])
        summaries.append(rep.summary())
        if cfg.out:
            stem = Path(cfg.out) / f"invert_{cfg.group}_{name}_r{r}"
            csv_path = cio.write_atomic(stem.with_name(stem.name + "_shells.csv"), shells)
            if "json" in cfg.formats:
                cio.write_atomic(stem.with_name(stem.name + "_summary.json"), rep.to_json() + "\n")
            if "svg" in cfg.formats:
                cio.svg_log_plot(csv_path, stem.with_name(stem.name + "_shells.svg"), title=f"{cfg.group} {name} r={r}")
    sys.stdout.write(cio.dumps(summaries))
    return code


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    elements = cfg.resolved_elements()
    jobs = [(name, f, r) for name, f in elements for r in cfg.radii]
    results = _run_jobs(lambda name, f, r: hermitian_spectrum(f, r), jobs)
    rows, code = [], EXIT_OK
    for (name, _, r), spec in zip(jobs, results):
        if isinstance(spec, Exception):
            _err(f"spectrum {name} radius {r}: {type(spec).__name__}: {spec}")
            code = EXIT_INPUT if isinstance(spec, ValueError) else EXIT_COMPUTE
            continue
        rows += [(cfg.group, name, r, spec.mode, i, repr(float(v))) for i, v in enumerate(spec.values)]
    text = cio.csv_text(("group", "element", "radius", "mode", "index", "eigenvalue"), rows)
    sys.stdout.write(text)
    if cfg.out and "csv" in cfg.formats:
        cio.write_atomic(Path(cfg.out) / f"spectrum_{cfg.group}.csv", text)
    return code


def cmd_axioms(args) -> int:
    product = mutant_product if args.mutate == "no-translation" else None
    kw = {"product": product} if product else {}
    rep = run_axiom_suite(args.group, trials=args.trials, seed=args.seed if args.seed is not None else 42, **kw)
    G = get_group(args.group)
    for check, n in rep.counts.items():
        bad = sum(1 for f in rep.failures if f.check == check)
        print(f"{G.name} {check}: {'FAIL' if bad else 'pass'} ({n} checked)")
    if rep.failures:
        sys.stdout.write(cio.dumps(rep.failures[0].to_json(G)))
        return EXIT_COMPUTE
    return EXIT_OK


def _list_elements() -> int:
    for name, desc in BUILTINS.items():
        print(f"{name}\t{desc}")
    print(f"groups: {', '.join(GROUP_IDS)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cdo-lab", description=__doc__.splitlines()[0])
    p.add_argument("--list-elements", action="store_true", help="list built-in element names and exit")
    sub = p.add_subparsers(dest="command")

    def common(sp, config=True):
        if config:
            sp.add_argument("config", nargs="?", help="experiment config (JSON)")
        sp.add_argument("--group", choices=GROUP_IDS)
        sp.add_argument("--element", action="append", help="built-in element name (repeatable)")
        sp.add_argument("--radius", type=int, action="append", help="truncation radius (repeatable)")
        sp.add_argument("--depth", type=int)
        sp.add_argument("--out")
        sp.add_argument("--format", help="comma separated subset of csv,json,svg")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--list-elements", action="store_true")

    sp = sub.add_parser("ball", help="ball sizes |ball(r)| for r <= radius")
    sp.add_argument("--group", required=True)
    sp.add_argument("--radius", type=int, action="append")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ball)

    sp = sub.add_parser("gap", help="Hulanicki gap r_l1(f* f) - ||R(f)||^2")
    common(sp)
    sp.set_defaults(func=cmd_gap)

    sp = sub.add_parser("invert", help="inverse finite sections and their shell masses")
    common(sp)
    sp.add_argument("--core-radius", type=int)
    sp.set_defaults(func=cmd_invert)

    sp = sub.add_parser("spectrum", help="spectrum of selfadjoint finite sections")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("axioms", help="randomised algebra axiom suite")
    sp.add_argument("--group", required=True)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mutate", choices=["no-translation"], help="run against a deliberately broken product")
    sp.set_defaults(func=cmd_axioms)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_elements:
        return _list_elements()
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (ConfigError, GroupError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except IllConditionedError as exc:
        _err(f"{exc} (condition estimate {exc.condition:.6e})")
        return EXIT_NUMERIC
    except CdoLabError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
