"""Command-line front end: ``nctriple <suite> [options]``.

Exit status is 0 when every row passes, 1 when a numerical check fails and
2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence, TextIO

from . import __version__
from .errors import ConfigError, NCTripleError
from .group_model import Grid1D
from .hilbert import TripleParams
from .suites import (Table, algebra_suite, cocycle_suite, commutator_suite, dimension_suite,
                     operator_grid, trace_suite)

SUITES = ("cocycle-check", "algebra-test", "commutator", "trace", "dimension", "all")
FORMATS = ("csv", "json")
METHODS = ("closed", "quadrature", "both")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

_SCALAR_KEYS = {"suite", "example", "eta", "omega", "s", "c", "format", "seed", "method",
                "perturb", "group.kind", "group.lo", "group.hi", "group.count",
                "base.lo", "base.hi", "base.count"}


@dataclass
class ScenarioConfig:
    suite: str | None = None
    example: str = "affine"
    eta: float = 1.0
    omega: float = -1.0
    s_list: list[float] = field(default_factory=lambda: [2.5, 3.0, 4.0])
    c_list: list[float] = field(default_factory=lambda: [0.0])
    fmt: str = "csv"
    seed: int = 0
    method: str = "both"
    perturb: float = 0.01
    group_grid: Grid1D | None = None
    base_grid: Grid1D | None = None
    tolerances: dict[str, float] = field(default_factory=dict)

    def validate(self) -> "ScenarioConfig":
        if self.suite not in SUITES:
            raise ConfigError(f"suite must be one of {', '.join(SUITES)}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}")
        nums = [self.eta, self.omega, self.perturb, *self.s_list, *self.c_list,
                *self.tolerances.values()]
        if not all(math.isfinite(v) for v in nums):
            raise ConfigError("numeric fields must be finite")
        if self.omega == 0.0:
            raise ConfigError("omega must be nonzero")
        if not self.s_list:
            raise ConfigError("at least one s value is required")
        return self


def _float(key: str, text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: value must be finite")
    return v


def _floats(key: str, text: str) -> list[float]:
    return [_float(key, t) for t in text.split(",") if t.strip()]


def parse_config_text(text: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment. Unknown keys are rejected."""
    out: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in _SCALAR_KEYS and not key.startswith("tol."):
            raise ConfigError(f"line {n}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        out[key] = value
    if not out:
        raise ConfigError("configuration is empty")
    return out


def _grid_from(items: dict[str, str], prefix: str) -> Grid1D | None:
    keys = [f"{prefix}.lo", f"{prefix}.hi", f"{prefix}.count"]
    present = [k in items for k in keys]
    if not any(present):
        return None
    if not all(present):
        raise ConfigError(f"{prefix}.lo, {prefix}.hi and {prefix}.count must be given together")
    count = _float(keys[2], items[keys[2]])
    if count != int(count):
        raise ConfigError(f"{keys[2]} must be an integer")
    return Grid1D(_float(keys[0], items[keys[0]]), _float(keys[1], items[keys[1]]), int(count))


def apply_items(cfg: ScenarioConfig, items: dict[str, str]) -> ScenarioConfig:
    cfg = replace(cfg, tolerances=dict(cfg.tolerances))
    for key, value in items.items():
        if key == "suite":
            cfg.suite = value
        elif key == "example":
            cfg.example = value
        elif key in ("eta", "omega", "perturb"):
            setattr(cfg, key, _float(key, value))
        elif key == "s":
            cfg.s_list = _floats(key, value)
        elif key == "c":
            cfg.c_list = _floats(key, value)
        elif key == "format":
            cfg.fmt = value
        elif key == "method":
            cfg.method = value
        elif key == "seed":
            try:
                cfg.seed = int(value)
            except ValueError:
                raise ConfigError(f"seed must be an integer, got {value!r}") from None
        elif key == "group.kind":
            if value not in ("real_line", "integers", "dilation"):
                raise ConfigError(f"unknown group.kind {value!r}")
        elif key.startswith("tol."):
            cfg.tolerances[key[4:]] = _float(key, value)
    g = _grid_from(items, "group")
    if g is not None:
        cfg.group_grid = g
    b = _grid_from(items, "base")
    if b is not None:
        cfg.base_grid = b
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nctriple", description=__doc__.splitlines()[0])
    p.add_argument("suite", nargs="?", choices=SUITES)
    p.add_argument("--config", type=Path, help="key=value scenario file")
    p.add_argument("--example", help="affine, zr, dilation[:N] or untwisted")
    p.add_argument("--eta")
    p.add_argument("--omega")
    p.add_argument("--s", help="comma-separated trace exponents")
    p.add_argument("--c", help="comma-separated modular powers")
    p.add_argument("--grid", help="base grid lo:hi:count")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--seed")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--perturb", help="size of the cocycle perturbation (0 disables)")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="tolerance override, repeatable")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def config_from_args(ns: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig()
    if ns.config is not None:
        try:
            text = ns.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = apply_items(cfg, parse_config_text(text))
    items: dict[str, str] = {}
    for key in ("example", "eta", "omega", "s", "c", "seed", "method", "perturb"):
        v = getattr(ns, key)
        if v is not None:
            items[key] = v
    if ns.format is not None:
        items["format"] = ns.format
    if ns.suite is not None:
        items["suite"] = ns.suite
    for spec in ns.tol:
        if "=" not in spec:
            raise ConfigError(f"--tol expects NAME=VALUE, got {spec!r}")
        k, v = spec.split("=", 1)
        items[f"tol.{k.strip()}"] = v
    cfg = apply_items(cfg, items)
    if ns.grid is not None:
        cfg.base_grid = Grid1D.parse(ns.grid)
    if cfg.suite is None:
        raise ConfigError("no suite given (positional argument or suite= in the config)")
    return cfg.validate()


# ---------------------------------------------------------------------------
# execution


def _jobs(cfg: ScenarioConfig) -> list[tuple[str, Callable[[], Table]]]:
    suite = cfg.suite
    p = lambda: TripleParams(cfg.eta, cfg.omega, cfg.s_list[0], cfg.c_list[0])  # noqa: E731
    method = {"closed": "closed-form"}.get(cfg.method, cfg.method)
    jobs: list[tuple[str, Callable[[], Table]]] = []

    def cocycles(ex: str):
        return (f"cocycle-check:{ex}",
                lambda: cocycle_suite(ex, cfg.perturb, cfg.seed, cfg.tolerances))

    if suite == "cocycle-check":
        jobs.append(cocycles(cfg.example))
    if suite == "algebra-test":
        jobs.append(("algebra-test", lambda: algebra_suite(cfg.group_grid, cfg.base_grid,
                                                           cfg.tolerances)))
    if suite == "commutator":
        jobs.append(("commutator", lambda: commutator_suite(
            p(), operator_grid(cfg.base_grid, cfg.group_grid), cfg.tolerances)))
    if suite == "trace":
        jobs.append(("trace", lambda: trace_suite(cfg.example, cfg.eta, cfg.omega, cfg.s_list,
                                                  method, cfg.tolerances)))
    if suite == "dimension":
        jobs.append(("dimension", lambda: dimension_suite(cfg.example, cfg.eta, cfg.omega,
                                                          cfg.tolerances)))
    if suite == "all":
        for ex in ("affine", "zr", "dilation:3"):
            jobs.append(cocycles(ex))
        jobs.append(("algebra-test", lambda: algebra_suite(cfg.group_grid, cfg.base_grid,
                                                           cfg.tolerances)))
        jobs.append(("commutator", lambda: commutator_suite(
            p(), operator_grid(cfg.base_grid, cfg.group_grid), cfg.tolerances)))
        # dilations of R^n converge for s > n + 1; shift the grid accordingly
        for ex, shift in (("affine", 0.0), ("zr", 0.0), ("dilation:3", 2.0)):
            s_list = [s + shift for s in cfg.s_list]
            jobs.append((f"trace:{ex}", lambda ex=ex, s_list=s_list: trace_suite(
                ex, cfg.eta, cfg.omega, s_list, method, cfg.tolerances)))
        for ex in ("affine", "zr", "dilation:1", "dilation:2", "dilation:3", "untwisted"):
            jobs.append((f"dimension:{ex}", lambda ex=ex: dimension_suite(
                ex, cfg.eta, cfg.omega, cfg.tolerances)))
    return jobs


def thread_count() -> int:
    raw = os.environ.get("NCTRIPLE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"NCTRIPLE_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("NCTRIPLE_THREADS must be >= 1")
    return n


def iter_suite(cfg: ScenarioConfig) -> Iterator[tuple[str, Table]]:
    """Yield (name, table) in job order as soon as each table and its predecessors finish."""
    jobs = _jobs(cfg)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        futures = [pool.submit(fn) for _, fn in jobs]
        try:
            for (name, _), fut in zip(jobs, futures):
                yield name, fut.result()
        finally:
            for fut in futures:
                fut.cancel()


def run_suite(cfg: ScenarioConfig) -> list[tuple[str, Table]]:
    return list(iter_suite(cfg))


def fmt_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, complex):
        if v.imag == 0.0:
            return fmt_value(v.real)
        return f"{v.real:.12g}{v.imag:+.12g}j"
    return f"{float(v):.12g}"


def json_value(v):
    text = fmt_value(v)
    if isinstance(v, str):
        return v
    if isinstance(v, complex) and v.imag != 0.0:
        return {"re": float(f"{v.real:.12g}"), "im": float(f"{v.imag:.12g}")}
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    x = float(text)
    return x if math.isfinite(x) else text


def header(cfg: ScenarioConfig) -> dict[str, str]:
    return {"tool": "nctriple", "version": __version__, "suite": cfg.suite,
            "example": cfg.example, "seed": str(cfg.seed)}


def write_csv(cfg: ScenarioConfig, results: Iterable[tuple[str, Table]], out: TextIO,
              multi: bool = False) -> list[tuple[str, Table]]:
    """Write tables as they arrive (flushing after each) and return them."""
    w = csv.writer(out, lineterminator="\n")
    out.write("# " + " ".join(f"{k}={v}" for k, v in header(cfg).items()) + "\n")
    done = []
    for name, table in results:
        done.append((name, table))
        if multi:
            out.write(f"# table={name}\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([fmt_value(v) for v in row])
        summary = ["summary"] + [""] * (len(table.columns) - 2) + [_table_verdict(table)]
        w.writerow(summary)
        out.flush()
    if multi:
        w.writerow(["overall", _overall(done)])
    return done


def write_json(cfg: ScenarioConfig, results: Iterable[tuple[str, Table]], out: TextIO,
               multi: bool = False) -> list[tuple[str, Table]]:
    results = list(results)
    doc = {
        "header": header(cfg),
        "tables": [{"name": name, "columns": list(t.columns),
                    "rows": [[json_value(v) for v in r] for r in t.rows],
                    "verdict": _table_verdict(t)} for name, t in results],
        "verdict": _overall(results),
    }
    json.dump(doc, out, indent=1, allow_nan=False)
    out.write("\n")
    return results


def _table_verdict(t: Table) -> str:
    return "PASS" if t.passed else "FAIL"


def _overall(results: Sequence[tuple[str, Table]]) -> str:
    return "PASS" if all(t.passed for _, t in results) else "FAIL"


def main(argv: Sequence[str] | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        cfg = config_from_args(ns)
        writer = write_json if cfg.fmt == "json" else write_csv
        results = writer(cfg, iter_suite(cfg), out, multi=len(_jobs(cfg)) > 1)
    except ConfigError as exc:
        err.write(f"nctriple: configuration error: {exc}\n")
        return EXIT_CONFIG
    except NCTripleError as exc:
        err.write(f"nctriple: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        err.write(f"nctriple: configuration error: {exc}\n")
        return EXIT_CONFIG
    failed = [(name, row) for name, t in results for row in t.failures]
    for name, row in failed:
        err.write(f"nctriple: FAIL in {name}: {','.join(fmt_value(v) for v in row)}\n")
    return EXIT_NUMERIC if failed else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
