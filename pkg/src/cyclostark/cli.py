"""Batch front-end: ``cyclostark verify``, ``cyclostark selfcheck`` and ``cyclostark fit``.

Configuration is layered, later layers winning:
built-in defaults, a flat ``key=value`` file (``--config``), environment
variables ``CYCLOSTARK_<KEY>``, then command-line flags.

Exit codes: 0 all checks pass, 1 some check failed (manifest still
written), 2 invalid configuration, 3 internal error.
"""

from __future__ import annotations

import json
import math
import os
import re
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import click
from sympy import isprime

from .stark_engine import CHECK_KINDS, SCHEMA_VERSION, CheckReport, calibration, run_check

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3
ENV_PREFIX = "CYCLOSTARK_"

# lower-case CLI names; the order here is the canonical execution order
_ALIASES = {
    "c1": "C1",
    "prop2a": "PROP2A",
    "eq3g": "EQ3G",
    "prop3d": "PROP3D",
    "lemma1z": "LEMMA1Z",
    "vanish": "VANISH",
    "lemma3i": "LEMMA3I",
    "semilocal": "SEMILOCAL_3F1",
    "semilocal_3f1": "SEMILOCAL_3F1",
}
_ORDER = {k: i for i, k in enumerate(CHECK_KINDS)}


class ConfigError(ValueError):
    """Raised for anything the user can fix by changing the configuration."""


# ------------------------------------------------------------------ RunConfig


def parse_range(text: str) -> tuple[int, int]:
    """'1..2' -> (1, 2); a bare '3' -> (3, 3)."""
    m = re.fullmatch(r"\s*(-?\d+)\s*(?:\.\.\s*(-?\d+)\s*)?", str(text))
    if not m:
        raise ConfigError(f"bad n range {text!r}, expected a..b")
    a = int(m.group(1))
    b = int(m.group(2)) if m.group(2) is not None else a
    if b < a:
        raise ConfigError(f"empty n range {text!r}")
    return a, b


def parse_int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad m list {text!r}, expected comma separated integers") from None


def parse_checks(items) -> list[str]:
    out = []
    for item in items:
        for name in re.split(r"[,\s]+", str(item).strip()):
            if not name:
                continue
            kind = _ALIASES.get(name.lower())
            if kind is None:
                raise ConfigError(f"unknown check {name!r}; choose from {sorted(set(_ALIASES))}")
            if kind not in out:
                out.append(kind)
    return sorted(out, key=_ORDER.__getitem__)


@dataclass
class RunConfig:
    p: int = 3
    fprime: int = 5
    n: tuple = (1, 1)
    m: list = field(default_factory=lambda: [-1])
    precision: int = 8
    trunc: Optional[int] = None
    checks: list = field(default_factory=lambda: ["C1"])
    out: Optional[str] = None
    format: str = "text"
    workers: int = 1
    seed: int = 0
    timing: bool = False

    KEYS = ("p", "fprime", "n", "m", "precision", "trunc", "checks", "out", "format",
            "workers", "seed", "timing")

    def validate(self) -> "RunConfig":
        if self.p < 3 or not isprime(self.p):
            raise ConfigError(f"p must be an odd prime, got {self.p}")
        if self.fprime <= 1 or math.gcd(self.fprime, self.p) != 1:
            raise ConfigError(f"f' must be > 1 and prime to p, got {self.fprime}")
        if self.precision < 4:
            raise ConfigError(f"precision must be at least 4, got {self.precision}")
        if self.n[0] < 0:
            raise ConfigError("tower levels start at n = 0")
        if self.format not in ("text", "json"):
            raise ConfigError(f"format must be text or json, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.trunc is not None and self.trunc < 1:
            raise ConfigError("trunc must be positive")
        if not self.checks:
            raise ConfigError("no checks selected")
        return self

    def update(self, values: dict) -> "RunConfig":
        """Apply raw (string or typed) values; None means 'not given'."""
        conv = {
            "p": int, "fprime": int, "precision": int, "workers": int, "seed": int,
            "trunc": lambda v: None if str(v).lower() in ("", "none") else int(v),
            "n": lambda v: tuple(v) if isinstance(v, (tuple, list)) else parse_range(v),
            "m": parse_int_list,
            "checks": lambda v: parse_checks(v if isinstance(v, (list, tuple)) else [v]),
            "out": lambda v: str(v) if v else None,
            "format": lambda v: str(v).lower(),
            "timing": lambda v: v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes", "on"),
        }
        for key, raw in values.items():
            key = key.replace("-", "_").lower()
            if key == "check":
                key = "checks"
            if key not in self.KEYS:
                raise ConfigError(f"unknown configuration key {key!r}")
            if raw is None:
                continue
            try:
                setattr(self, key, conv[key](raw))
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        return self

    def echo(self) -> dict:
        """The part of the configuration that determines the results."""
        d = asdict(self)
        d["n"] = list(self.n)
        for k in ("out", "format", "workers", "timing"):
            d.pop(k)
        return d


def read_config_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    vals = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        vals[k] = v
    return vals


def env_config(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for key in RunConfig.KEYS:
        v = environ.get(ENV_PREFIX + key.upper())
        if v is not None:
            out[key] = v
    return out


def build_config(config_file: Optional[str], flags: dict, environ=None) -> RunConfig:
    cfg = RunConfig()
    if config_file:
        cfg.update(read_config_file(config_file))
    cfg.update(env_config(environ))
    cfg.update({k: v for k, v in flags.items() if v is not None and v != ()})
    return cfg.validate()


# ---------------------------------------------------------------- RunManifest


@dataclass
class RunManifest:
    config: dict
    calibration: str
    reports: list
    schema_version: int = SCHEMA_VERSION

    @property
    def summary(self) -> dict:
        passed = sum(r.passed for r in self.reports)
        return {"total": len(self.reports), "passed": passed,
                "failed": len(self.reports) - passed,
                "outcome": "PASS" if self.reports and passed == len(self.reports) else "FAIL"}

    @property
    def passed(self) -> bool:
        return self.summary["outcome"] == "PASS"

    def to_dict(self, timing: bool = False) -> dict:
        return {"schema_version": self.schema_version, "config": self.config,
                "calibration": self.calibration,
                "reports": [_jsonable(r.to_dict(timing)) for r in self.reports],
                "summary": self.summary}

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported manifest schema {d.get('schema_version')}")
        reports = [CheckReport.from_dict(_unjson(r)) for r in d["reports"]]
        return cls(d["config"], d["calibration"], reports, d["schema_version"])

    def to_text(self, timing: bool = False) -> str:
        s = self.summary
        lines = [f"{s['outcome']}  {s['passed']}/{s['total']} checks passed  "
                 f"calibration={self.calibration}  p={self.config['p']} f'={self.config['fprime']} "
                 f"M={self.config['precision']}"]
        lines.append(f"{'check':14s} {'n':>3s} {'m':>4s} {'outcome':7s} {'margin':>12s} {'threshold':>10s}"
                     + ("  seconds" if timing else ""))
        for r in self.reports:
            n = r.params.get("n", "-")
            m = r.params.get("m", "-")
            row = f"{r.kind:14s} {n!s:>3s} {m!s:>4s} {r.outcome:7s} {r.margin:>12.6g} {r.threshold:>10.6g}"
            if timing:
                row += f"  {r.wall_time:7.2f}"
            lines.append(row)
        return "\n".join(lines) + "\n"

    def emit(self, fmt: str, path: Optional[str] = None, timing: bool = False) -> str:
        text = self.to_json(timing) if fmt == "json" else self.to_text(timing)
        if path:
            Path(path).write_text(text)
        return text


def _jsonable(x):
    """Replace non-finite floats by strings so the JSON stays strict."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _unjson(x):
    if x in ("inf", "-inf", "nan"):
        return float(x)
    if isinstance(x, dict):
        return {k: _unjson(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_unjson(v) for v in x]
    return x


# ------------------------------------------------------------------ execution


def plan(cfg: RunConfig) -> list[tuple]:
    """(kind, n, m) tasks in canonical order; C1 first since it fixes the calibration."""
    tasks = []
    ns = range(cfg.n[0], cfg.n[1] + 1)
    for kind in cfg.checks:
        if kind == "PROP3D":
            tasks.append((kind, cfg.n[0], cfg.m[0] if cfg.m else -1))
        elif kind == "C1":
            tasks.extend((kind, n, -1) for n in ns)
        elif kind == "LEMMA1Z":
            tasks.extend((kind, n, cfg.m[0] if cfg.m else -1) for n in ns)
        else:
            tasks.extend((kind, n, m) for n in ns for m in cfg.m)
    return tasks


def _run_task(args) -> CheckReport:
    kind, p, fprime, n, m, precision, trunc = args
    extra = {"trunc": trunc} if trunc else {}
    return run_check(kind, p, fprime, n=n, m=m, precision=precision, **extra)


def run(cfg: RunConfig) -> RunManifest:
    cal = calibration()
    args = [(k, cfg.p, cfg.fprime, n, m, cfg.precision, cfg.trunc) for k, n, m in plan(cfg)]
    if cfg.workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(_run_task, args))
    else:
        reports = [_run_task(a) for a in args]
    # pool.map keeps submission order, which is already canonical
    return RunManifest(cfg.echo(), cal.fingerprint, reports)


# ------------------------------------------------------------------------ CLI


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Cyclotomic Z_p-tower verification toolkit."""


@main.command()
@click.argument("checks", nargs=-1)
@click.option("--check", "check_opt", multiple=True, help="Check to run (repeatable).")
@click.option("--p", "p", type=int, default=None, help="Odd prime p.")
@click.option("--fprime", type=int, default=None, help="Tame conductor f' (> 1, prime to p).")
@click.option("--n", "n", default=None, help="Level range a..b.")
@click.option("--m", "m", default=None, help="Comma separated m values.")
@click.option("--precision", type=int, default=None, help="Working p-adic precision M (>= 4).")
@click.option("--trunc", type=int, default=None, help="Series truncation degree override.")
@click.option("--out", default=None, help="Write the manifest here.")
@click.option("--format", "fmt", default=None, help="text or json.")
@click.option("--workers", type=int, default=None, help="Parallel worker processes.")
@click.option("--seed", type=int, default=None, help="Seed for randomized suites.")
@click.option("--timing/--no-timing", default=None, help="Include wall times in the output.")
@click.option("--config", "config_file", default=None, help="Flat key=value config file.")
def verify(checks, check_opt, p, fprime, n, m, precision, trunc, out, fmt, workers, seed, timing, config_file):
    """Run verification checks and emit a manifest."""
    selected = list(checks) + list(check_opt)
    flags = {"p": p, "fprime": fprime, "n": n, "m": m, "precision": precision, "trunc": trunc,
             "out": out, "format": fmt, "workers": workers, "seed": seed, "timing": timing,
             "checks": selected or None}
    try:
        cfg = build_config(config_file, flags)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        manifest = run(cfg)
    except Exception:
        click.echo("internal error:\n" + traceback.format_exc(), err=True)
        sys.exit(EXIT_INTERNAL)
    try:
        text = manifest.emit(cfg.format, cfg.out, cfg.timing)
    except OSError as exc:
        click.echo(f"cannot write manifest: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    click.echo(text if not cfg.out else manifest.to_text(cfg.timing), nl=False)
    sys.exit(EXIT_OK if manifest.passed else EXIT_FAIL)


@main.command()
@click.option("--module", "modules", multiple=True,
              help="Module suite to run (repeatable); default: all.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def selfcheck(modules, seed, fmt):
    """Run the randomized property suites."""
    from .suites import SUITES, run_suite

    names = list(modules) or list(SUITES)
    unknown = [x for x in names if x not in SUITES]
    if unknown:
        click.echo(f"configuration error: unknown module {unknown}; choose from {list(SUITES)}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        results = {name: run_suite(name, seed) for name in names}
    except Exception:
        click.echo("internal error:\n" + traceback.format_exc(), err=True)
        sys.exit(EXIT_INTERNAL)
    ok = all(r.passed for rs in results.values() for r in rs)
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "seed": seed, "outcome": "PASS" if ok else "FAIL",
               "suites": {k: [r.to_dict() for r in v] for k, v in results.items()}}
        click.echo(json.dumps(_jsonable(doc), sort_keys=True, indent=2))
    else:
        total = sum(len(v) for v in results.values())
        good = sum(r.passed for v in results.values() for r in v)
        click.echo(f"{'PASS' if ok else 'FAIL'}  {good}/{total} properties hold  seed={seed}")
        for name, rs in results.items():
            for r in rs:
                click.echo(f"{name:17s} {'PASS' if r.passed else 'FAIL'}  {r.name}  {r.detail}")
    sys.exit(EXIT_OK if ok else EXIT_FAIL)


@main.command()
@click.option("--p", "p", type=int, default=3, show_default=True)
@click.option("--fprime", type=int, default=5, show_default=True)
@click.option("--n", "n", type=int, default=1, show_default=True)
@click.option("--precision", type=int, default=8, show_default=True)
@click.option("--out", "out_dir", required=True, help="Directory for the series records.")
@click.option("--holdout", type=int, default=None, help="Validate at this unused interpolation node.")
def fit(p, fprime, n, precision, out_dir, holdout):
    """Fit per-character Iwasawa series and persist them as text records."""
    from .stark_engine import fit_character, fit_holdout, fit_nodes, in_M, phi_character_value, tower_context

    try:
        RunConfig(p=p, fprime=fprime, n=(n, n), precision=precision).validate()
        if holdout is not None and (not in_M(p, holdout) or holdout in fit_nodes(p)):
            raise ConfigError(f"holdout {holdout} must be an unused interpolation node "
                              f"(m = 1 mod {p - 1}, m <= 0, not in {fit_nodes(p)})")
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        ctx = tower_context(p, fprime)
        cal = calibration()
        outp = Path(out_dir)
        outp.mkdir(parents=True, exist_ok=True)
        index = []
        for i, chi in enumerate(ctx.group(n).characters()):
            if phi_character_value(ctx, chi, n, "p", fit_nodes(p)[0], cal).is_zero():
                continue
            est, (e, k), _ = fit_character(ctx, chi, n, precision, cal=cal)
            name = f"series_{i:03d}.iws"
            (outp / name).write_text(est.series_.to_record())
            index.append({"file": name, "character": chi.label, "psi_gamma": [e, k],
                          "precision": int(est.series_.precision)})
        doc = {"schema_version": SCHEMA_VERSION, "p": p, "fprime": fprime, "n": n,
               "precision": precision, "calibration": cal.fingerprint, "series": index}
        if holdout is not None:
            doc["holdout"] = {"node": holdout, "rows": fit_holdout(ctx, n, precision, holdout, cal)}
        (outp / "index.json").write_text(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")
    except Exception:
        click.echo("internal error:\n" + traceback.format_exc(), err=True)
        sys.exit(EXIT_INTERNAL)
    ok = True
    if holdout is not None:
        ok = all(r["residual"] >= r["certified"] for r in doc["holdout"]["rows"])
        for r in doc["holdout"]["rows"]:
            click.echo(f"{r['label']:10s} residual v={r['residual']:g} certified={r['certified']}")
    click.echo(f"wrote {len(index)} series to {outp}")
    sys.exit(EXIT_OK if ok else EXIT_FAIL)


if __name__ == "__main__":  # pragma: no cover
    main()
