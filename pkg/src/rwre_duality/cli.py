"""Command-line front end.

``rwre <command> [--config FILE] [flags]`` with commands ``gen-env``, ``gf``,
``cf``, ``verify``, ``estimate`` and ``mc``.  A JSON config supplies defaults;
flags override it.  Exit status: 0 success (all verdicts pass), 1 a
verification verdict failed, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from . import __version__
from . import rng as _rng
from .cf import BACKWARD, FORWARD, convergents_recursive
from .duality import SAMPLED_ATOL, estimate_average_identity, reports_to_csv, reports_to_json
from .environment import (
    EnvironmentWindow,
    check_positive_model,
    check_probability_model,
    model_from_dict,
    model_to_dict,
    sample_c_environment,
    sample_environment,
)
from .errors import ConfigurationError, RWREError
from .gf import compute_gf_table, gf_column
from .kernels import BACKEND
from .montecarlo import DEFAULT_CAP, estimate_gf
from .verify import (
    DEFAULT_C_MIXTURE,
    DEFAULT_C_MODEL,
    DEFAULT_MIXTURE,
    DEFAULT_MODEL,
    Tolerances,
    VerifyParams,
    run_verification,
    suite_provenance,
)

COMMANDS = ("gen-env", "gf", "cf", "verify", "estimate", "mc")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    model: dict = field(default_factory=lambda: model_to_dict(DEFAULT_MODEL))
    c_model: dict = field(default_factory=lambda: model_to_dict(DEFAULT_C_MODEL))
    mixture: dict = field(default_factory=lambda: model_to_dict(DEFAULT_MIXTURE))
    c_mixture: dict = field(default_factory=lambda: model_to_dict(DEFAULT_C_MIXTURE))
    u: float = 0.5
    depth: int = 20
    lo: int = 0
    hi: int = 0
    base: int = 0
    direction: str = BACKWARD
    which: str = "cgzext"
    samples: int = 10_000
    paths: int = 100_000
    cap: int = DEFAULT_CAP
    instances: int = 20
    seed: int = 0
    tol: Optional[float] = None
    env_file: Optional[str] = None
    out: Optional[str] = None
    format: str = "csv"

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}", key="command")
        if not 0.0 < self.u <= 1.0:
            raise ConfigurationError(f"u={self.u} must lie in (0, 1]", key="u")
        if self.command in ("verify",) and self.u == 1.0:
            raise ConfigurationError("verify needs u < 1", key="u")
        for key in ("depth", "samples", "paths", "cap", "instances"):
            if getattr(self, key) < 1:
                raise ConfigurationError(f"{key} must be >= 1", key=key)
        if self.lo > self.hi:
            raise ConfigurationError("lo must not exceed hi", key="lo")
        if self.direction not in (BACKWARD, FORWARD):
            raise ConfigurationError("direction must be backward or forward", key="direction")
        if self.which not in ("cgzext", "d"):
            raise ConfigurationError("which must be cgzext or d", key="which")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("format must be csv or json", key="format")
        if self.tol is not None and self.tol < 0:
            raise ConfigurationError("tol must be >= 0", key="tol")
        for key in ("model", "mixture"):
            _model(self, key, positive=False)
        for key in ("c_model", "c_mixture"):
            _model(self, key, positive=True)
        return self


def _model(cfg, key, positive):
    try:
        m = model_from_dict(getattr(cfg, key))
        (check_positive_model if positive else check_probability_model)(m)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{key}: {exc}", key=key) from None
    return m


def build_parser():
    parser = argparse.ArgumentParser(prog="rwre", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--tol", type=float)
        p.add_argument("--depth", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--u", type=float)
        p.add_argument("--model", type=json.loads, help="model as inline JSON")
        p.add_argument("--c-model", dest="c_model", type=json.loads)
        if name in ("gen-env", "gf"):
            p.add_argument("--lo", type=int)
            p.add_argument("--hi", type=int)
        if name == "gf":
            p.add_argument("--env-file", dest="env_file", help="CSV window (site,p)")
        if name == "cf":
            p.add_argument("--direction", choices=(BACKWARD, FORWARD))
            p.add_argument("--base", type=int)
        if name == "estimate":
            p.add_argument("--which", choices=("cgzext", "d"))
        if name == "mc":
            p.add_argument("--paths", type=int)
            p.add_argument("--cap", type=int)
        if name == "verify":
            p.add_argument("--instances", type=int)
    return parser


def load_config(args):
    data: dict[str, Any] = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config: {exc}", key="config") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object", key="config")
    known = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in known:
            raise ConfigurationError(f"unknown config key {key!r}", key=key)
    data = {k: v for k, v in data.items() if k != "command"}
    for key, value in vars(args).items():
        if key in known and key != "command" and value is not None:
            data[key] = value
    if "seed" not in data and os.environ.get("RWRE_SEED"):
        try:
            data["seed"] = int(os.environ["RWRE_SEED"])
        except ValueError:
            raise ConfigurationError("RWRE_SEED must be an integer", key="seed") from None
    try:
        cfg = RunConfig(command=args.command, **data)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None
    for f in fields(RunConfig):
        val = getattr(cfg, f.name)
        if f.type in ("float", "Optional[float]") and val is not None and not isinstance(val, (int, float)):
            raise ConfigurationError(f"{f.name} must be a number", key=f.name)
        if f.type == "int" and not isinstance(val, int):
            raise ConfigurationError(f"{f.name} must be an integer", key=f.name)
    return cfg.validate()


def provenance(cfg):
    return {"config": asdict(cfg), "version": __version__, "backend": BACKEND, "rng": _rng.SCHEME}


def _rows_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def emit(cfg, csv_body, payload):
    """Write the artifact; CSV output gets a ``.meta.json`` sidecar."""
    prov = provenance(cfg)
    meta = {"created": datetime.now(timezone.utc).isoformat()}
    if cfg.format == "json":
        text = json.dumps({"provenance": prov, "metadata": meta, "result": payload},
                          indent=2, sort_keys=True) + "\n"
    else:
        text = csv_body
    if cfg.out is None:
        sys.stdout.write(text)
        return
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    if cfg.format == "csv":
        Path(str(out) + ".meta.json").write_text(
            json.dumps({"provenance": prov, "metadata": meta}, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")


def cmd_gen_env(cfg):
    model = _model(cfg, "model", positive=False)
    env = sample_environment(model, cfg.lo, cfg.hi, cfg.seed)
    emit(cfg, env.to_csv(), {"lo": env.lo, "hi": env.hi, "p": env.p_array.tolist()})
    return EXIT_OK


def cmd_gf(cfg):
    N = cfg.depth
    if cfg.env_file:
        try:
            env = EnvironmentWindow.from_csv(Path(cfg.env_file).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigurationError(f"cannot read env file: {exc}", key="env_file") from None
    else:
        env = sample_environment(_model(cfg, "model", False), cfg.lo - N, cfg.hi + N, cfg.seed)
    table = compute_gf_table(env, cfg.u, N, (cfg.lo, cfg.hi))
    emit(cfg, table.to_csv(), {"u": table.u, "N": N, "lo": table.lo, "hi": table.hi,
                                "f": table.f.tolist(), "fprime": table.fprime.tolist()})
    return EXIT_OK


def cmd_cf(cfg):
    N = cfg.depth
    c = sample_c_environment(_model(cfg, "c_model", True), cfg.base - N, cfg.base + N, cfg.seed)
    seq = convergents_recursive(c, N, cfg.direction, cfg.base)
    emit(cfg, seq.to_csv(), {"direction": seq.direction, "base": seq.base,
                             "quotients": seq.quotients.tolist(),
                             "convergents": seq.convergents.tolist()})
    return EXIT_OK


def cmd_verify(cfg):
    params = VerifyParams(
        model=_model(cfg, "model", False), c_model=_model(cfg, "c_model", True),
        mixture=_model(cfg, "mixture", False), c_mixture=_model(cfg, "c_mixture", True),
        u=cfg.u, depth=cfg.depth, instances=cfg.instances, samples=cfg.samples, seed=cfg.seed,
        tol=Tolerances() if cfg.tol is None else Tolerances.uniform(cfg.tol),
    )
    reports = run_verification(params)
    ok = all(r.verdict for r in reports)
    payload = json.loads(reports_to_json(reports, suite_provenance(params)))
    emit(cfg, reports_to_csv(reports), payload)
    for r in reports:
        if not r.verdict:
            print(f"FAIL {r.identity}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_estimate(cfg):
    key = "model" if cfg.which == "cgzext" else "c_model"
    model = _model(cfg, key, positive=(cfg.which == "d"))
    est = estimate_average_identity(model, cfg.u, cfg.depth, cfg.samples, cfg.seed, cfg.which)
    ok = abs(est.mean) <= 3.0 * est.stderr + SAMPLED_ATOL
    row = {"which": cfg.which, "n": cfg.depth, "u": cfg.u, "mean": est.mean,
           "stderr": est.stderr, "num_samples": est.num_samples, "seed": cfg.seed,
           "verdict": "pass" if ok else "fail"}
    emit(cfg, _rows_csv(list(row), [list(row.values())]), row)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_mc(cfg):
    n = cfg.depth
    env = sample_environment(_model(cfg, "model", False), -n, 0, cfg.seed)
    est = estimate_gf(env, cfg.u, n, cfg.paths, cfg.cap, cfg.seed)
    exact = float(gf_column(env, cfg.u, 0, n)[-1])
    row = {**est.to_dict(), "exact": exact, "n": n, "u": cfg.u}
    emit(cfg, _rows_csv(list(row), [list(row.values())]), row)
    return EXIT_OK


HANDLERS = {"gen-env": cmd_gen_env, "gf": cmd_gf, "cf": cmd_cf, "verify": cmd_verify,
            "estimate": cmd_estimate, "mc": cmd_mc}


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg)
    except ConfigurationError as exc:
        print(f"rwre: configuration error [{exc.key}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RWREError as exc:
        print(f"rwre: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
    except ConfigurationError as exc:
        print(f"rwre: configuration error [{exc.key}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
