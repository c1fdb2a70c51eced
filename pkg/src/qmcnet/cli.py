"""Command-line interface: ``qmcnet {gen-points,wce,convergence,haar,verify}``.

Exit codes: 0 success, 2 configuration or domain error, 3 capacity guard.
Every output starts with ``# config: <json>``. Files are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import CapacityError, ConfigError, DomainError, QmcError
from .experiments import (
    DEFAULT_SEED,
    DEFAULT_SHIFTS,
    METHODS,
    TEST_FUNCTIONS,
    build_rule,
    convergence_sweep,
    plot_data,
    sweep_csv,
)
from .f2core import (
    GeneratingMatrixSet,
    PointSet,
    generate_digital_net,
    interlace,
    interlace_matrices,
    load_matrices,
    load_net,
    manifest,
    verify_order_sigma_t,
)
from .faberhaar import haar_decay_profile, profile_csv
from .generators import CubatureRule
from .kernels import WCE_HEADER, KernelSpec, wce_csv_row, worst_case_error

COMMANDS = ("gen-points", "wce", "convergence", "haar", "verify")
DEFAULTS = {
    "matrices": None,
    "method": ["order2net"],
    "d": 2,
    "n": [4],
    "r": "2",
    "sigma": 2,
    "seed": DEFAULT_SEED,
    "shifts": DEFAULT_SHIFTS,
    "exact": False,
    "out": None,
    "function": None,
    "timing": True,
}


@dataclass
class RunConfig:
    command: str
    matrices: str | None = None
    method: list[str] = field(default_factory=lambda: ["order2net"])
    d: int = 2
    n: list[int] = field(default_factory=lambda: [4])
    r: str = "2"
    sigma: int = 2
    seed: int = DEFAULT_SEED
    shifts: int = DEFAULT_SHIFTS
    exact: bool = False
    out: str | None = None
    function: str | None = None
    timing: bool = True

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for m in self.method:
            if m not in METHODS and not (m == "file" and self.matrices):
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)} or 'file' with --matrices")
        if self.d < 1:
            raise ConfigError("--d must be >= 1")
        if not self.n or any(k < 0 for k in self.n):
            raise ConfigError("--n must be a non-negative integer or range A..B")
        if self.sigma < 1:
            raise ConfigError("--sigma must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if self.shifts < 1:
            raise ConfigError("--shifts must be >= 1")
        r = self.rational_r
        if r <= Fraction(1, 2):
            raise ConfigError("--r must exceed 1/2")
        if self.exact and r not in (1, 2):
            raise ConfigError(f"exact mode needs r in {{1, 2}}, got r={r}")
        if self.function is not None and self.function not in TEST_FUNCTIONS:
            raise ConfigError(f"unknown test function {self.function!r}; choose from {', '.join(TEST_FUNCTIONS)}")
        if self.command == "gen-points" and len(self.n) != 1:
            raise ConfigError("gen-points needs a single --n")

    @property
    def rational_r(self) -> Fraction:
        try:
            return Fraction(str(self.r))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"--r must be a rational number, got {self.r!r}") from exc

    def header(self) -> str:
        return "# config: " + json.dumps(asdict(self), sort_keys=True) + "\n"


def parse_n(text) -> list[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(a) for a in text]
    text = str(text)
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ConfigError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError as exc:
        raise ConfigError(f"--n must be INT or A..B, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option defaults (flags take precedence)")
    common.add_argument("--matrices", help="matrix file, or directory of shipped-format net files")
    common.add_argument("--method", help=f"comma-separated list from {', '.join(METHODS)}")
    common.add_argument("--d", type=int, help="dimension of the rule")
    common.add_argument("--n", help="size index INT or range A..B")
    common.add_argument("--r", help="smoothness, a rational such as 2 or 3/2")
    common.add_argument("--sigma", type=int, help="interlacing factor")
    common.add_argument("--seed", type=int, help="shift stream seed (unsigned 64-bit)")
    common.add_argument("--shifts", type=int, help="number of random shifts")
    common.add_argument("--function", help=f"test function ({', '.join(TEST_FUNCTIONS)}) for shifted-error sweeps")
    common.add_argument("--exact", action="store_true", default=None, help="rational arithmetic")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--no-timing", dest="timing", action="store_false", default=None, help="blank the seconds column")
    parser = argparse.ArgumentParser(prog="qmcnet", description="Higher-order digital nets and cubature experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-points", parents=[common], help="write the points of a rule as CSV")
    sub.add_parser("wce", parents=[common], help="worst-case errors in the periodic mixed Sobolev space")
    sub.add_parser("convergence", parents=[common], help="error sweep over a range of sizes")
    sub.add_parser("haar", parents=[common], help="Haar coefficient decay profile of a net")
    sub.add_parser("verify", parents=[common], help="t-values of generating matrices")
    return parser


def make_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
        unknown = set(loaded) - set(values) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update({k: v for k, v in loaded.items() if k != "command"})
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if isinstance(values["method"], str):
        values["method"] = [m.strip() for m in values["method"].split(",") if m.strip()]
    values["n"] = parse_n(values["n"])
    values["r"] = str(values["r"])
    cfg = RunConfig(command=args.command, **values)
    cfg.validate()
    return cfg


def _write(cfg: RunConfig, body: str, suffix_path: str | None = None) -> None:
    text = cfg.header() + body
    target = suffix_path or cfg.out
    if target is None:
        sys.stdout.write(text)
        return
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _file_rule(cfg: RunConfig) -> tuple[CubatureRule, GeneratingMatrixSet]:
    mats = load_matrices(cfg.matrices)
    ps = generate_digital_net(mats)
    if cfg.method[0] == "order2net":
        ps = interlace(ps, cfg.sigma)
    return CubatureRule.from_pointset(ps, cfg.method[0]), mats


def _rule(cfg: RunConfig, method: str, n: int) -> CubatureRule:
    if method == "file" or (cfg.matrices and Path(cfg.matrices).is_file()):
        return _file_rule(cfg)[0]
    return build_rule(method, cfg.d, n, cfg.matrices, cfg.sigma).rule


def cmd_gen_points(cfg: RunConfig) -> None:
    rule = _rule(cfg, cfg.method[0], cfg.n[0])
    _write(cfg, rule.to_csv())


def cmd_wce(cfg: RunConfig) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(WCE_HEADER)
    r = cfg.rational_r
    for method in cfg.method:
        for n in cfg.n:
            rule = _rule(cfg, method, n)
            res = worst_case_error(rule, KernelSpec(rule.dim, r), exact=cfg.exact)
            w.writerow(wce_csv_row(res, rule.dim, r, n, timing=cfg.timing))
    _write(cfg, buf.getvalue())


def cmd_convergence(cfg: RunConfig) -> None:
    records = []
    f = TEST_FUNCTIONS[cfg.function](cfg.d) if cfg.function else None
    spec = None if f else KernelSpec(cfg.d, cfg.rational_r)
    for method in cfg.method:
        records.append(
            convergence_sweep(
                method,
                cfg.d,
                cfg.n,
                spec=spec,
                f=f,
                seed=cfg.seed,
                shift_count=cfg.shifts,
                matrices=cfg.matrices,
                exact=cfg.exact,
                sigma=cfg.sigma,
            )
        )
    body = "".join(f"# {rec.method}: mode={rec.mode} checksum={rec.checksum or '-'}\n" for rec in records)
    _write(cfg, body + sweep_csv(records, timing=cfg.timing))
    if cfg.out:
        out = Path(cfg.out)
        for rec in records:
            _write(cfg, plot_data(rec), str(out.with_name(f"{out.stem}_{rec.method}.dat")))


def _net_t(cfg: RunConfig, method: str, n: int) -> int:
    if method == "vdc":
        return 0
    mats = load_net(cfg.sigma * cfg.d, n, cfg.matrices)
    if method == "order1net":
        return verify_order_sigma_t(mats.select(range(cfg.d)), 1)
    try:
        return verify_order_sigma_t(interlace_matrices(mats, cfg.sigma), cfg.sigma)
    except CapacityError:
        # fall back to the interlacing bound from the declared order-1 t-value
        declared = {(e["dim"], e["n"]): e["t"] for e in manifest(cfg.matrices)}
        tp = declared.get((cfg.sigma * cfg.d, n), n)
        s = cfg.sigma
        return min(s * n, s * tp + cfg.d * s * (s - 1) // 2)


def cmd_haar(cfg: RunConfig) -> None:
    parts = []
    for method in cfg.method:
        for n in cfg.n:
            rule = build_rule(method, cfg.d, n, cfg.matrices, cfg.sigma).rule
            ps = PointSet(rule.num, rule.den[0].bit_length() - 1)
            rows = haar_decay_profile(ps, n, _net_t(cfg, method, n), cfg.d)
            parts.append(f"# method={method} n={n}\n" + profile_csv(rows))
    _write(cfg, "".join(parts))


def cmd_verify(cfg: RunConfig) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "d", "s", "n", "order", "t"])
    if cfg.matrices and Path(cfg.matrices).is_file():
        sets = [(str(cfg.matrices), load_matrices(cfg.matrices))]
    else:
        sets = [(f"sobol_net_d{cfg.d}_n{n}", load_net(cfg.d, n, cfg.matrices)) for n in cfg.n]
    for name, mats in sets:
        # order sigma needs at least sigma * n rows
        orders = sorted({1, cfg.sigma} if cfg.sigma * mats.n <= mats.s else {1})
        for order in orders:
            w.writerow([name, mats.d, mats.s, mats.n, order, verify_order_sigma_t(mats, order)])
        if cfg.sigma > 1 and mats.d % cfg.sigma == 0:
            inter = interlace_matrices(mats, cfg.sigma)
            w.writerow(
                [f"{name} interlaced", inter.d, inter.s, inter.n, cfg.sigma, verify_order_sigma_t(inter, cfg.sigma)]
            )
    _write(cfg, buf.getvalue())


HANDLERS = {
    "gen-points": cmd_gen_points,
    "wce": cmd_wce,
    "convergence": cmd_convergence,
    "haar": cmd_haar,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    try:
        cfg = make_config(argv)
        HANDLERS[cfg.command](cfg)
    except CapacityError as exc:
        print(f"qmcnet: capacity guard: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, DomainError) as exc:
        print(f"qmcnet: error: {exc}", file=sys.stderr)
        return 2
    except QmcError as exc:
        print(f"qmcnet: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
