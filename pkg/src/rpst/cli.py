"""Command-line entry point: ``rpst test``, ``rpst simulate`` and ``rpst validate``.

Exit codes: 0 on success (a test's decision is reported in the JSON, not
the exit status), 1 on an internal error or a failed validation check,
2 on malformed input or configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from . import oracle
from .errors import RPSTError, TooLarge
from .privacy import DEFAULT_DELTA, DEFAULT_SPLIT, PrivacyBudget, private_group_disparity
from .procedures import REFERENCES, classic_siegel_tukey, half_normal_critical, rpsr_test, rpst_test
from .ranks import siegel_tukey_rank_values
from .simharness import CSV_COLUMNS, SimConfig, derive_seed, result_row, sweep
from .stats import null_variance, sensitivity_bound, srswor_moments, w1_null_variance, w1_sensitivity
from .transforms import STANDARD_TRANSFORMS, TransformSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA = "rpst/1"
SEED_ENV = "RPST_SEED"
MAX_VALIDATE_N = oracle.SIGN_MAX_N

log = logging.getLogger("rpst")


class UsageError(Exception):
    """Bad input or configuration; maps to exit status 2."""


# ---------------------------------------------------------------- input


def _read_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = [h.strip() for h in (reader.fieldnames or [])]
            missing = [c for c in required if c not in header]
            if missing:
                raise UsageError(f"{path}: missing column(s) {', '.join(missing)}")
            reader.fieldnames = header
            return list(reader)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise UsageError(f"{path}: not valid UTF-8") from None


def _number(text, path: str, line: int, col: str) -> float:
    try:
        value = float(str(text).strip())
    except (TypeError, ValueError):
        raise UsageError(f"{path}:{line}: bad {col} value {text!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"{path}:{line}: {col} must be finite")
    return value


def read_two_sample(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``value,group`` file; group is 1 or 2."""
    groups: dict[int, list[float]] = {1: [], 2: []}
    for line, row in enumerate(_read_rows(path, ("value", "group")), start=2):
        g = str(row["group"]).strip()
        if g not in ("1", "2"):
            raise UsageError(f"{path}:{line}: group must be 1 or 2, got {row['group']!r}")
        groups[int(g)].append(_number(row["value"], path, line, "value"))
    if not groups[1] or not groups[2]:
        raise UsageError(f"{path}: both groups need at least one observation")
    return np.array(groups[1]), np.array(groups[2])


def read_pairs(path: str) -> np.ndarray:
    """Read an ``x,y`` file into an (n, 2) array."""
    rows = [
        (_number(r["x"], path, i, "x"), _number(r["y"], path, i, "y"))
        for i, r in enumerate(_read_rows(path, ("x", "y")), start=2)
    ]
    if not rows:
        raise UsageError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def resolve_seed(seed: int | None, required: bool = False) -> int | None:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if required:
        raise UsageError(f"a seed is required: pass --seed or set {SEED_ENV}")
    return None


def _generator(seed: int | None) -> tuple[np.random.Generator, int]:
    if seed is None:
        seed = int(np.random.SeedSequence().entropy)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed))), seed


def _psi(text: str) -> TransformSpec:
    try:
        return TransformSpec.parse(text)
    except RPSTError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- test


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def cmd_test(args) -> dict:
    seed = resolve_seed(args.seed)
    psi = _psi(args.psi)
    q, Q = (None, args.Q) if args.Q is not None else (args.q, None)
    if args.kind == "classic":
        x, y = read_two_sample(args.input)
        res = classic_siegel_tukey(x, y, args.alpha)
        out = {"schema": SCHEMA, "test": "classic", **asdict(res), "alpha": args.alpha}
        return _jsonable(out)

    rng, seed = _generator(seed)
    if args.kind == "rpst":
        x, y = read_two_sample(args.input)
        budget = PrivacyBudget.split(args.eps, args.split, args.delta)
        res = rpst_test(
            x, y, psi, budget, rng, q=q, Q=Q,
            tie_jitter=args.jitter, reference=args.reference, center=args.center,
        )
    else:
        pairs = read_pairs(args.input)
        res = rpsr_test(pairs, psi, args.eps, rng, q=q, Q=Q, tie_jitter=args.jitter, reference=args.reference)
    out = {"schema": SCHEMA, **res.to_dict()}
    out["total_budget"] = {"eps": res.eps_total, "delta": res.delta_total}
    out["alpha"] = args.alpha
    out["reject"] = res.reject(args.alpha)
    out["seed"] = seed
    return _jsonable(out)


# ---------------------------------------------------------------- simulate

_CONFIG_TYPES = {
    "family": str,
    "theta": float,
    "n": int,
    "n1": int,
    "n1_frac": float,
    "q": float,
    "psi": str,
    "eps": float,
    "split": float,
    "delta": float,
    "alpha": float,
    "reps": int,
    "test": str,
    "copula_rho": float,
    "shape": float,
    "reference": str,
}


def _coerce(key: str, value):
    kind = _CONFIG_TYPES[key]
    if isinstance(value, bool) or isinstance(value, (dict, list)):
        raise UsageError(f"config key {key!r}: unsupported value {value!r}")
    if kind is int:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise UsageError(f"config key {key!r} needs an integer, got {value!r}")
        return value
    if kind is float:
        if not isinstance(value, (int, float)):
            raise UsageError(f"config key {key!r} needs a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise UsageError(f"config key {key!r} needs a string, got {value!r}")
    return value


def parse_sweep(table: dict) -> list[dict]:
    """Expand a flat ``key = scalar | [list]`` table into grid cells.

    Keys vary in file order, the last key fastest.
    """
    unknown = sorted(set(table) - set(_CONFIG_TYPES))
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    if "n1" in table and "n1_frac" in table:
        raise UsageError("config may set n1 or n1_frac, not both")
    axes = []
    for key, value in table.items():
        values = value if isinstance(value, list) else [value]
        if not values:
            raise UsageError(f"config key {key!r} has an empty list")
        axes.append([(key, _coerce(key, v)) for v in values])
    return [dict(combo) for combo in itertools.product(*axes)]


def build_config(cell: dict, seed: int) -> SimConfig:
    kw = dict(cell)
    if "psi" in kw:
        kw["psi"] = _psi(kw["psi"])
    frac = kw.pop("n1_frac", None)
    if frac is not None:
        kw["n1"] = int(round(frac * kw.get("n", SimConfig.n)))
    if kw.get("reference", "normal_laplace") not in REFERENCES:
        raise UsageError(f"unknown reference {kw['reference']!r}")
    try:
        cfg = SimConfig(seed=seed, **kw)
        if cfg.test == "rpst":
            cfg.budget  # validates split and delta
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid cell {cell}: {exc}") from None
    return cfg


def load_sweep(path: str, master_seed: int) -> list[SimConfig]:
    try:
        with open(path, "rb") as fh:
            table = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None
    cells = parse_sweep(table)
    return [build_config(cell, derive_seed(master_seed, i)) for i, cell in enumerate(cells)]


def write_csv(results, out, timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for res in results:
        row = result_row(res)
        if not timing:
            row["seconds"] = ""
        writer.writerow(row)
    text = buf.getvalue()
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def cmd_simulate(args) -> list:
    seed = resolve_seed(args.seed, required=True)
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    configs = load_sweep(args.config, seed)
    if not configs:
        raise UsageError("config expands to an empty grid")
    results = sweep(configs, workers=args.workers)
    write_csv(results, args.out, timing=args.timing)
    failed = sum(r.error is not None for r in results)
    log.info("%d cells, %d failed", len(results), failed)
    return results


# ---------------------------------------------------------------- validate


def _rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300) if b != 0 else abs(a)


def check_variance(psis, max_n: int) -> tuple[bool, str]:
    worst_rel, worst_mean, cases = 0.0, 0.0, 0
    for n in range(2, max_n + 1):
        for n1 in range(1, n):
            for Q in range(0, n - 1):
                for psi in psis:
                    dist = oracle.exact_u1_null(n, n1, Q, psi)
                    worst_rel = max(worst_rel, _rel_err(null_variance(n1, n - n1, psi, Q), dist.variance()))
                    worst_mean = max(worst_mean, abs(dist.mean()))
                    cases += 1
    ok = worst_rel <= 1e-9 and worst_mean <= 1e-12
    return ok, f"{cases} cases, max rel err {worst_rel:.2e}, max |mean| {worst_mean:.2e}"


def check_sensitivity(psis, max_n: int) -> tuple[bool, str]:
    top = min(max_n, oracle.SENSITIVITY_MAX_N)
    worst, cases = -math.inf, 0
    for n in range(2, top + 1):
        for n1 in range(1, n):
            for Q in range(0, n - 1):
                for psi in psis:
                    found = oracle.exhaustive_u1_sensitivity(n1, n - n1, Q, psi)
                    worst = max(worst, found - sensitivity_bound(psi, n, Q).gs_star)
                    cases += 1
    return worst <= 1e-12, f"{cases} cases up to n={top}, max excess {worst:.2e}"


def check_w1(psis, max_n: int) -> tuple[bool, str]:
    worst_rel, worst_sens, cases = 0.0, -math.inf, 0
    for n in range(1, max_n + 1):
        for Q in range(0, n):
            for psi in psis:
                dist = oracle.exact_w1_null(n, Q, psi)
                worst_rel = max(worst_rel, _rel_err(w1_null_variance(psi, n, Q), dist.variance()))
                if n <= oracle.SENSITIVITY_MAX_N:
                    found = oracle.exhaustive_w1_sensitivity(n, Q, psi)
                    worst_sens = max(worst_sens, found - w1_sensitivity(psi, n, Q))
                cases += 1
    ok = worst_rel <= 1e-9 and worst_sens <= 1e-12
    return ok, f"{cases} cases, max rel err {worst_rel:.2e}, max sensitivity excess {worst_sens:.2e}"


def check_srswor(max_n: int, seed: int = 0, instances: int = 200) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, min(max_n, 10) + 1))
        x = rng.integers(0, 6, n).astype(float)
        for k in range(n + 1):
            m_ref, v_ref = oracle.enumerate_srswor(x, k)
            m, v = srswor_moments(x, k)
            worst = max(worst, abs(m - m_ref) / max(1.0, abs(m_ref)), abs(v - v_ref) / max(1.0, abs(v_ref)))
    return worst <= 1e-9, f"{instances} multisets, max err {worst:.2e}"


def check_pi_alpha(alpha: float = 0.05, n_max: int = 200) -> tuple[bool, str]:
    for n in range(3, n_max + 1):
        crit = [half_normal_critical(m, n, alpha) for m in range(1, n // 2 + 1)]
        if any(b <= a for a, b in zip(crit, crit[1:])):
            return False, f"not increasing in m at n={n}"
    return True, f"strictly increasing in m for n=3..{n_max} at alpha={alpha}"


def check_classic_null(max_n: int) -> tuple[bool, str]:
    top = min(max_n, oracle.SENSITIVITY_MAX_N)
    cases = 0
    for n in range(2, top + 1):
        st = siegel_tukey_rank_values(n)
        for n1 in range(1, n):
            if oracle.exact_rank_sum_null(st, n1) != oracle.exact_rank_sum_null(range(1, n + 1), n1):
                return False, f"rank-sum nulls differ at n={n}, n1={n1}"
            cases += 1
    return True, f"{cases} (n, n1) cases up to n={top}"


def check_d1_star(seed: int = 0, reps: int = 10_000, delta: float = 0.05) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    bound = delta + 3 * math.sqrt(delta * (1 - delta) / reps)
    worst = 0.0
    for n, n1 in ((100, 60), (101, 51), (500, 400)):
        d1 = abs(n1 - n / 2)
        for eps_d in (0.1, 1.0):
            over = sum(private_group_disparity(n1, n, eps_d, delta, rng).d1_star > d1 for _ in range(reps))
            worst = max(worst, over / reps)
    return worst <= bound, f"max rate of d1* > d1 is {worst:.4f} (bound {bound:.4f})"


def cmd_validate(args) -> list[tuple[str, bool, str]]:
    if args.max_n > MAX_VALIDATE_N:
        raise TooLarge(f"--max-n {args.max_n} exceeds the enumeration cap {MAX_VALIDATE_N}")
    if args.max_n < 2:
        raise UsageError("--max-n must be at least 2")
    psis = [_psi(p) for p in (args.psi or STANDARD_TRANSFORMS)]
    checks = [
        ("variance_equivalence", lambda: check_variance(psis, args.max_n)),
        ("srswor_moments", lambda: check_srswor(args.max_n)),
        ("sensitivity_exhaustion", lambda: check_sensitivity(psis, args.max_n)),
        ("w1_enumeration", lambda: check_w1(psis, args.max_n)),
        ("pi_alpha_monotonicity", check_pi_alpha),
        ("classic_rank_sum_null", lambda: check_classic_null(args.max_n)),
        ("d1_star_conservative", check_d1_star),
    ]
    report = []
    for name, fn in checks:
        if args.skip and name in args.skip:
            continue
        ok, detail = fn()
        report.append((name, ok, detail))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", flush=True)
    return report


# ---------------------------------------------------------------- parser


def _add_test_parser(sub):
    p = sub.add_parser("test", help="run a test on a CSV file and print JSON")
    p.add_argument("kind", choices=("rpst", "rpsr", "classic"))
    p.add_argument("--input", required=True, help="value,group CSV (rpst, classic) or x,y CSV (rpsr)")
    p.add_argument("--psi", default="identity", help="arctan, log1p, sqrt, identity, square or power:<k>")
    mod = p.add_mutually_exclusive_group()
    mod.add_argument("--q", type=float, default=0.0, help="fraction of central ranks zeroed")
    mod.add_argument("--Q", type=int, default=None, help="number of central ranks zeroed")
    p.add_argument("--eps", type=float, default=1.0, help="total epsilon")
    p.add_argument("--split", type=float, default=DEFAULT_SPLIT, help="share of eps for the statistic (rpst)")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None, help=f"falls back to ${SEED_ENV}")
    p.add_argument("--jitter", type=float, default=None, help="tie-breaking jitter half-width")
    p.add_argument("--reference", choices=REFERENCES, default="normal_laplace")
    p.add_argument("--center", action="store_true", help="subtract group medians first (rpst)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rpst", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_test_parser(sub)

    p = sub.add_parser("simulate", help="run a size/power sweep and write CSV")
    p.add_argument("--config", required=True, help="TOML file of flat key = value | [values] entries")
    p.add_argument("--out", required=True, help="output CSV path, or - for stdout")
    p.add_argument("--seed", type=int, default=None, help=f"master seed; falls back to ${SEED_ENV}")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill the seconds column (output is then not reproducible)")

    p = sub.add_parser("validate", help="check closed forms against brute-force enumeration")
    p.add_argument("--max-n", type=int, default=9)
    p.add_argument("--psi", action="append", help="transform to check (repeatable); default all five")
    p.add_argument("--skip", action="append", help="check name to skip (repeatable)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "test":
            out = cmd_test(args)
            print(json.dumps(out, indent=2, allow_nan=False))
            return 0
        if args.command == "simulate":
            cmd_simulate(args)
            return 0
        report = cmd_validate(args)
        return 0 if all(ok for _, ok, _ in report) else 1
    except (UsageError, RPSTError, ValueError) as exc:
        print(f"rpst: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"rpst: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
