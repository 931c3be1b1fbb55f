"""Command-line front end: ``ihpair pair | verify | batch | cache``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import List, Optional, Sequence

from . import checks
from .cache import ResultCache, cache_key, canonical_json
from .exact import TruncationError, format_rat
from .pairings import ENGINE_VERSION, TARGETS, PairingSpec, evaluate_with_gamma

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_TRUNCATION = 3

REQUEST_KEYS = {"target", "r", "g", "z", "a", "f", "b", "gamma", "label"}


class SchemaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# request records


def request_from_json(obj, where: str = "request") -> dict:
    """Validate a JSON request and return it in canonical form."""
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    extra = set(obj) - REQUEST_KEYS
    if extra:
        raise SchemaError(f"{where}: unknown field(s) {sorted(extra)}")
    for key in ("target", "r", "g"):
        if key not in obj:
            raise SchemaError(f"{where}: missing field {key!r}")
    target = obj["target"]
    if not isinstance(target, str) or target.lower() not in TARGETS:
        raise SchemaError(f"{where}: target must be one of {', '.join(TARGETS)}")

    def integer(name, value):
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"{where}: {name} must be an integer")
        return value

    def exponents(name):
        value = obj.get(name, {})
        if not isinstance(value, dict):
            raise SchemaError(f"{where}: {name} must be an object mapping k to an exponent")
        out = {}
        for k, e in value.items():
            try:
                kk = int(k)
            except (TypeError, ValueError):
                raise SchemaError(f"{where}: {name} key {k!r} is not an integer") from None
            out[str(kk)] = integer(f"{name}[{k}]", e)
        return out

    b = obj.get("b", [])
    if not isinstance(b, list) or not all(
        isinstance(x, list) and len(x) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in x)
        for x in b
    ):
        raise SchemaError(f"{where}: b must be a list of [k, j] integer pairs")
    rec = {
        "target": target.lower(),
        "r": integer("r", obj["r"]),
        "g": integer("g", obj["g"]),
        "z": integer("z", obj.get("z", 0)),
        "a": exponents("a"),
        "f": exponents("f"),
        "b": [list(x) for x in b],
        "gamma": integer("gamma", obj.get("gamma", 0)),
    }
    if "label" in obj and obj["label"] is not None:
        if not isinstance(obj["label"], str):
            raise SchemaError(f"{where}: label must be a string")
        rec["label"] = obj["label"]
    try:
        spec_from_request(rec)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None
    if rec["gamma"] < 0:
        raise SchemaError(f"{where}: gamma must be non-negative")
    return rec


def spec_from_request(rec: dict) -> PairingSpec:
    return PairingSpec.build(
        rec["target"], rec["r"], rec["g"], z=rec.get("z", 0),
        a={int(k): v for k, v in rec.get("a", {}).items()},
        f={int(k): v for k, v in rec.get("f", {}).items()},
        b=[tuple(x) for x in rec.get("b", [])],
    )


def _rat_json(v: Fraction) -> dict:
    return {"num": str(v.numerator), "den": str(v.denominator)}


def compute_record(rec: dict, opts: dict, cache: Optional[ResultCache]) -> dict:
    """Evaluate one canonical request, consulting the cache."""
    core = {k: v for k, v in rec.items() if k != "label"}
    key = cache_key({"engine": ENGINE_VERSION, "request": core, "options": opts})
    stored = cache.get(key) if cache is not None else None
    if stored is None:
        spec = spec_from_request(rec)
        res = evaluate_with_gamma(
            spec, rec.get("gamma", 0), opts["family_index"],
            cancel=not opts["debug_no_cancel"], window_bump=opts["window_bump"],
        )
        stored = dict(core)
        stored.update({
            "value": _rat_json(res.value),
            "degree_ok": res.degree_ok,
            "windows": res.windows,
            "family_index": res.family_index,
            "ms": res.ms,
            "engine": res.engine,
        })
        if cache is not None:
            cache.put(key, stored)
    out = dict(stored)
    if "label" in rec:
        out["label"] = rec["label"]
    return out


def record_value(record: dict) -> Fraction:
    v = record["value"]
    return Fraction(int(v["num"]), int(v["den"]))


CSV_FIELDS = ["label", "target", "r", "g", "z", "a", "f", "b", "gamma", "value", "family_index", "ms", "engine"]


def _csv_row(record: dict) -> list:
    return [
        record.get("label", ""),
        record["target"],
        record["r"],
        record["g"],
        record["z"],
        " ".join(f"{k}={v}" for k, v in sorted(record["a"].items())),
        " ".join(f"{k}={v}" for k, v in sorted(record["f"].items())),
        " ".join(f"{k},{j}" for k, j in record["b"]),
        record["gamma"],
        format_rat(record_value(record)),
        record["family_index"],
        record["ms"],
        record["engine"],
    ]


def render(records: List[dict], fmt: str, single: bool = False) -> str:
    if fmt == "json":
        return canonical_json(records[0] if single else records) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for rec in records:
            w.writerow(_csv_row(rec))
        return buf.getvalue()
    return "".join(format_rat(record_value(r)) + "\n" for r in records)


# ---------------------------------------------------------------------------
# argument parsing


def _kv(text: str):
    try:
        k, v = text.split("=")
        return int(k), int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected k=n, got {text!r}") from None


def _pair(text: str):
    try:
        k, j = text.split(",")
        return [int(k), int(j)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected k,j, got {text!r}") from None


def _global_options(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--hamiltonian-index", type=int, default=d(None), metavar="N",
                        help="Hamiltonian family index n (default: r)")
    parser.add_argument("--debug-no-cancel", action="store_true", default=d(False),
                        help="keep the measure and Hessian factors instead of cancelling them")
    parser.add_argument("--window-bump", type=int, default=d(0), metavar="K",
                        help="widen every truncation window by K")
    parser.add_argument("--format", choices=["text", "json", "csv"], default=d("text"))
    parser.add_argument("--cache-dir", default=d(None), help="override the cache directory")
    parser.add_argument("--no-cache", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ihpair", description="Exact intersection pairings on moduli of bundles.")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pair", help="evaluate one pairing")
    _global_options(p, suppress=True)
    p.add_argument("--target", choices=list(TARGETS), required=True)
    p.add_argument("-r", type=int, required=True, help="rank")
    p.add_argument("-g", type=int, required=True, help="genus")
    p.add_argument("--a", action="append", type=_kv, default=[], metavar="k=m")
    p.add_argument("--f", action="append", type=_kv, default=[], metavar="k=n")
    p.add_argument("--b", action="append", type=_pair, default=[], metavar="k,j")
    p.add_argument("--z", type=int, default=0, metavar="m")
    p.add_argument("--gamma", type=int, default=0, metavar="p")
    p.add_argument("--label")

    v = sub.add_parser("verify", help="run a verification suite")
    _global_options(v, suppress=True)
    v.add_argument("--suite", choices=sorted(checks.SUITES) + ["all"], default="all")
    v.add_argument("-r", type=int)
    v.add_argument("-g", type=int)

    b = sub.add_parser("batch", help="evaluate a JSON list of requests")
    _global_options(b, suppress=True)
    b.add_argument("file")
    b.add_argument("-o", "--output", help="write the table here instead of stdout")
    b.add_argument("--jobs", type=int, default=1)

    c = sub.add_parser("cache", help="inspect or clear the result cache")
    _global_options(c, suppress=True)
    c.add_argument("action", choices=["stats", "clear"])
    return parser


def _options(args) -> dict:
    return {
        "family_index": args.hamiltonian_index,
        "debug_no_cancel": bool(args.debug_no_cancel),
        "window_bump": int(args.window_bump),
    }


def _cache(args) -> Optional[ResultCache]:
    return None if args.no_cache else ResultCache(args.cache_dir)


def _sum_exponents(pairs):
    out = {}
    for k, v in pairs:
        out[str(k)] = out.get(str(k), 0) + v
    return out


def cmd_pair(args, out, err) -> int:
    raw = {
        "target": args.target, "r": args.r, "g": args.g, "z": args.z,
        "a": _sum_exponents(args.a), "f": _sum_exponents(args.f),
        "b": args.b, "gamma": args.gamma,
    }
    if args.label is not None:
        raw["label"] = args.label
    rec = request_from_json(raw, "pair")
    record = compute_record(rec, _options(args), _cache(args))
    if not record["degree_ok"]:
        err.write("degree mismatch: the class does not have the degree of the target space; value is 0\n")
    out.write(render([record], args.format, single=True))
    return EXIT_OK


def _run_one(payload):
    rec, opts, cache_dir, no_cache = payload
    cache = None if no_cache else ResultCache(cache_dir)
    return compute_record(rec, opts, cache)


def cmd_batch(args, out, err) -> int:
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        err.write(f"cannot read batch file: {exc}\n")
        return EXIT_USAGE
    if isinstance(data, dict) and "requests" in data:
        data = data["requests"]
    if not isinstance(data, list):
        raise SchemaError("batch file must hold a list of requests")
    recs = []
    for i, obj in enumerate(data):
        label = obj.get("label") if isinstance(obj, dict) else None
        where = f"record {i}" + (f" ({label})" if label else "")
        recs.append(request_from_json(obj, where))
    opts = _options(args)
    work = [(r, opts, args.cache_dir, args.no_cache) for r in recs]
    if args.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    fmt = args.format if args.format != "text" else "json"
    text = render(results, fmt)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_verify(args, out, err) -> int:
    names = sorted(checks.SUITES) if args.suite == "all" else [args.suite]
    results = []
    for name in names:
        results += checks.SUITES[name](r=args.r, g=args.g)
    if args.format == "json":
        out.write(canonical_json([r.__dict__ for r in results]) + "\n")
    elif args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["suite", "case", "expected", "got", "ok"])
        for r in results:
            w.writerow([r.suite, r.case, r.expected, r.got, "pass" if r.ok else "FAIL"])
    else:
        width = max((len(r.suite) + len(r.case) + 3 for r in results), default=10)
        for r in results:
            tag = "pass" if r.ok else "FAIL"
            line = f"{tag}  {(r.suite + ' | ' + r.case).ljust(width)}"
            if not r.ok:
                line += f"  expected {r.expected}, got {r.got}"
            out.write(line + "\n")
        bad = sum(1 for r in results if not r.ok)
        out.write(f"{len(results) - bad}/{len(results)} checks passed\n")
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


def cmd_cache(args, out, err) -> int:
    cache = ResultCache(args.cache_dir)
    if args.action == "stats":
        st = cache.stats()
        if args.format == "json":
            out.write(canonical_json(st) + "\n")
        else:
            out.write(f"{st['dir']}: {st['entries']} entries, {st['bytes']} bytes\n")
    else:
        n = cache.clear()
        out.write(f"removed {n} entries\n")
    return EXIT_OK


COMMANDS = {"pair": cmd_pair, "batch": cmd_batch, "verify": cmd_verify, "cache": cmd_cache}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out, err)
    except SchemaError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except TruncationError as exc:
        err.write(f"truncation exhausted: {exc}\n")
        return EXIT_TRUNCATION
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
