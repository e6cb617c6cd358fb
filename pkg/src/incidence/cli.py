"""Command line interface: ``incidence enumerate|smooth|predict|verify|sample``.

Exit codes: 0 success or all checks passed, 1 a check failed, 2 a resource cap
was hit or a check could not be decided, 3 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import bulk, experiments, flags, schubert
from . import smoothness as sm
from .fields import parse_field
from .flags import INF
from .mpoly import MultiPoly, PolyError, PolyRing, ResourceCapExceeded, dumps, loads, sample_poly

EXIT_OK, EXIT_FAIL, EXIT_CAP, EXIT_INPUT = 0, 1, 2, 3


def _m(text: str):
    return INF if text.lower() in ("inf", "infinity", "oo") else int(text)


def _load_poly(arg: str, ctx=None) -> MultiPoly:
    """A polynomial from a file path or inline text in the ``dumps`` format."""
    path = Path(arg)
    text = path.read_text() if path.exists() else arg.replace(";", "\n")
    F = loads(text)
    if ctx is not None and F.ctx.spec != ctx.spec:
        raise PolyError(f"polynomial is over GF({F.ctx.spec}), not GF({ctx.spec})")
    return F


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(experiments._jsonable(obj), sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_enumerate(args) -> int:
    ctx = parse_field(args.field) if args.field else None
    F = _load_poly(args.poly, ctx)
    if args.n is not None and F.n != args.n:
        raise PolyError(f"polynomial lives in P^{F.n}, not P^{args.n}")
    t0 = time.perf_counter()
    which = args.scheme.upper()
    if args.ext_deg and args.ext_deg > 1:
        from .fields import extension

        E = extension(F.ctx, args.ext_deg)
        if which != "Y":
            F = flags.base_change(F, E)
            res = flags.enumerate_scheme(F, which, args.m)
            pts = res.points
        else:
            batch = flags.y_flags_over(F, args.m, E)
            pts = [flags.Flag(p, v) for p, v in batch.as_tuples()]
    else:
        pts = flags.enumerate_scheme(F, which, args.m).points
    ms = (time.perf_counter() - t0) * 1000.0
    if args.csv:
        for p in pts:
            print(_point_text(p))
        return EXIT_OK
    _emit({"scheme": which, "count": len(pts), "points": [_point_text(p) for p in pts],
           "runtime_ms": round(ms, 3)})
    return EXIT_OK


def _point_text(p) -> str:
    if isinstance(p, flags.Flag):
        return str(p)
    if isinstance(p, tuple) and p and isinstance(p[0], tuple):
        return ";".join(",".join(map(str, x)) for x in p)
    return ",".join(map(str, p))


def cmd_smooth(args) -> int:
    F = _load_poly(args.poly)
    m = _m(args.m)
    if args.flag:
        r = sm.flag_report(F, flags.parse_flag(F.ctx, args.flag), m)
        rows = [{"flag": str(r.flag), "multiplicity": r.multiplicity, "rank": r.rank, "class": r.cls,
                 "a_m_zero": r.a_m_zero}]
    else:
        batch, codes = sm.classify_all(F, m)
        rows = [{"flag": f"{','.join(map(str, p))};{','.join(map(str, v))}",
                 "class": bulk.CLASS_NAMES[c]} for (p, v), c in zip(batch.as_tuples(), codes)]
    summary = {c: sum(1 for r in rows if r["class"] == c) for c in ("smooth", "W0", "W2")}
    _emit({"m": m, "flags": rows, "summary": summary})
    return EXIT_OK


def cmd_predict(args) -> int:
    _emit(schubert.predict(args.n, args.d, args.m))
    return EXIT_OK


def cmd_verify(args) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    data.setdefault("experiment", args.experiment)
    if data["experiment"] != args.experiment:
        raise ValueError(f"config is for {data['experiment']!r}, not {args.experiment!r}")
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = experiments.ExperimentConfig.from_dict(data)
    try:
        rep = experiments.run(cfg)
    except ResourceCapExceeded as exc:
        _emit({"config": cfg.to_dict(), "passed": False, "cap_hit": str(exc)}, args.out)
        return EXIT_CAP
    if args.csv:
        Path(args.csv).write_text(rep.to_csv())
    text = rep.to_json(timing=args.timing)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return rep.exit_code


def cmd_sample(args) -> int:
    ring = PolyRing(parse_field(args.field), args.n, args.d)
    sys.stdout.write(dumps(sample_poly(ring, args.seed)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="incidence", description="Incidence schemes of flags and hypersurfaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate", help="rational points of X_F, Y_{F,m} or Z_F")
    e.add_argument("--field", help="q, p^k or p (checked against the polynomial)")
    e.add_argument("--n", type=int)
    e.add_argument("--poly", required=True, help="file or inline text in the dumps format (';' for newlines)")
    e.add_argument("--scheme", choices=["X", "Y", "Z", "x", "y", "z"], default="Y")
    e.add_argument("--m", type=_m, default=None)
    e.add_argument("--ext-deg", type=int, default=1)
    e.add_argument("--csv", action="store_true")
    e.set_defaults(fn=cmd_enumerate)

    s = sub.add_parser("smooth", help="Jacobian rank and class of flags of Y_{F,m}")
    s.add_argument("--poly", required=True)
    s.add_argument("--m", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--all-flags", action="store_true")
    g.add_argument("--flag", help="p0,..,pn;v0,..,vn")
    s.set_defaults(fn=cmd_smooth)

    p = sub.add_parser("predict", help="Schubert calculus prediction for general F")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(fn=cmd_predict)

    v = sub.add_parser("verify", help="run an experiment from a JSON config")
    v.add_argument("experiment", choices=experiments.EXPERIMENTS)
    v.add_argument("--config")
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    v.add_argument("--csv")
    v.add_argument("--timing", action="store_true", help="include runtime_ms in the report")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("sample", help="print a random form")
    r.add_argument("--field", required=True)
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--d", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(fn=cmd_sample)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ResourceCapExceeded as exc:
        print(f"error: resource cap hit: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, PolyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
