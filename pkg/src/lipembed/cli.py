"""Command-line interface: ``lipembed <command> [options]``.

Parameter precedence is built-in defaults < ``--config`` file < flags.  Every
output embeds the full resolved parameter set.  Exit codes: 0 success,
1 runtime error, 2 usage error, 3 falsification event.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

SCHEMA = "lipembed/1"
EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_FALSIFIED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _ints(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# name -> (type, default) per command; types double as config-file parsers
GLOBAL = {"seed": (int, 0), "trials": (int, 1), "workers": (int, 1), "format": (str, "json")}

COMMANDS = {
    "sample": {"d": (int, 2), "side": (int, 16), "p": (float, 0.5), "periodic": (_bool, False)},
    "tile": {"d": (int, 2), "R": (int, 4), "J": (int, 1), "periods": (int, 3), "verify": (_bool, False),
             "dilated": (_bool, False)},
    "surface": {"d": (int, 2), "J": (int, 1), "L": (int, 0), "width": (int, 32), "height": (int, 0),
                "p": (float, 0.5)},
    "lambda": {"d": (int, 2), "J": (int, 1), "L": (int, 0), "width": (int, 32), "height": (int, 0),
               "ps": (_floats, [0.5])},
    "tucker": {"t": (_ints, [3, 3]), "exhaustive": (_bool, False)},
    "blocking": {"d": (int, 2), "n": (int, 5), "m": (int, 20)},
    "embed": {"d": (int, 2), "D": (int, 2), "n": (int, 2), "N": (int, 4), "M": (int, 1), "p": (float, 0.8),
              "node_limit": (int, 0)},
    "word-embed": {"d": (int, 2), "ns": (_ints, [1, 2, 3]), "N": (int, 6), "M": (int, 2), "r": (int, 2),
                   "p": (float, 0.5), "q": (float, 0.5)},
    "existence": {"d": (int, 2), "D": (int, 2), "n": (int, 2), "N": (int, 3), "M": (int, 1),
                  "ps": (_floats, [0.8]), "node_limit": (int, 0)},
    "n-scaling": {"d": (int, 2), "ns": (_ints, [1, 2, 3]), "M": (int, 2), "p": (float, 0.95),
                  "N_max": (int, 12)},
    "crossing": {"D": (int, 2), "M": (int, 1), "ps": (_floats, [0.5, 0.6, 0.7]), "sizes": (_ints, [16, 32])},
    "moment-check": {"D": (int, 2), "k": (int, 2), "ns": (_ints, [2, 3, 4]), "ps": (_floats, [0.3, 0.4, 0.5])},
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--trials", type=int, help="number of seeded trials")
    common.add_argument("--workers", type=int, help="worker processes for trial ensembles")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], help="output format")
    common.add_argument("--svg", help="also write an SVG picture here")
    common.add_argument("--config", help="key=value file of parameter defaults")
    common.add_argument("--timing", action="store_true", help="include wall times (breaks byte-identity)")
    parser = argparse.ArgumentParser(prog="lipembed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in COMMANDS.items():
        sp = sub.add_parser(cmd, parents=[common], argument_default=argparse.SUPPRESS)
        for name, (typ, _) in opts.items():
            if typ is _bool:
                sp.add_argument(_flag(name), dest=name, nargs="?", const=True, type=_bool)
            else:
                sp.add_argument(_flag(name), dest=name, type=str)
    return parser


def read_config(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def resolve(command: str, ns: argparse.Namespace) -> dict:
    table = dict(GLOBAL, **COMMANDS[command])
    params = {k: default for k, (_, default) in table.items()}
    layers = []
    if getattr(ns, "config", None):
        layers.append(read_config(ns.config))
    layers.append({k: v for k, v in vars(ns).items() if k in table})
    for layer in layers:
        for k, v in layer.items():
            if k not in table:
                raise UsageError(f"unknown parameter {k!r} for {command}")
            typ = table[k][0]
            try:
                params[k] = typ(v)
            except ValueError as exc:
                raise UsageError(f"bad value for {k}: {exc}") from None
    if params["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    if params["trials"] < 1:
        raise UsageError("trials must be >= 1")
    return params


def render(command: str, params: dict, records: list, fmt: str) -> str:
    records = [_plain(r) for r in records]
    if fmt == "json":
        doc = {"schema": SCHEMA, "command": command, "semantics": "finite-window surrogate",
               "params": _plain(params), "records": records}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    keys = sorted({k for r in records for k in r})
    pkeys = sorted(f"param_{k}" for k in params)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(pkeys + keys)
    pvals = [_cell(params[k[len("param_"):]]) for k in pkeys]
    for r in records or [{}]:
        writer.writerow(pvals + [_cell(r.get(k, "")) for k in keys])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, sort_keys=True)
    return v


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# -- commands -----------------------------------------------------------------

def _geometry(P):
    from .percolation import CellGeometry

    return CellGeometry(P["d"], P["J"], P["L"]) if P["L"] else CellGeometry.default(P["d"], P["J"])


def cmd_sample(P, timing):
    from .lattice import WindowSpec
    from .percolation import sample_config
    from .svgplot import grid_svg

    w = WindowSpec.box(*([P["side"]] * P["d"]), periodic=P["periodic"])
    cfg = sample_config(w, P["p"], P["seed"])
    rec = {"sites": w.size, "open": cfg.n_open, "density": cfg.n_open / w.size, "config": cfg.dumps()}
    svg = grid_svg(cfg.open.astype(int)) if P["d"] == 2 else None
    return [rec], svg


def cmd_tile(P, timing):
    from .periodic import TileParams, tile_svg, verify_periodic_properties

    tp = TileParams(P["d"], P["R"], P["J"])
    rec = {"L": tp.L}
    if P["verify"]:
        rep = verify_periodic_properties(tp, P["periods"])
        rec.update(rep.to_dict())
    svg = tile_svg(tp, dilated=P["dilated"]) if P["d"] <= 3 else None
    return [rec], svg


def cmd_surface(P, timing):
    from .colouring import build_lambda
    from .experiments import surface_window
    from .percolation import sample_config
    from .svgplot import grid_svg

    geom = _geometry(P)
    cfg = sample_config(surface_window(geom, P["width"], P["p"], P["height"] or None), P["p"], P["seed"])
    sc = build_lambda(cfg, geom)
    F = sc.F.heights
    rec = {"L": geom.L, "s": geom.s, "r": geom.r, "min_height": int(F.min()), "max_height": int(F.max()),
           "heights": F.tolist()}
    svg = grid_svg(F[:, None]) if geom.d == 2 else None
    return [rec], svg


def cmd_lambda(P, timing):
    from .colouring import build_lambda, lambda_svg, verify_lambda_properties
    from .experiments import surface_success_rate, surface_window
    from .percolation import sample_config
    from .surface import SurfaceFailure

    geom = _geometry(P)
    if P["trials"] > 1:
        recs = surface_success_rate(geom.d, geom.J, P["ps"], geom.L, P["width"], P["trials"], P["seed"],
                                    P["height"] or None, P["workers"])
        return [r.to_dict(timing) for r in recs], None
    out, svg = [], None
    for p in P["ps"]:
        cfg = sample_config(surface_window(geom, P["width"], p, P["height"] or None), p, P["seed"])
        try:
            sc = build_lambda(cfg, geom)
        except SurfaceFailure as exc:
            out.append({"p": p, "status": "surface_failure", "column": list(exc.column), "hmax": exc.hmax})
            continue
        rep = verify_lambda_properties(sc)
        out.append(dict(p=p, status="ok" if rep.ok else "verify_failure", K=sc.K, C=sc.C, **rep.to_dict()))
        if geom.d == 2 and svg is None:
            svg = lambda_svg(sc)
    return out, svg


def cmd_tucker(P, timing):
    from .tucker import all_antipodal_colourings, find_complementary_pair, random_antipodal_colouring

    t = tuple(P["t"])
    if P["exhaustive"]:
        cases = all_antipodal_colourings(t)
    else:
        rng = np.random.default_rng(P["seed"])
        cases = (random_antipodal_colouring(t, rng) for _ in range(P["trials"]))
    count = 0
    for tc in cases:
        find_complementary_pair(tc)
        count += 1
    return [{"t": list(t), "colourings": count, "pairs_found": count}], None


def cmd_blocking(P, timing):
    from .tucker import colour_blocking_witness, random_blocking_colouring

    rng = np.random.default_rng(P["seed"])
    vols = []
    for _ in range(P["trials"]):
        bc = random_blocking_colouring(P["d"], P["n"], P["m"], rng)
        _, c = colour_blocking_witness(bc)
        vols.append(c.volume)
    return [{"instances": len(vols), "witnesses": len(vols), "min_witness_volume": min(vols)}], None


def cmd_embed(P, timing):
    from .lattice import WindowSpec
    from .percolation import sample_config
    from .search import SearchProblem, search_injection

    cfg = sample_config(WindowSpec.box(*([P["N"]] * P["D"])), P["p"], P["seed"])
    prob = SearchProblem(WindowSpec.box(*([P["n"]] * P["d"])), cfg, P["M"])
    res = search_injection(prob, P["node_limit"] or None)
    rec = {"status": res.status, "nodes": res.nodes}
    if res.embedding is not None:
        rec["embedding"] = res.embedding.to_dict()["image"]
    return [rec], None


def cmd_word_embed(P, timing):
    from .experiments import word_trend

    recs = word_trend(P["ns"], P["d"], P["N"], P["M"], P["r"], P["p"], P["trials"], P["seed"], P["q"],
                      P["workers"])
    return [r.to_dict(timing) for r in recs], None


def cmd_existence(P, timing):
    from .experiments import estimate_existence_prob

    recs = [estimate_existence_prob(P["d"], P["D"], P["n"], P["N"], P["M"], p, P["trials"], P["seed"],
                                    P["workers"], P["node_limit"] or None) for p in P["ps"]]
    return [r.to_dict(timing) for r in recs], None


def cmd_n_scaling(P, timing):
    from .experiments import estimate_N_of_n

    return estimate_N_of_n(P["ns"], P["d"], P["M"], P["p"], P["seed"], P["trials"], P["N_max"],
                           P["workers"]), None


def cmd_crossing(P, timing):
    from .experiments import estimate_crossing_curve
    from .svgplot import line_svg

    recs = estimate_crossing_curve(P["D"], P["M"], P["ps"], P["sizes"], P["trials"], P["seed"], P["workers"])
    series = {}
    for r in recs:
        series.setdefault(f"n={r.params['n']}", []).append((r.params["p"], r.estimate))
    return [r.to_dict(timing) for r in recs], line_svg(series, title="crossing frequency")


def cmd_moment_check(P, timing):
    from .experiments import moment_check

    recs = moment_check(P["D"], P["k"], P["ns"], P["ps"], P["trials"], P["seed"])
    return [r.to_dict(timing) for r in recs], None


HANDLERS = {
    "sample": cmd_sample, "tile": cmd_tile, "surface": cmd_surface, "lambda": cmd_lambda,
    "tucker": cmd_tucker, "blocking": cmd_blocking, "embed": cmd_embed, "word-embed": cmd_word_embed,
    "existence": cmd_existence, "n-scaling": cmd_n_scaling, "crossing": cmd_crossing,
    "moment-check": cmd_moment_check,
}


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    from .surface import SurfaceFailure
    from .tucker import FalsificationEvent

    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        params = resolve(ns.command, ns)
    except (UsageError, OSError) as exc:
        parser.print_usage(stderr)
        print(f"lipembed: error: {exc}", file=stderr)
        return EXIT_USAGE
    timing = getattr(ns, "timing", False)
    try:
        records, svg = HANDLERS[ns.command](params, timing)
    except FalsificationEvent as exc:
        print(f"lipembed: {exc}", file=stderr)
        print(exc.to_json(), file=stdout)
        return EXIT_FALSIFIED
    except (SurfaceFailure, ValueError, RuntimeError) as exc:
        print(f"lipembed: error: {exc}", file=stderr)
        return EXIT_ERROR
    text = render(ns.command, params, records, params["format"])
    out = getattr(ns, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)
    svg_path = getattr(ns, "svg", None)
    if svg_path and svg:
        Path(svg_path).write_text(svg)
    return EXIT_OK


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
