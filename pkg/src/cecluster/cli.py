"""Command-line front end.

Reads a CSV (or draws a named synthetic set), runs the clustering engine,
and emits one canonical result document, optionally with per-cluster ellipse
parameters, a per-point membership CSV side file, and an exhaustive-search
verification section for desk-scale inputs.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .datasets import GENERATOR_NAMES, generate
from .document import build_document, dumps
from .engine import CecConfig, NumericalError, resolve_card_min, run
from .models import Family, FamilySpec
from .oracle import brute_force_min

USAGE_ERROR = 2
DATA_ERROR = 3
NUMERICAL_FAILURE = 4


class DataError(Exception):
    """Input file problems: missing, malformed, or too small."""


def ingest_csv(path: str) -> np.ndarray:
    """Parse a numeric CSV into an n x N matrix.

    A single non-numeric first row is treated as a header and skipped.
    Errors carry the 1-based line number of the offending row.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DataError(f"{path}: file is empty")

    def parse_row(line, lineno, arity):
        cells = [c.strip() for c in line.split(",")]
        if arity is not None and len(cells) != arity:
            raise DataError(
                f"{path}: line {lineno}: expected {arity} columns, found {len(cells)}"
            )
        try:
            return [float(c) for c in cells]
        except ValueError:
            bad = next(c for c in cells if not _is_number(c))
            raise DataError(
                f"{path}: line {lineno}: non-numeric value {bad!r}"
            ) from None

    start = 0
    first = [c.strip() for c in lines[0].split(",")]
    if not all(_is_number(c) for c in first):
        start = 1
        if not lines[1:]:
            raise DataError(f"{path}: no data rows after the header")
    rows = []
    arity = None
    for i in range(start, len(lines)):
        row = parse_row(lines[i], i + 1, arity)
        arity = len(row)
        rows.append(row)
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(rows)}")
    return np.asarray(rows, dtype=float)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _broadcast(entries, k, what):
    if len(entries) == 1:
        entries = entries * k
    if len(entries) != k:
        raise ValueError(f"{what} list has {len(entries)} entries for {k} clusters")
    return entries


def build_families(type_list, param_list, k, n_dim):
    """Resolve per-cluster type/param strings into family specs.

    Parameter entries are '-' for none, otherwise ';'-separated numbers:
    one for fixedr, n_dim for eigenvalues, n_dim^2 row-major for covariance.
    """
    types = _broadcast([t.strip().lower() for t in type_list.split(",")], k, "type")
    raw = param_list.split(",") if param_list is not None else ["-"]
    params = _broadcast([p.strip() for p in raw], k, "param")
    specs = []
    for tname, praw in zip(types, params):
        if praw in ("", "-"):
            specs.append(FamilySpec.from_name(tname))
            continue
        try:
            comps = [float(c) for c in praw.split(";")]
        except ValueError:
            raise ValueError(f"malformed parameter {praw!r} for type {tname!r}") from None
        if tname == "fixedr":
            if len(comps) != 1:
                raise ValueError(f"fixedr takes 1 parameter component, got {len(comps)}")
            specs.append(FamilySpec.from_name(tname, comps[0]))
        elif tname == "covariance":
            if len(comps) != n_dim * n_dim:
                raise ValueError(
                    f"covariance needs {n_dim * n_dim} components for"
                    f" {n_dim}-D data, got {len(comps)}"
                )
            mat = np.asarray(comps, dtype=float).reshape(n_dim, n_dim)
            specs.append(FamilySpec.from_name(tname, mat))
        elif tname in ("eigenvalues", "eigen"):
            if len(comps) != n_dim:
                raise ValueError(
                    f"eigenvalues needs {n_dim} components for"
                    f" {n_dim}-D data, got {len(comps)}"
                )
            specs.append(FamilySpec.from_name(tname, comps))
        else:
            raise ValueError(f"model type {tname!r} takes no parameter")
    return specs


def emit_ellipses(result):
    """Per-cluster ellipse parameters from the fitted covariances.

    Axes come out major first, unit length, with a sign convention (largest
    component positive) so output is reproducible.
    """
    if result.means.shape[1] != 2:
        raise ValueError("ellipse emission requires 2-D data")
    entries = []
    for mean, cov in zip(result.means, result.covariances):
        w, v = np.linalg.eigh(np.asarray(cov, dtype=float))
        order = np.argsort(w)[::-1]
        w = np.clip(w[order], 0.0, None)
        radii = np.sqrt(w)
        axes = []
        for col in order:
            axis = v[:, col]
            if axis[int(np.argmax(np.abs(axis)))] < 0:
                axis = -axis
            axes.append([float(axis[0]), float(axis[1])])
        entries.append(
            {
                "center": [float(mean[0]), float(mean[1])],
                "axis1": axes[0],
                "axis2": axes[1],
                "radii_1sigma": [float(radii[0]), float(radii[1])],
                "radii_2sigma": [float(2.0 * radii[0]), float(2.0 * radii[1])],
            }
        )
    return entries


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cecluster",
        description="Cross-entropy clustering over Gaussian model families.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", metavar="PATH", help="CSV input file")
    source.add_argument(
        "--generate",
        choices=GENERATOR_NAMES,
        help="draw a named synthetic dataset instead of reading a file",
    )
    parser.add_argument("--centers", type=int, required=True, metavar="K",
                        help="initial number of clusters")
    parser.add_argument("--type", default="all", metavar="LIST",
                        help="cluster model types, comma separated;"
                        " one entry is broadcast to all clusters")
    parser.add_argument("--param", default=None, metavar="LIST",
                        help="per-cluster parameters aligned with --type;"
                        " '-' for none, ';' between numbers of one entry")
    parser.add_argument("--nstart", type=int, default=1, help="independent restarts")
    parser.add_argument("--iter-max", type=int, default=100, help="sweep limit per run")
    parser.add_argument("--card-min", default="5%", metavar="STR",
                        help="minimum cluster size, absolute or 'P%%'")
    parser.add_argument("--init", choices=("random", "kmeans++"), default="kmeans++",
                        help="initial assignment scheme")
    parser.add_argument("--method", choices=("hartigan", "lloyd"), default="hartigan",
                        help="iteration scheme")
    parser.add_argument("--seed", type=int, default=0, metavar="UINT", help="RNG seed")
    parser.add_argument("--workers", type=int, default=1,
                        help="threads for restart-level parallelism")
    parser.add_argument("--output", metavar="PATH",
                        help="write the result document here instead of stdout")
    parser.add_argument("--membership-csv", metavar="PATH",
                        help="side file with one 1-based label per input row")
    parser.add_argument("--ellipses", action="store_true",
                        help="include per-cluster ellipse parameters (2-D only)")
    parser.add_argument("--oracle", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("--points", type=int, default=3000, metavar="INT",
                        help="sample size for --generate")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    return parser


def _fail(code: int, message: str) -> int:
    print(f"cecluster: error: {message}", file=sys.stderr)
    return code


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)

    if args.seed < 0:
        return _fail(USAGE_ERROR, "seed must be a non-negative integer")

    try:
        if args.input is not None:
            data = ingest_csv(args.input)
        else:
            data = generate(args.generate, args.seed, args.points)
    except DataError as exc:
        return _fail(DATA_ERROR, str(exc))
    except ValueError as exc:
        return _fail(USAGE_ERROR, str(exc))

    card_min = args.card_min
    if isinstance(card_min, str) and not card_min.endswith("%"):
        try:
            card_min = int(card_min)
        except ValueError:
            pass  # engine reports the malformed value

    n, n_dim = data.shape
    try:
        families = build_families(args.type, args.param, max(args.centers, 1), n_dim)
        cfg = CecConfig(
            k=args.centers,
            families=families,
            max_iterations=args.iter_max,
            card_min=card_min,
            init_method=args.init,
            nstart=args.nstart,
            seed=args.seed,
            method=args.method,
            workers=args.workers,
        )
        result = run(data, cfg)
    except NumericalError as exc:
        return _fail(NUMERICAL_FAILURE, str(exc))
    except ValueError as exc:
        return _fail(USAGE_ERROR, str(exc))

    ellipses = None
    if args.ellipses:
        try:
            ellipses = emit_ellipses(result)
        except ValueError as exc:
            return _fail(USAGE_ERROR, str(exc))

    oracle_section = None
    if args.oracle:
        try:
            card = resolve_card_min(card_min, n, n_dim)
            best_energy, best_labels = brute_force_min(
                data, cfg.resolved_families(), args.centers, card_min=card
            )
        except ValueError as exc:
            return _fail(USAGE_ERROR, str(exc))
        oracle_section = {
            "energy": float(best_energy),
            "membership": [int(lab) + 1 for lab in best_labels],
            "gap": float(result.final_energy - best_energy),
        }

    runspec = {
        "input": args.input,
        "generate": args.generate,
        "points": args.points if args.generate else None,
        "k": args.centers,
        "type": [spec.name for spec in families],
        "param": [_param_echo(spec) for spec in families],
        "nstart": args.nstart,
        "iter_max": args.iter_max,
        "card_min": args.card_min,
        "init": args.init,
        "method": args.method,
        "seed": args.seed,
        "format": "json",
    }
    text = dumps(build_document(result, runspec, ellipses, oracle_section))

    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if args.membership_csv:
            with open(args.membership_csv, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(str(int(lab)) for lab in result.membership) + "\n")
    except OSError as exc:
        return _fail(DATA_ERROR, f"cannot write output: {exc.strerror or exc}")
    return 0


def _param_echo(spec: FamilySpec):
    if spec.kind is Family.FIXED_RADIUS:
        return float(spec.r)
    if spec.kind is Family.FIXED_COVARIANCE:
        return [[float(v) for v in row] for row in spec.sigma]
    if spec.kind is Family.FIXED_EIGENVALUES:
        return [float(v) for v in spec.lambdas]
    return None


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
