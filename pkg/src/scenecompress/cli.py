"""Command-line front end: ``scenecompress {compress,score,eval,synth}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .compressor import compress, compressed_from_dict, retained_alpha
from .config import DEFAULT_ITERATIONS, DEFAULT_KERNEL_CACHE_MB, CompressionParams, ScoreConfig
from .distinctiveness import compute_scores, default_beta
from .objective import evaluate
from .scene import SceneError, load_scene, save_scene, synth_scene, write_ply

SCORE_CHOICES = ("avg-distance", "camera-fraction", "camera-max-fraction", "combination")


class CliError(Exception):
    def __init__(self, message: str, flag: str | None = None, kind: str = "error"):
        super().__init__(message)
        self.flag = flag
        self.kind = kind


class Interval:
    """Numeric flag type that validates against an interval and documents it."""

    def __init__(self, flag, lo=None, hi=None, lo_open=False, hi_open=False, integer=False):
        self.flag = flag
        self.lo, self.hi = lo, hi
        self.lo_open, self.hi_open = lo_open, hi_open
        self.integer = integer
        self.__name__ = "int" if integer else "float"

    def describe(self) -> str:
        left = "(" if self.lo is None or self.lo_open else "["
        right = ")" if self.hi is None or self.hi_open else "]"
        lo = "-inf" if self.lo is None else f"{self.lo:g}"
        hi = "inf" if self.hi is None else f"{self.hi:g}"
        return f"{left}{lo}, {hi}{right}"

    def contains(self, v) -> bool:
        if isinstance(v, float) and not math.isfinite(v):
            return False
        if self.lo is not None and (v < self.lo or (self.lo_open and v == self.lo)):
            return False
        if self.hi is not None and (v > self.hi or (self.hi_open and v == self.hi)):
            return False
        return True

    def __call__(self, text: str):
        try:
            v = int(text) if self.integer else float(text)
        except ValueError:
            kind = "an integer" if self.integer else "a number"
            raise argparse.ArgumentTypeError(f"{self.flag} expects {kind}, got {text!r}") from None
        if not self.contains(v):
            raise argparse.ArgumentTypeError(
                f"{self.flag}={text} is outside the valid range {self.describe()}"
            )
        return v


# every range-checked flag; help text and validation both come from here
RANGES = {
    "--nu": Interval("--nu", 0, 1, lo_open=True),
    "--tau": Interval("--tau", 0),
    "--sigma": Interval("--sigma", 0, lo_open=True),
    "--iterations": Interval("--iterations", 1, integer=True),
    "--beta": Interval("--beta", 0, lo_open=True),
    "--weight": Interval("--weight", 0, 1),
    "--support-threshold": Interval("--support-threshold", 0),
    "--kernel-cache-mb": Interval("--kernel-cache-mb", 0, lo_open=True),
    "--log-every": Interval("--log-every", 0, integer=True),
    "--points": Interval("--points", 1, integer=True),
    "--cameras": Interval("--cameras", 1, integer=True),
    "--extent": Interval("--extent", 0, lo_open=True),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, kind="usage")


def _ranged(p, flag, help, default=None, default_text=None):
    rng = RANGES[flag]
    if default_text is None and default is not None:
        default_text = str(default)
    suffix = f"range {rng.describe()}" + (f", default {default_text}" if default_text else "")
    p.add_argument(flag, type=rng, default=default, help=f"{help} ({suffix})")


def _add_io(p, output_help="output file (default: stdout)"):
    p.add_argument("--input", required=True, help="scene file")
    p.add_argument("--format", choices=("json", "ply"), default="json", help="scene file format")
    p.add_argument("--output", help=output_help)


def _add_score(p, defaults=True):
    p.add_argument(
        "--score",
        choices=SCORE_CHOICES,
        default="avg-distance" if defaults else None,
        help="distinctiveness score",
    )
    _ranged(p, "--beta", "distance normalization", default_text="mean pair distance")
    _ranged(p, "--weight", "combination weight on the distance score", default=0.5 if defaults else None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scenecompress", description="Select a sparse, well-spread, distinctive subset of a 3D scene.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compress", help="compress a scene")
    _add_io(c, "compressed scene JSON (default: stdout)")
    _ranged(c, "--nu", "compression factor", default=0.05)
    _ranged(c, "--tau", "distinctiveness trade-off", default=1.0)
    _ranged(c, "--sigma", "RBF bandwidth in scene units", default=1.0)
    _ranged(c, "--iterations", "SMO iterations", default=DEFAULT_ITERATIONS)
    c.add_argument("--seed", type=int, default=0, help="random seed (any integer)")
    _add_score(c)
    c.add_argument("--pair-strategy", choices=("uniform", "active"), default="uniform")
    _ranged(c, "--support-threshold", "keep points with mass above this", default_text="1e-8 * cap")
    _ranged(c, "--kernel-cache-mb", "kernel row cache budget in MB", default=DEFAULT_KERNEL_CACHE_MB)
    _ranged(c, "--log-every", "log progress every N iterations, 0 disables", default=0)
    c.add_argument("--emit-initial", action="store_true", help="also record the initialization-only selection")
    c.add_argument("--export-ply", help="write the selected positions as ASCII PLY")

    s = sub.add_parser("score", help="compute distinctiveness scores")
    _add_io(s)
    _add_score(s)

    e = sub.add_parser("eval", help="evaluate the cost of a mass vector")
    _add_io(e)
    e.add_argument("--alpha", required=True, help='compressed scene JSON or {"alpha": [...]} file')
    _ranged(e, "--tau", "distinctiveness trade-off", default_text="from --alpha file, else 1")
    _ranged(e, "--sigma", "RBF bandwidth", default_text="from --alpha file, else 1")
    _add_score(e, defaults=False)

    y = sub.add_parser("synth", help="generate a synthetic scene")
    _ranged(y, "--points", "number of points", default=1000)
    _ranged(y, "--cameras", "number of cameras", default=50)
    _ranged(y, "--extent", "cube side in scene units", default=100.0)
    y.add_argument("--seed", type=int, default=0, help="random seed (any integer)")
    y.add_argument("--format", choices=("json", "ply"), default="json")
    y.add_argument("--output", required=True, help="scene file to write")
    return parser


def _score_config(kind: str, beta, weight) -> ScoreConfig:
    return ScoreConfig(kind=kind.replace("-", "_"), beta=beta, weight=weight)


def _load(args):
    path = Path(args.input)
    if not path.is_file():
        raise CliError(f"input file not found: {path}", flag="--input", kind="io")
    try:
        return load_scene(path, args.format)
    except SceneError as exc:
        raise CliError(f"{path}: {exc}", flag="--input", kind=type(exc).__name__) from None


def _emit(text: str, output) -> None:
    if output:
        try:
            Path(output).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot write {output}: {exc.strerror}", flag="--output", kind="io") from None
    else:
        sys.stdout.write(text + "\n")


def cmd_compress(args) -> None:
    scene = _load(args)
    params = CompressionParams(
        nu=args.nu,
        tau=args.tau,
        sigma=args.sigma,
        iterations=args.iterations,
        seed=args.seed,
        pair_strategy=args.pair_strategy,
        score=_score_config(args.score, args.beta, args.weight),
        support_threshold=args.support_threshold,
        kernel_cache_mb=args.kernel_cache_mb,
    )
    result = compress(scene, params, emit_initial=args.emit_initial, log_every=args.log_every)
    _emit(result.to_json(), args.output)
    if args.export_ply:
        index = {pid: k for k, pid in enumerate(scene.ids.tolist())}
        write_ply(args.export_ply, scene.positions[[index[pid] for pid in result.ids()]])
    if args.output:
        print(
            f"kept {len(result.selected)} of {result.source_m} points "
            f"({100 * result.retained_fraction:.2f}%), J = {result.objective.total:.10g}"
        )


def cmd_score(args) -> None:
    scene = _load(args)
    config = _score_config(args.score, args.beta, args.weight)
    scores = compute_scores(scene, config)
    doc = {"kind": config.kind, "scores": scores.tolist()}
    if config.kind in ("avg_distance", "combination"):
        doc["beta"] = config.beta if config.beta is not None else default_beta(scene)
    _emit(json.dumps(doc), args.output)


def _read_alpha(path, scene):
    p = Path(path)
    if not p.is_file():
        raise CliError(f"alpha file not found: {p}", flag="--alpha", kind="io")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"{p}: line {exc.lineno}: {exc.msg}", flag="--alpha", kind="format") from None
    if isinstance(doc, dict) and "selected" in doc:
        compressed = compressed_from_dict(doc)
        try:
            return retained_alpha(scene, compressed.selected), compressed.params
        except ValueError as exc:
            raise CliError(str(exc), flag="--alpha", kind="validation") from None
    if isinstance(doc, dict) and "alpha" in doc:
        alpha = np.asarray(doc["alpha"], dtype=np.float64)
        if alpha.shape != (len(scene),):
            raise CliError(f"alpha has {alpha.size} entries, scene has {len(scene)}", flag="--alpha", kind="validation")
        return alpha, None
    raise CliError("alpha file must hold a compressed scene or an 'alpha' list", flag="--alpha", kind="format")


def cmd_eval(args) -> None:
    scene = _load(args)
    alpha, stored = _read_alpha(args.alpha, scene)
    base = stored if stored is not None else CompressionParams()
    tau = args.tau if args.tau is not None else base.tau
    sigma = args.sigma if args.sigma is not None else base.sigma
    if args.score is not None:
        weight = args.weight if args.weight is not None else 0.5
        config = _score_config(args.score, args.beta, weight)
    else:
        config = base.score
        if args.beta is not None or args.weight is not None:
            config = ScoreConfig(
                config.kind,
                args.beta if args.beta is not None else config.beta,
                args.weight if args.weight is not None else config.weight,
            )
    if (alpha < 0).any():
        raise CliError("alpha has negative entries", flag="--alpha", kind="validation")
    scores = compute_scores(scene, config)
    _emit(json.dumps(evaluate(alpha, scene, scores, tau, sigma).to_dict()), args.output)


def cmd_synth(args) -> None:
    scene = synth_scene(args.points, args.cameras, args.extent, args.seed)
    try:
        save_scene(scene, args.output, args.format)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc.strerror}", flag="--output", kind="io") from None


COMMANDS = {"compress": cmd_compress, "score": cmd_score, "eval": cmd_eval, "synth": cmd_synth}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        level = logging.INFO if getattr(args, "log_every", 0) else logging.WARNING
        logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except CliError as exc:
        err = {"error": exc.kind, "message": str(exc)}
        if exc.flag:
            err["flag"] = exc.flag
        sys.stderr.write(json.dumps(err) + "\n")
        return 2 if exc.kind == "usage" else 1
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": "value", "message": str(exc)}) + "\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
