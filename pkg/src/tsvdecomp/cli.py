"""Command-line front end.

    tsvdecomp --input img.png --outdir out/
    tsvdecomp --phantom tiles --seed 0 --outdir out/ --export-eta

Settings are resolved as built-in defaults < ``--config`` file <
command-line flags. The config file holds ``key = value`` lines named like
the long flags (``restart-every = 400``); ``#`` starts a comment.

Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 solver divergence.
"""

import argparse
import csv
import logging
import os
import sys

from scipy import fft

from .imageio import ImageFormatError, load_image, save_image, save_raw
from .phantoms import KINDS, make_phantom
from .solver import SolverDivergenceError, SolverParams, decompose
from .tsv import TsvParams

log = logging.getLogger("tsvdecomp")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DIVERGED = 0, 2, 3, 4

# flag destination -> (type, default)
DEFAULTS = {
    "input": (str, None),
    "outdir": (str, "."),
    "alpha1": (float, 0.03),
    "alpha2": (float, 0.3),
    "theta": (float, 1e-6),
    "dt": (float, 0.08),
    "cfrozen": (float, 1.0),
    "sigma1": (float, 2.75),
    "sigma2": (float, 0.75),
    "kappa": (float, 0.1),
    "window": (int, 20),
    "iters": (int, 2000),
    "restart_every": (int, 400),
    "eta_mode": (str, "tsv"),
    "eta_const": (float, 1.0),
    "denoise": (bool, False),
    "nlm_patch": (int, 5),
    "nlm_search": (int, 11),
    "nlm_h": (float, 10 / 255),
    "export_eta": (bool, False),
    "raw": (bool, False),
    "phantom": (str, None),
    "size": (int, 64),
    "seed": (int, 0),
    "threads": (int, 0),
    "no_stabilize": (bool, False),
}


class UsageError(Exception):
    pass


def build_parser():
    p = argparse.ArgumentParser(
        prog="tsvdecomp",
        description="Decompose a grayscale image into cartoon (u) and texture (v) "
                    "parts with a TSV-weighted G-norm model.")
    src = p.add_argument_group("input/output")
    src.add_argument("--input", metavar="PATH", help="P5 PGM or PNG image")
    src.add_argument("--phantom", choices=KINDS, help="use a synthetic phantom instead of --input")
    src.add_argument("--size", type=int, metavar="I", help="phantom size (square, default 64)")
    src.add_argument("--seed", type=int, metavar="I", help="phantom seed (default 0)")
    src.add_argument("--outdir", metavar="PATH", help="output directory (default .)")
    src.add_argument("--export-eta", action="store_true", default=None,
                     help="write the weight of every stage as eta_<k>.png")
    src.add_argument("--raw", action="store_true", default=None,
                     help="also write float64 grids (u.raw, v.raw, eta_<k>.raw)")
    src.add_argument("--config", metavar="PATH", help="key=value settings file")

    mod = p.add_argument_group("model")
    mod.add_argument("--alpha1", type=float, metavar="F", help="TV weight (default 0.03)")
    mod.add_argument("--alpha2", type=float, metavar="F", help="g-energy weight (default 0.3)")
    mod.add_argument("--theta", type=float, metavar="F", help="fidelity penalty (default 1e-6)")
    mod.add_argument("--sigma1", type=float, metavar="F", help="TSV line length (default 2.75)")
    mod.add_argument("--sigma2", type=float, metavar="F", help="TSV line width (default 0.75)")
    mod.add_argument("--kappa", type=float, metavar="F", help="weight floor (default 0.1)")
    mod.add_argument("--window", type=int, metavar="I", help="TSV window size (default 20)")
    mod.add_argument("--eta-mode", choices=("tsv", "constant"), help="weight type (default tsv)")
    mod.add_argument("--eta-const", type=float, metavar="F",
                     help="weight value for --eta-mode constant (default 1)")

    sol = p.add_argument_group("solver")
    sol.add_argument("--dt", type=float, metavar="F", help="time step (default 0.08)")
    sol.add_argument("--cfrozen", type=float, metavar="F", help="frozen coefficient (default 1.0)")
    sol.add_argument("--no-stabilize", action="store_true", default=None,
                     help="use --cfrozen as given even when the g-update is unstable")
    sol.add_argument("--iters", type=int, metavar="I", help="total iterations (default 2000)")
    sol.add_argument("--restart-every", type=int, metavar="I",
                     help="iterations per restart stage (default 400)")
    sol.add_argument("--threads", type=int, metavar="I", help="FFT workers, 0 = all cores")

    dn = p.add_argument_group("denoising (weight computation only)")
    dn.add_argument("--denoise", action="store_true", default=None,
                    help="non-local-means filter the input before computing TSV")
    dn.add_argument("--nlm-patch", type=int, metavar="I", help="patch size (default 5)")
    dn.add_argument("--nlm-search", type=int, metavar="I", help="search window (default 11)")
    dn.add_argument("--nlm-h", type=float, metavar="F", help="filter strength (default 10/255)")

    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def read_config(path):
    """Parse a ``key = value`` settings file into a dict of typed values."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            typ = DEFAULTS[key][0]
            try:
                if typ is bool:
                    if value.lower() not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                        raise ValueError(value)
                    out[key] = value.lower() in ("1", "true", "yes", "on")
                else:
                    out[key] = typ(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def resolve(ns):
    """Merge defaults, config file and flags into one settings dict."""
    cfg = {k: d for k, (_, d) in DEFAULTS.items()}
    if ns.config:
        cfg.update(read_config(ns.config))
    for key in DEFAULTS:
        val = getattr(ns, key, None)
        if val is not None:
            cfg[key] = val
    if (cfg["input"] is None) == (cfg["phantom"] is None):
        raise UsageError("exactly one of --input and --phantom is required")
    return cfg


def make_params(cfg):
    try:
        tsv = TsvParams(cfg["sigma1"], cfg["sigma2"], cfg["window"], cfg["kappa"])
        solver = SolverParams(
            alpha1=cfg["alpha1"], alpha2=cfg["alpha2"], theta=cfg["theta"],
            dt=cfg["dt"], c_frozen=cfg["cfrozen"], max_iters=cfg["iters"],
            restart_every=min(cfg["restart_every"], cfg["iters"]),
            eta_mode=cfg["eta_mode"], constant_eta=cfg["eta_const"],
            stabilize=not cfg["no_stabilize"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return tsv, solver


def write_outputs(result, cfg):
    out = cfg["outdir"]
    os.makedirs(out, exist_ok=True)
    save_image(result.u, os.path.join(out, "u.png"))
    save_image(result.u, os.path.join(out, "u.pgm"))
    save_image(result.v_total, os.path.join(out, "v.png"), mode="texture")
    if cfg["raw"]:
        save_raw(result.u, os.path.join(out, "u.raw"))
        save_raw(result.v_total, os.path.join(out, "v.raw"))
    if cfg["export_eta"]:
        for k, w in enumerate(result.eta_stages, 1):
            save_image(w.eta, os.path.join(out, f"eta_{k}.png"), mode="normalize")
            if cfg["raw"]:
                save_raw(w.eta, os.path.join(out, f"eta_{k}.raw"))
    with open(os.path.join(out, "energy.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "tv", "g", "fid", "total"])
        for it, tv, g, fid, total in result.trace:
            writer.writerow([it] + [repr(float(x)) for x in (tv, g, fid, total)])


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2),
                        format="%(levelname)s: %(message)s")
    try:
        cfg = resolve(ns)
        tsv, solver = make_params(cfg)
    except OSError as exc:
        print(f"tsvdecomp: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except UsageError as exc:
        print(f"tsvdecomp: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if cfg["phantom"]:
            f, _ = make_phantom(cfg["phantom"], cfg["size"], cfg["size"], cfg["seed"])
        else:
            f = load_image(cfg["input"])
    except (OSError, ImageFormatError) as exc:
        print(f"tsvdecomp: cannot load input: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"tsvdecomp: {exc}", file=sys.stderr)
        return EXIT_USAGE

    workers = cfg["threads"] if cfg["threads"] > 0 else -1
    nlm = {"patch": cfg["nlm_patch"], "search": cfg["nlm_search"], "h": cfg["nlm_h"]}
    try:
        with fft.set_workers(workers):
            result = decompose(f, tsv, solver, denoise=cfg["denoise"], nlm=nlm)
    except SolverDivergenceError as exc:
        print(f"tsvdecomp: solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except ValueError as exc:
        print(f"tsvdecomp: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        write_outputs(result, cfg)
    except OSError as exc:
        print(f"tsvdecomp: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote results to %s", cfg["outdir"])
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
