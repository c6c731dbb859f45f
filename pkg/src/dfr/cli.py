"""Command line interface.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 numeric
failure (non-finite loss during optimization).
"""

import argparse
import logging
import sys

from .errors import ConfigurationError, LoadError, NumericFailure
from .losses import LossWeights
from .pipeline import run_grid
from .rotation import ANGLES, APPLY_MODES
from .vgg import POOLING_MODES, load_weights

log = logging.getLogger("dfr")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; bad flags are
    # configuration errors here and must map to exit code 1
    def error(self, message):
        raise ConfigurationError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigurationError(f"bad integer list {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigurationError(f"bad float list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dfr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="stylize a content/style pair over an angle x lambda grid")
    run.add_argument("--content", required=True, help="content image (PNG or JPEG)")
    run.add_argument("--style", required=True, help="style image (PNG or JPEG)")
    run.add_argument("--angles", default="0,90,180,270", type=_int_list,
                     help="comma-separated rotation angles (default 0,90,180,270)")
    run.add_argument("--lambdas", default="1.0", type=_float_list,
                     help="comma-separated rotation weights in [0,1] (default 1.0)")
    run.add_argument("--iterations", default=3000, type=int)
    run.add_argument("--width", default=412, type=int)
    run.add_argument("--height", default=522, type=int)
    run.add_argument("--alpha", default=1e4, type=float, help="content weight")
    run.add_argument("--beta", default=0.01, type=float, help="style weight")
    run.add_argument("--lr", default=0.002, type=float, help="Adam learning rate")
    run.add_argument("--init", default="content", choices=["content", "noise"])
    run.add_argument("--seed", default=0, type=int)
    run.add_argument("--apply-to", default="both", choices=list(APPLY_MODES))
    run.add_argument("--pooling", default="max", choices=list(POOLING_MODES))
    run.add_argument("--parallelism", default=1, type=int)
    run.add_argument("--weights", required=True, help="DFRW weight file")
    run.add_argument("--out", required=True, help="output directory")
    return parser


def _cmd_run(args) -> int:
    for angle in args.angles:
        if angle not in ANGLES:
            raise ConfigurationError(f"angle must be one of {ANGLES}, got {angle}")
    for lam in args.lambdas:
        if not 0.0 <= lam <= 1.0:
            raise ConfigurationError(f"lambda must be in [0, 1], got {lam}")
    weights = load_weights(args.weights)
    manifest = run_grid(
        args.content,
        args.style,
        args.angles,
        args.lambdas,
        args.parallelism,
        args.out,
        weights,
        iterations=args.iterations,
        width=args.width,
        height=args.height,
        loss_weights=LossWeights(alpha=args.alpha, beta=args.beta),
        lr=args.lr,
        init_mode=args.init,
        seed=args.seed,
        apply_to=args.apply_to,
        pooling=args.pooling,
    )
    for entry in manifest["jobs"]:
        log.info(
            "wrote %s (%.1fs, final loss %.6g)",
            entry["file"], entry["wall_time_s"], entry["final_loss"],
        )
    return 0


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )
    try:
        args = build_parser().parse_args(argv)
        return _cmd_run(args)
    except ConfigurationError as exc:
        log.error("configuration error: %s", exc)
        return 1
    except (LoadError, OSError) as exc:
        log.error("I/O error: %s", exc)
        return 2
    except NumericFailure as exc:
        log.error("numeric failure: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
