"""Command-line front end: keygen, hide, extract, sample, diagnose, eval.

Exit codes: 0 success, 2 capacity/key/usage problems, 3 missing files or an
unreachable model, 4 carrier failed the collapse gate and --force was not
given. Errors are one line on stderr, machine-parsable as `error: <reason>`.
"""

from __future__ import annotations

import argparse
import concurrent.futures as futures
import os
import sys

import numpy as np

from . import bridge, codec, diagnostics, metrics
from .config import Config, parse_config, write_config
from .core import (
    CapacityError, FormatError, NoisecoderError, Rng, pack_bits, tensor_read,
    tensor_write,
)
from .projection import capacity_bits, generate_codebook
from .sampler import SamplerError, build_schedule, extract, hide, message_for_capacity
from .score_models import (
    GaussianMixtureModel, ModelError, default_fixture_path,
)

EXIT_OK = 0
EXIT_CAPACITY = 2
EXIT_IO = 3
EXIT_COLLAPSE = 4


class CollapseAbort(NoisecoderError):
    pass


def _fail(code: int, reason: str) -> int:
    print(f"error: {reason}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# model / schedule plumbing
# ---------------------------------------------------------------------------

def load_model(cfg: Config):
    kind, _, rest = cfg.model.partition(":")
    if kind == "gmm":
        path = default_fixture_path() if rest in ("", "builtin") else rest
        return GaussianMixtureModel.from_fixture(path)
    if kind == "bridge":
        endpoint = bridge.resolve_endpoint(rest)
        if cfg.shape is None:
            raise FormatError("bridge models need shape = C,H,W in the config")
        return bridge.BridgeModel(endpoint, cfg.shape)
    raise FormatError(f"unknown model {cfg.model!r} (expected gmm:... or bridge:...)")


def schedule_from(cfg: Config):
    return build_schedule(cfg.sigma_max, cfg.sigma_min, cfg.rho, cfg.steps)


def _read_payload_bits(path: str) -> np.ndarray:
    if path.endswith(".bits"):
        with open(path, encoding="utf-8") as fh:
            text = "".join(fh.read().split())
        if text and set(text) - {"0", "1"}:
            raise FormatError(f"{path}: payload must be ASCII 0/1")
        return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")
    with open(path, "rb") as fh:
        return pack_bits(fh.read())


def _write_bits(bits: np.ndarray, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("".join("1" if b else "0" for b in bits) + "\n")


def _write_image(x0: np.ndarray, path: str) -> None:
    if path.endswith(".nzt"):
        codec.write_float(x0, path)
    elif path.endswith(".png"):
        codec.write_png(codec.quantize_u8(x0), path)
    else:
        raise FormatError(f"unknown image extension for {path!r} (use .png or .nzt)")


def _read_image(path: str) -> np.ndarray:
    if path.endswith(".nzt"):
        return codec.read_float(path)
    if path.endswith(".png"):
        return codec.dequantize_u8(codec.read_png(path))
    raise FormatError(f"unknown image extension for {path!r} (use .png or .nzt)")


def _used_channels(cfg: Config) -> int:
    return 1 if cfg.projection.kind == "multichannel" else cfg.channels


def _usable_capacity(cfg: Config, shape) -> int:
    """Payload bits the configured projection/channel count can carry."""
    return capacity_bits(cfg.projection, (_used_channels(cfg), shape[1], shape[2]))


def _prepare_message(cfg: Config, key, shape, bits: np.ndarray):
    cap = _usable_capacity(cfg, shape)
    if len(bits) > cap:
        raise CapacityError(
            f"payload of {len(bits)} bits exceeds capacity {cap}; "
            "raise bits per element with multibits or use more channels"
        )
    if len(bits) < cap:
        pad = Rng(cfg.seed, "payload_pad").bits(cap - len(bits))
        bits = np.concatenate([bits, pad])
    return message_for_capacity(bits, key, shape, _used_channels(cfg))


def _check_channels(cfg: Config, shape) -> None:
    if cfg.projection.kind == "multichannel":
        if shape[0] != 3:
            raise CapacityError("multichannel needs a 3-channel model")
        return
    if cfg.channels > shape[0]:
        raise CapacityError(
            f"channels = {cfg.channels} exceeds the model's {shape[0]} channels"
        )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_keygen(args) -> int:
    cfg = Config()
    cfg.projection = args.projection
    cfg.channels = args.channels
    cfg.seed = args.seed if args.seed is not None else int.from_bytes(os.urandom(8), "little") >> 1
    cfg.model = args.model if args.model else f"gmm:{default_fixture_path()}"
    cfg.steps = args.steps
    if cfg.projection.kind == "multichannel":
        model = load_model(cfg)
        cb_path = args.codebook_out or "codebook.nzt"
        codebook = generate_codebook(Rng(cfg.seed, "codebook"), model.shape)
        tensor_write(codebook.astype(np.float64), cb_path)
        cfg.codebook = cb_path
        print(f"codebook={cb_path}")
    write_config(cfg, args.out)
    print(f"config={args.out}")
    print(f"seed={cfg.seed}")
    return EXIT_OK


def cmd_hide(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    model = load_model(cfg)
    _check_channels(cfg, model.shape)
    schedule = schedule_from(cfg)
    key = cfg.stego_key()
    bits = _read_payload_bits(args.msg)
    message = _prepare_message(cfg, key, model.shape, bits)

    x0, z_m = hide(message, key, schedule, model, context=cfg.context)
    report = diagnostics.check_collapse(z_m)
    print(f"bpp={message.bits_per_pixel:.6f}")
    print(f"collapse_verdict={report.verdict}")
    if report.verdict == "fail" and not args.force:
        raise CollapseAbort(
            f"carrier failed the collapse gate "
            f"({report.worst_corr_probe}: see diagnose); pass --force to override"
        )
    if args.dump_noise:
        tensor_write(z_m, args.dump_noise)
    _write_image(x0, args.out)
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = parse_config(args.config)
    model = load_model(cfg)
    _check_channels(cfg, model.shape)
    schedule = schedule_from(cfg)
    key = cfg.stego_key()
    x0 = _read_image(args.image)
    if tuple(x0.shape) != tuple(model.shape):
        raise CapacityError(
            f"image shape {tuple(x0.shape)} does not match model {tuple(model.shape)}"
        )
    message, z_rec = extract(x0, key, schedule, model,
                             channels_used=_used_channels(cfg), context=cfg.context)
    bits = message.bits
    nbits = args.nbits if args.nbits is not None else cfg.payload_bits
    if nbits is not None:
        if nbits < 0 or nbits > len(bits):
            raise CapacityError(f"nbits {nbits} out of range 0..{len(bits)}")
        bits = bits[:nbits]
    if args.dump_noise:
        tensor_write(z_rec, args.dump_noise)
    _write_bits(bits, args.out)
    print(f"n_bits={len(bits)}")
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = parse_config(args.config)
    model = load_model(cfg)
    _check_channels(cfg, model.shape)
    schedule = schedule_from(cfg)
    ext = "nzt" if args.format == "nzt" else "png"
    os.makedirs(args.outdir, exist_ok=True)
    cap = _usable_capacity(cfg, model.shape)
    channels = _used_channels(cfg)

    def one(i: int):
        seed_i = cfg.seed + i
        cfg_i_key = cfg.stego_key()
        cfg_i_key.seed = seed_i
        bits = Rng(seed_i, "payload").bits(cap)
        message = message_for_capacity(bits, cfg_i_key, model.shape, channels)
        x0, z_m = hide(message, cfg_i_key, schedule, model, context=cfg.context)
        report = diagnostics.check_collapse(z_m)
        if report.verdict == "fail" and not args.force:
            raise CollapseAbort(f"image {i}: carrier failed the collapse gate")
        img = f"img_{i:04d}.{ext}"
        msg = f"msg_{i:04d}.bits"
        _write_image(x0, os.path.join(args.outdir, img))
        _write_bits(bits, os.path.join(args.outdir, msg))
        return f"{img} {msg} {seed_i}"

    jobs = max(1, args.jobs)
    if jobs == 1 or not getattr(model, "thread_safe", False):
        rows = [one(i) for i in range(args.count)]
    else:
        with futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, range(args.count)))
    manifest = os.path.join(args.outdir, "manifest.txt")
    with open(manifest, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"manifest={manifest}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    z = tensor_read(args.tensor)
    report = diagnostics.check_collapse(z)
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.metric == "acc":
        sent = _read_payload_bits(args.inputs[0])
        got = _read_payload_bits(args.inputs[1])
        print(f"acc={metrics.accuracy(sent, got):.6f}")
    elif args.metric == "pe":
        stego = tensor_read(args.inputs[0]).reshape(-1)
        cover = tensor_read(args.inputs[1]).reshape(-1)
        print(f"pe={metrics.detection_error(stego, cover):.6f}")
    elif args.metric == "frechet":
        a = tensor_read(args.inputs[0])
        b = tensor_read(args.inputs[1])
        print(f"frechet={metrics.frechet_distance(a, b):.6f}")
    elif args.metric == "hist":
        z = tensor_read(args.inputs[0])
        z_rec = tensor_read(args.inputs[1])
        hist = diagnostics.error_histogram(z, z_rec, bins=args.bins)
        for line in hist.lines():
            print(line)
        if args.dump:
            hist.dump(args.dump)
            print(f"hist={args.dump}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisecoder",
        description="hide bit payloads in the initial noise of an ODE sampler",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="write a fresh shared config")
    p.add_argument("--out", required=True)
    p.add_argument("--projection", type=_projection, default=_projection("mb"))
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--model", help="gmm:<fixture> or bridge:<endpoint>")
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--codebook-out", help="codebook path for multichannel")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("hide", help="embed a payload into a fresh carrier image")
    p.add_argument("--config", required=True)
    p.add_argument("--msg", required=True, help=".bits (ASCII 0/1) or raw bytes")
    p.add_argument("--out", required=True, help=".png (u8) or .nzt (float)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--force", action="store_true",
                   help="proceed even if the carrier fails the collapse gate")
    p.add_argument("--dump-noise", help="write the projected carrier noise (.nzt)")
    p.set_defaults(func=cmd_hide)

    p = sub.add_parser("extract", help="recover a payload from a carrier image")
    p.add_argument("--config", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help="recovered bits (.bits)")
    p.add_argument("--nbits", type=int, help="truncate to the true payload length")
    p.add_argument("--dump-noise", help="write the recovered noise (.nzt)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("sample", help="generate a corpus of carriers + manifest")
    p.add_argument("--config", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("png", "nzt"), default="png")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("diagnose", help="collapse report for a noise tensor")
    p.add_argument("tensor", help="carrier noise (.nzt)")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("eval", help="metrics over bit files / score or feature tensors")
    p.add_argument("metric", choices=("acc", "pe", "frechet", "hist"))
    p.add_argument("inputs", nargs=2)
    p.add_argument("--bins", type=int, default=61)
    p.add_argument("--dump", help="two-column histogram dump (hist only)")
    p.set_defaults(func=cmd_eval)

    return parser


def _projection(text: str):
    from .core import ProjectionSpec

    return ProjectionSpec.parse(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CAPACITY
    try:
        return args.func(args)
    except CollapseAbort as exc:
        return _fail(EXIT_COLLAPSE, str(exc))
    except CapacityError as exc:
        return _fail(EXIT_CAPACITY, str(exc))
    except (FormatError, ModelError, SamplerError, bridge.BridgeError, OSError) as exc:
        return _fail(EXIT_IO, str(exc))
    except NoisecoderError as exc:
        return _fail(EXIT_CAPACITY, str(exc))


if __name__ == "__main__":
    sys.exit(main())
