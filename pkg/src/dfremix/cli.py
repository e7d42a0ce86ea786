"""Command-line interface.

Subcommands::

    gen-demo  synthesise demo stems and a scene file
    remix     write mixture-at-mic, pre-NALR and NALRed remixes
    degrade   write a degraded copy of the NALRed remix
    enhance   run the full pipeline, write enhanced audio and a JSON report
    eval      SDR / MAE between two WAV files
    nalr      apply a NAL-R prescription to a WAV file

Set ``DFREMIX_LOG_LEVEL`` (e.g. ``INFO``, ``DEBUG``) for log output.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .audio import read_wav, write_wav
from .demo import demo_listener, make_demo_stems
from .exceptions import InvalidInputError, UndefinedMetricError
from .metrics import evaluate
from .nalr import AUDIOGRAM_FREQUENCIES, Audiogram, ListenerProfile, apply_nalr, nalr_gains
from .pipeline import STEM_NAMES, DegradationSpec, build_stack, degrade, load_stems, run_pipeline
from .scene import LISTENER_SCHEMA, RemixScene, dump_json, load_scene, save_scene

logger = logging.getLogger("dfremix")

LOG_ENV = "DFREMIX_LOG_LEVEL"

MIXTURE_WAV = "mixture_at_mic.wav"
PRE_NALR_WAV = "pre_nalr_remix.wav"
NALRED_WAV = "nalred_remix.wav"
DEGRADED_WAV = "degraded.wav"
ENHANCED_WAV = "enhanced.wav"
REPORT_JSON = "report.json"

DEMO_DEGRADATION = DegradationSpec(
    fir_length=16,
    shift=-441,
    magnitude_jitter_db=3.0,
    phase_jitter_rad=0.5,
    jitter_smoothing=8.0,
    snr_db=30.0,
)


def _scene(args) -> RemixScene:
    scene = load_scene(args.scene)
    return scene.with_overrides(
        mode=getattr(args, "mode", None),
        order=getattr(args, "order", None),
        seed=getattr(args, "seed", None),
        output_dir=Path(args.out).resolve() if getattr(args, "out", None) else None,
    )


def cmd_gen_demo(args) -> int:
    out = Path(args.out)
    seed = args.seed if args.seed is not None else 0
    stems = make_demo_stems(duration=args.duration, seed=seed)
    paths = {}
    for name in STEM_NAMES:
        paths[name] = f"stems/{name}.wav"
        write_wav(out / paths[name], stems[name])
    scene = RemixScene(
        stems=paths,
        listener=demo_listener(),
        degradation=DEMO_DEGRADATION,
        output_dir="out",
        seed=seed,
        base_dir=out,
    ).with_overrides(seed=seed)
    save_scene(scene, out / "scene.json")
    (out / "listener.json").write_text(dump_json(scene.listener.to_dict()))
    print(f"wrote demo stems and scene to {out}")
    return 0


def cmd_remix(args) -> int:
    scene = _scene(args)
    stack = build_stack(load_stems(scene.stem_paths()), scene.gains, scene.listener)
    out = scene.out_dir
    write_wav(out / MIXTURE_WAV, stack.mixture_at_mic)
    write_wav(out / PRE_NALR_WAV, stack.pre_nalr_remix)
    write_wav(out / NALRED_WAV, stack.nalred_remix)
    print(f"wrote {PRE_NALR_WAV}, {NALRED_WAV} and {MIXTURE_WAV} to {out}")
    return 0


def cmd_degrade(args) -> int:
    scene = _scene(args)
    src = Path(args.input) if args.input else scene.out_dir / NALRED_WAV
    audio = read_wav(src)
    target = Path(args.output) if args.output else scene.out_dir / DEGRADED_WAV
    write_wav(target, degrade(audio, scene.degradation))
    print(f"wrote {target}")
    return 0


def cmd_enhance(args) -> int:
    scene = _scene(args)
    stack, enhanced, report = run_pipeline(scene)
    out = scene.out_dir
    write_wav(out / ENHANCED_WAV, enhanced)
    if stack.degraded_nalred is not None:
        write_wav(out / DEGRADED_WAV, stack.degraded_nalred)
    (out / REPORT_JSON).write_text(dump_json(report.to_dict()))
    print(
        f"{scene.mode} (order {scene.order if scene.mode == 'df' else 1}): "
        f"SDR {report.sdr_before_mean:.2f} dB -> {report.sdr_after_mean:.2f} dB"
    )
    return 0


def cmd_eval(args) -> int:
    ref = read_wav(args.reference)
    est = read_wav(args.estimate)
    text = dump_json(evaluate(ref, est).to_dict())
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    print(text, end="")
    return 0


def _load_listener(path: Path) -> ListenerProfile:
    data = json.loads(path.read_text())
    if "left" in data:
        import jsonschema

        try:
            jsonschema.validate(data, LISTENER_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise InvalidInputError(f"{path}: {exc.message}") from None
        return ListenerProfile.from_dict(data)
    audiogram = Audiogram.from_dict(data)
    return ListenerProfile(audiogram, audiogram, path.stem)


def cmd_nalr(args) -> int:
    path = Path(args.audiogram)
    if not path.is_file():
        raise FileNotFoundError(f"audiogram file not found: {path}")
    listener = _load_listener(path)
    audio = read_wav(args.input)
    out = Path(args.out) if args.out else Path(args.input).with_name(Path(args.input).stem + "_nalr.wav")
    write_wav(out, apply_nalr(audio, listener, taps=args.taps))
    print("freq_hz  left_ig_db  right_ig_db")
    for f, gl, gr in zip(AUDIOGRAM_FREQUENCIES, nalr_gains(listener.left), nalr_gains(listener.right)):
        print(f"{f:7d}  {gl:10.2f}  {gr:11.2f}")
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfremix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def scene_args(p, estimator=False):
        p.add_argument("--scene", required=True, help="scene JSON file")
        p.add_argument("--seed", type=int, help="override the scene seed")
        p.add_argument("--out", help="override the output directory")
        if estimator:
            p.add_argument("--mode", choices=["crm", "df"])
            p.add_argument("--order", type=int)

    p = sub.add_parser("gen-demo", help="synthesise demo stems and scene")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float, default=5.0)
    p.set_defaults(func=cmd_gen_demo)

    p = sub.add_parser("remix", help="gains, mix and NAL-R")
    scene_args(p)
    p.set_defaults(func=cmd_remix)

    p = sub.add_parser("degrade", help="degrade the NALRed remix")
    scene_args(p)
    p.add_argument("--input", help="WAV to degrade (default: NALRed remix in the output dir)")
    p.add_argument("--output", help="output WAV path")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("enhance", help="run the full pipeline")
    scene_args(p, estimator=True)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("eval", help="SDR and MAE of estimate against reference")
    p.add_argument("reference")
    p.add_argument("estimate")
    p.add_argument("--out", help="also write the report JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("nalr", help="apply a NAL-R prescription")
    p.add_argument("audiogram", help="audiogram or listener JSON")
    p.add_argument("input", help="input WAV")
    p.add_argument("--out", help="output WAV path")
    p.add_argument("--taps", type=int, default=221)
    p.set_defaults(func=cmd_nalr)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInputError, UndefinedMetricError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
