"""Command-line pipeline driver.

One subcommand per stage, files as the contract between stages:

    hogtrack train     frames + annotations -> SVM model file
    hogtrack saliency  frames -> one PGM map per frame
    hogtrack detect    frames + model -> detections file (+ tracker record)
    hogtrack track     record -> tracks file
    hogtrack eval      detections + truth -> precision/recall report
    hogtrack bench     frames + truth + model -> full-vs-salient comparison

Exit codes: 0 success, 1 runtime/data error, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dataio, detector, evaluate, saliency, svm, tracker
from .errors import ConfigError, PipelineError
from .hog import HogConfig, hog_window


def _parse_window(text: str):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None


def _add_hog_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hog-window", type=_parse_window, default=(64, 128),
                   metavar="WxH", help="detection window size (default 64x128)")
    p.add_argument("--hog-cell", type=int, default=8, metavar="N",
                   help="cell side in pixels (default 8)")
    p.add_argument("--hog-block", type=int, default=2, metavar="N",
                   help="block side in cells (default 2)")
    p.add_argument("--hog-block-stride", type=int, default=None, metavar="N",
                   help="block stride in pixels (default: one cell)")
    p.add_argument("--hog-bins", type=int, default=9, metavar="N",
                   help="orientation bins (default 9)")
    p.add_argument("--hog-clip", type=float, default=0.2, metavar="F",
                   help="L2-Hys clipping value (default 0.2)")


def _hog_config(args) -> HogConfig:
    w, h = args.hog_window
    stride = args.hog_block_stride if args.hog_block_stride is not None else args.hog_cell
    return HogConfig(window_w=w, window_h=h, cell=args.hog_cell,
                     block=args.hog_block, block_stride=stride,
                     bins=args.hog_bins, clip=args.hog_clip)


def _parallel_map(fn, items, jobs: int):
    """Order-preserving map, optionally threaded; results match jobs=1."""
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} not found: {p}")
    return p


# ---------------------------------------------------------------------------
# subcommands


def cmd_train(args) -> int:
    _require_file(args.annotations, "annotations file")
    seq = dataio.FrameSequence.scan(args.frames)
    config = _hog_config(args)
    annotations = dataio.load_annotations(args.annotations, seq.width, seq.height)
    crops, skipped = dataio.sample_crops(seq, annotations, config.window_w,
                                         config.window_h,
                                         negatives_per_frame=args.negatives_per_frame,
                                         seed=args.seed)
    if skipped:
        print(f"warning: {skipped} negative crops could not be placed", file=sys.stderr)
    samples = [svm.LabeledSample(hog_window(img, 0, 0, config).values, label)
               for img, label in crops]
    params = svm.TrainParams(lam=args.svm_lambda, epochs=args.epochs, seed=args.seed)
    model = svm.train(samples, params)
    svm.save_model(model, args.out)
    accuracy = svm.training_accuracy(model, samples)
    print(f"trained on {len(samples)} crops "
          f"({sum(1 for _, l in crops if l == 1)} positive); "
          f"training accuracy {accuracy:.4f}")
    print(f"model written to {args.out}")
    return 0


def cmd_saliency(args) -> int:
    seq = dataio.FrameSequence.scan(args.frames)
    provider = saliency.resolve_provider(args.provider)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(i: int):
        smap = provider.compute(seq.load(i), seq.stem(i))
        saliency.save_map(smap, out_dir / f"{seq.stem(i)}.pgm")

    failures = 0
    for i, result in enumerate(_parallel_map(
            lambda i: _try(one, i), range(len(seq)), args.jobs)):
        if result is not None:
            print(f"frame {seq.stem(i)}: {result}", file=sys.stderr)
            failures += 1
    print(f"wrote {len(seq) - failures} maps to {out_dir}")
    return 1 if failures else 0


def _try(fn, *fn_args):
    try:
        fn(*fn_args)
        return None
    except PipelineError as e:
        return e


def cmd_detect(args) -> int:
    if args.mode == "full" and (args.provider is not None or args.tau is not None):
        raise ConfigError("--provider/--tau only apply to --mode salient")
    model = svm.load_model(_require_file(args.model, "model file"))
    if args.threshold is not None:
        model = model.with_threshold(args.threshold)
    seq = dataio.FrameSequence.scan(args.frames)
    config = _hog_config(args)
    params = detector.DetectParams(stride=args.stride,
                                   tau=args.tau if args.tau is not None else 0.20,
                                   nms_iou=args.nms_iou)
    provider = None
    if args.mode == "salient":
        provider = saliency.resolve_provider(args.provider or "spectral")

    def one(i: int):
        image = seq.load(i)
        if args.mode == "full":
            dets = detector.detect_full(image, model, config, params, frame=i)
            total = len(detector.sliding_windows(image.width, image.height,
                                                 config.window_w, config.window_h,
                                                 params.stride))
            stats = detector.DetectStats(total, total, 0.0)
        else:
            smap = provider.compute(image, seq.stem(i))
            dets, stats = detector.detect_salient(image, smap, model, config,
                                                  params, frame=i)
        return dets, stats

    import time as _time
    t0 = _time.perf_counter()
    results = _parallel_map(one, range(len(seq)), args.jobs)
    elapsed = _time.perf_counter() - t0

    all_dets = [d for dets, _ in results for d in dets]
    classified = sum(s.windows_classified for _, s in results)
    total = sum(s.windows_total for _, s in results)
    dataio.save_detections(all_dets, args.out)
    if args.record:
        record = tracker.make_record(seq.width, seq.height,
                                     [(i, dets) for i, (dets, _) in enumerate(results)])
        tracker.save_record(record, args.record)
        print(f"record written to {args.record}")
    print(f"{len(all_dets)} detections over {len(seq)} frames -> {args.out}")
    print(f"windows classified: {classified} / {total}; wall time {elapsed:.3f} s")
    return 0


def cmd_track(args) -> int:
    record = tracker.load_record(_require_file(args.record, "record file"))
    if not record.frames:
        tracker.save_tracks([], args.out)
        print("record has no detections; wrote empty tracks file")
        return 0
    k = tracker.choose_k(record)
    points = tracker.build_points(record, args.location_weight)
    vectors = np.stack([p.vector for p in points])
    result = tracker.kmeans(vectors, k, restarts=args.restarts, seed=args.seed)
    tracks = tracker.build_tracks(record, result)
    tracker.save_tracks(tracks, args.out)
    collisions = tracker.same_frame_collisions(tracks)
    print(f"k = {k}; inertia {result.inertia:.6f} over {args.restarts} restarts; "
          f"{len(tracks)} tracks; same-frame collisions: {collisions}")
    print(f"tracks written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    detections = dataio.load_detections(_require_file(args.detections, "detections file"))
    seq = dataio.FrameSequence.scan(args.frames)
    truth = dataio.load_annotations(_require_file(args.truth, "annotations file"),
                                    seq.width, seq.height)
    report = evaluate.match_and_score(detections, truth.boxes(), args.iou)
    print(f"tp {report.tp}  fp {report.fp}  fn {report.fn}")
    print(f"precision {report.precision:.4f}")
    print(f"recall {report.recall:.4f}")
    return 0


def cmd_bench(args) -> int:
    model = svm.load_model(_require_file(args.model, "model file"))
    seq = dataio.FrameSequence.scan(args.frames)
    truth = dataio.load_annotations(_require_file(args.truth, "annotations file"),
                                    seq.width, seq.height)
    config = _hog_config(args)
    params = detector.DetectParams(stride=args.stride, tau=args.tau,
                                   nms_iou=args.nms_iou)
    provider = saliency.resolve_provider(args.provider)
    frames = seq.load_all()
    stems = [seq.stem(i) for i in range(len(seq))]
    result = evaluate.bench_compare(frames, provider, model, config, params,
                                    truth.boxes(), stems, iou_cutoff=args.iou)
    print(evaluate.format_bench_report(result))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hogtrack", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the SVM on annotated frames")
    p.add_argument("--frames", required=True, help="directory of PGM/PPM frames")
    p.add_argument("--annotations", required=True, help="CSV of frame,x,y,w,h boxes")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--negatives-per-frame", type=int, default=2, metavar="N")
    p.add_argument("--lambda", dest="svm_lambda", type=float, default=1e-4, metavar="F")
    p.add_argument("--epochs", type=int, default=50, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    _add_hog_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("saliency", help="write one saliency map per frame")
    p.add_argument("--frames", required=True)
    p.add_argument("--provider", default="spectral", metavar="NAME",
                   help="'spectral' or 'file:<dir>'")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("detect", help="run the detector over a frame sequence")
    p.add_argument("--frames", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("full", "salient"), default="full")
    p.add_argument("--provider", default=None, metavar="NAME")
    p.add_argument("--tau", type=float, default=None, metavar="F",
                   help="saliency skip threshold (salient mode, default 0.20)")
    p.add_argument("--stride", type=int, default=8, metavar="N")
    p.add_argument("--nms-iou", type=float, default=None, metavar="F")
    p.add_argument("--threshold", type=float, default=None, metavar="F",
                   help="override the model's decision threshold")
    p.add_argument("--out", required=True, help="detections file")
    p.add_argument("--record", default=None, metavar="PATH",
                   help="also write a tracker record with feature vectors")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    _add_hog_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("track", help="cluster a detection record into tracks")
    p.add_argument("--record", required=True)
    p.add_argument("--out", required=True, help="tracks file (JSON)")
    p.add_argument("--location-weight", type=float, default=1.0, metavar="F")
    p.add_argument("--restarts", type=int, default=100, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a detections file against ground truth")
    p.add_argument("--detections", required=True)
    p.add_argument("--frames", required=True, help="frame directory (for dimensions)")
    p.add_argument("--truth", required=True)
    p.add_argument("--iou", type=float, default=0.5, metavar="F")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="compare full-frame vs saliency-windowed detection")
    p.add_argument("--frames", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--provider", default="spectral", metavar="NAME")
    p.add_argument("--tau", type=float, default=0.20, metavar="F")
    p.add_argument("--stride", type=int, default=8, metavar="N")
    p.add_argument("--nms-iou", type=float, default=None, metavar="F")
    p.add_argument("--iou", type=float, default=0.5, metavar="F")
    _add_hog_flags(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except PipelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
