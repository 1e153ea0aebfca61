"""Command-line entry points: augment, cap, validate, render, bench.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import gc
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np

from . import __version__
from .baselines import mask_contour_reextract, naive_vertex_transform
from .exceptions import AnnotationError, ConfigurationError, RingAugError
from .geometry import RingPolygon, validate
from .io import (
    DEGENERATE_POLICIES,
    FORMATS,
    METHODS,
    AnnotationDocument,
    ImageRef,
    PipelineConfig,
    dumps_annotations,
    iter_annotation_files,
    read_annotations,
    relpath,
)
from .metrics import reports_to_csv, reports_to_json, score_parts, summarize
from .pipeline import augment_polygon
from .project import IndexedVertex, SurvivorSequence
from .raster import rasterize, topology
from .repair import repair
from .transform import AffinePlan, derive_rng, sample, stable_key

log = logging.getLogger("ringaug")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
MANIFEST = "manifest.json"
REPORT_JSON, REPORT_CSV = "cap_report.json", "cap_report.csv"
DEFAULT_BENCH_SIZES = (1_000, 10_000, 100_000, 1_000_000)
LINEARITY_LIMIT = 2.0


class UsageError(Exception):
    pass


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


# -- augment -----------------------------------------------------------------


def _sample_plan(config: PipelineConfig, rel: str, s: int, width: int, height: int) -> AffinePlan:
    # stream depends only on (seed, file, sample) so worker count cannot matter
    rng = derive_rng(config.seed, stable_key(rel), s)
    spec = config.augmentations[int(rng.integers(len(config.augmentations)))]
    return sample(spec, rng, width, height)


def _augment_instance(poly: RingPolygon, plan: AffinePlan, config: PipelineConfig):
    """Output polygons for one source instance plus its manifest record."""
    rec: Dict[str, Any] = {"n": poly.n}
    if config.method == "naive":
        parts = naive_vertex_transform(poly, plan)
        rec.update(status="ok" if parts else "empty", parts=len(parts))
        return [RingPolygon(p, None, poly.label) for p in parts], rec
    if config.method == "contour":
        parts = mask_contour_reextract(poly, plan)
        rec.update(status="ok" if parts else "empty", parts=len(parts))
        return [RingPolygon(p, None, poly.label) for p in parts], rec

    res = augment_polygon(poly, plan, tol=config.tol)
    rec.update(status=res.status, survivors=res.survivors.m, clips=len(res.clips))
    if res.ok:
        out = res.polygon()
        rec["partition"] = out.partition
        return [out], rec
    if res.status == "degenerate" and config.degenerate == "keep":
        log.warning("keeping degenerate output with %d survivor(s)", res.survivors.m)
        rec["decision"] = "kept"
        return [RingPolygon(res.survivors.positions(), None, poly.label)], rec
    rec["decision"] = "skipped"
    return [], rec


def _augment_file(path: Path, in_root: Path, out_root: Path, config: PipelineConfig) -> Dict[str, Any]:
    rel = relpath(path, in_root)
    try:
        doc = read_annotations(path)
    except (AnnotationError, OSError) as exc:
        return {"source": rel, "error": f"{type(exc).__name__}: {exc}"}
    W, H = doc.image.width, doc.image.height
    stem = Path(rel).with_suffix("")
    samples = []
    for s in range(config.samples_per_image):
        plan = _sample_plan(config, rel, s, W, H)
        out_polys: List[RingPolygon] = []
        instances = []
        for j, poly in enumerate(doc.annotations):
            polys, rec = _augment_instance(poly, plan, config)
            rec["source_index"] = j
            rec["outputs"] = list(range(len(out_polys), len(out_polys) + len(polys)))
            out_polys.extend(polys)
            instances.append(rec)
        out_rel = f"{stem.as_posix()}_aug{s}.json"
        out_doc = AnnotationDocument(
            ImageRef(doc.image.path, plan.out_width, plan.out_height), out_polys, config.format
        )
        target = out_root / out_rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(dumps_annotations(out_doc), encoding="utf-8")
        samples.append({"sample_index": s, "output": out_rel, "plan": plan.to_dict(), "instances": instances})
    return {"source": rel, "samples": samples}


def cmd_augment(config: PipelineConfig, input_dir, output_dir, jobs: int = 1) -> Dict[str, Any]:
    """Augment every annotation file under ``input_dir`` into ``output_dir``.

    Returns the manifest, which is also written to ``output_dir``.  Files
    are processed by a pool of ``jobs`` threads; results are collected in
    sorted file order so the outputs do not depend on ``jobs``.
    """
    in_root, out_root = Path(input_dir), Path(output_dir)
    if not in_root.is_dir():
        raise UsageError(f"input directory not found: {in_root}")
    out_root.mkdir(parents=True, exist_ok=True)
    files = iter_annotation_files(in_root)
    if jobs > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda p: _augment_file(p, in_root, out_root, config), files))
    else:
        records = [_augment_file(p, in_root, out_root, config) for p in files]
    manifest = {
        "version": __version__,
        "config": config.to_dict(),
        "files": [r for r in records if "error" not in r],
        "failures": [r for r in records if "error" in r],
    }
    (out_root / MANIFEST).write_text(_dump_json(manifest), encoding="utf-8")
    return manifest


# -- cap ---------------------------------------------------------------------


def cmd_cap(original_dir, augmented_dir, manifest_path=None, out_dir=None, match_tol=None):
    """Score augmented outputs against their sources.

    Returns ``(reports, unpaired)``; writes JSON and CSV reports to
    ``out_dir`` (default: the augmented directory).
    """
    orig_root, aug_root = Path(original_dir), Path(augmented_dir)
    manifest_path = Path(manifest_path) if manifest_path else aug_root / MANIFEST
    out_root = Path(out_dir) if out_dir else aug_root
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"manifest not found: {manifest_path}") from None
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"manifest is not valid JSON: {exc}") from None
    if match_tol is None:
        match_tol = manifest.get("config", {}).get("match_tol", 3.0)

    reports, unpaired, referenced = [], [], set()
    for rec in manifest.get("files", []):
        src = orig_root / rec["source"]
        try:
            original = read_annotations(src)
        except (AnnotationError, OSError):
            unpaired.extend(s["output"] for s in rec["samples"])
            continue
        for s in rec["samples"]:
            referenced.add(s["output"])
            try:
                aug = read_annotations(aug_root / s["output"])
            except (AnnotationError, OSError):
                unpaired.append(s["output"])
                continue
            plan = AffinePlan.from_dict(s["plan"])
            for inst in s["instances"]:
                if not inst["outputs"]:
                    continue
                poly = original.annotations[inst["source_index"]]
                parts = [aug.annotations[k].vertices for k in inst["outputs"]]
                source = f"{s['output']}#{inst['source_index']}"
                r = score_parts(poly, plan, parts, match_tol, source=source)
                if r is not None:
                    reports.append(r)
    skip = {MANIFEST, REPORT_JSON}
    for p in iter_annotation_files(aug_root):
        rel = relpath(p, aug_root)
        if rel not in referenced and p.name not in skip:
            unpaired.append(rel)

    out_root.mkdir(parents=True, exist_ok=True)
    payload = json.loads(reports_to_json(reports))
    payload["unpaired"] = sorted(set(unpaired))
    (out_root / REPORT_JSON).write_text(_dump_json(payload), encoding="utf-8")
    (out_root / REPORT_CSV).write_text(reports_to_csv(reports), encoding="utf-8")
    return reports, sorted(set(unpaired))


# -- validate ----------------------------------------------------------------


def cmd_validate(paths: Sequence) -> List[Dict[str, Any]]:
    """Geometry checks plus raster topology for every annotation found."""
    files: List[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(iter_annotation_files(p))
        elif p.exists():
            files.append(p)
        else:
            raise UsageError(f"no such file or directory: {p}")
    rows = []
    for f in files:
        try:
            doc = read_annotations(f)
        except (AnnotationError, OSError) as exc:
            rows.append({"file": str(f), "index": None, "ok": False, "errors": [str(exc)]})
            continue
        for j, poly in enumerate(doc.annotations):
            report = validate(poly)
            errors = [f"{v.code}: {v.message}" for v in report.violations]
            topo = None
            if poly.n >= 3:
                topo = list(topology(rasterize(poly, doc.image.width, doc.image.height)))
                expected = [1, 1] if poly.is_ring else [1, 0]
                if report.ok and topo != expected:
                    errors.append(f"topology: expected {expected} (components, holes), got {topo}")
            rows.append({"file": str(f), "index": j, "label": poly.label, "ok": not errors, "topology": topo, "errors": errors})
    return rows


# -- render ------------------------------------------------------------------

OUTER_COLOR, INNER_COLOR, LINK_COLOR, PLAIN_COLOR = "#00a000", "#e00000", "#ff9900", "#0060ff"


def _render_items(doc: AnnotationDocument):
    """Yield ``(kind, points, closed)`` drawing primitives in paint order."""
    for poly in doc.annotations:
        v = poly.vertices
        if poly.is_ring:
            L = poly.partition
            yield "outer", v[:L], True
            yield "inner", v[L:], True
            yield "bridge", v[[L - 1, L]], False
            yield "closure", v[[poly.n - 1, 0]], False
        else:
            yield "plain", v, False
        for x, y in v:
            yield "vertex", np.array([[x, y]]), False


_STYLE = {
    "outer": (OUTER_COLOR, 2),
    "inner": (INNER_COLOR, 2),
    "bridge": (LINK_COLOR, 4),
    "closure": (LINK_COLOR, 4),
    "plain": (PLAIN_COLOR, 2),
}


def render_svg(doc: AnnotationDocument, width: int, height: int) -> str:
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for kind, pts, closed in _render_items(doc):
        if kind == "vertex":
            x, y = pts[0]
            lines.append(f'<circle class="vertex" cx="{x:g}" cy="{y:g}" r="2.5" fill="black"/>')
            continue
        color, w = _STYLE[kind]
        coords = " ".join(f"{x:g},{y:g}" for x, y in pts)
        tag = "polygon" if closed else "polyline"
        lines.append(f'<{tag} class="{kind}" points="{coords}" fill="none" stroke="{color}" stroke-width="{w}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_png(doc: AnnotationDocument, width: int, height: int, path) -> None:
    from PIL import Image, ImageDraw

    img = Image.new("RGB", (width, height), "white")
    draw = ImageDraw.Draw(img)
    for kind, pts, closed in _render_items(doc):
        xy = [(float(x), float(y)) for x, y in pts]
        if kind == "vertex":
            (x, y), r = xy[0], 2.5
            draw.ellipse((x - r, y - r, x + r, y + r), fill="black")
            continue
        color, w = _STYLE[kind]
        if closed:
            xy = xy + xy[:1]
        if len(xy) >= 2:
            draw.line(xy, fill=color, width=w)
    img.save(path)


def cmd_render(annotation_file, output_path, size=None) -> List[Path]:
    """Overlay SVG at ``output_path`` plus a PNG next to it."""
    doc = read_annotations(annotation_file)
    width, height = size or (doc.image.width, doc.image.height)
    out = Path(output_path)
    svg = out if out.suffix.lower() == ".svg" else out.with_suffix(".svg")
    svg.parent.mkdir(parents=True, exist_ok=True)
    svg.write_text(render_svg(doc, width, height), encoding="utf-8")
    png = svg.with_suffix(".png")
    render_png(doc, width, height, png)
    return [svg, png]


# -- bench -------------------------------------------------------------------


def _bench_survivors(m: int) -> SurvivorSequence:
    # every other vertex of a 2m-chain survives, so every link bridges a gap
    sv = tuple(IndexedVertex(2 * t + 1, float(t), 0.0) for t in range(m))
    return SurvivorSequence(sv, 2 * m, m)


def cmd_bench(sizes: Sequence[int], rounds: int = 5, budget: float = 0.02) -> Dict[str, Any]:
    """Time :func:`repair` on synthetic survivor sequences of each size.

    Sizes are timed in ``rounds`` interleaved passes so a burst of machine
    noise hits every size alike; within a pass each size repeats until
    ``budget`` seconds are spent.  The fastest repetition per size is kept.
    ``ratio`` is max/min ns-per-vertex.
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise UsageError("bench needs at least one size")
    if any(s < 3 for s in sizes):
        raise UsageError("bench sizes must be >= 3")
    if sizes != sorted(sizes):
        raise UsageError("bench sizes must be ascending")
    t_start = time.perf_counter()
    inputs = [_bench_survivors(m) for m in sizes]
    best = [float("inf")] * len(sizes)
    reps = [0] * len(sizes)
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(rounds):
            for j, surv in enumerate(inputs):
                spent = 0.0
                while spent < budget:
                    t0 = time.perf_counter()
                    repair(surv)
                    dt = time.perf_counter() - t0
                    best[j] = min(best[j], dt)
                    spent += dt
                    reps[j] += 1
    finally:
        if was_enabled:
            gc.enable()
    rows = [
        {"m": m, "seconds": t, "ns_per_vertex": t / m * 1e9, "repeats": r}
        for m, t, r in zip(sizes, best, reps)
    ]
    per = [r["ns_per_vertex"] for r in rows]
    ratio = max(per) / min(per) if len(rows) > 1 else None
    return {
        "rows": rows,
        "ratio": ratio,
        "linear": None if ratio is None else ratio <= LINEARITY_LIMIT,
        "total_seconds": time.perf_counter() - t_start,
    }


# -- argument parsing --------------------------------------------------------


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    return config.replace(
        seed=getattr(args, "seed", None),
        samples_per_image=getattr(args, "samples", None),
        format=getattr(args, "format", None),
        tol=getattr(args, "tol", None),
        degenerate=getattr(args, "degenerate", None),
        method=getattr(args, "method", None),
    )


def _size(text: str):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError("size must look like WIDTHxHEIGHT") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("size must be positive")
    return w, h


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringaug", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ringaug {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="augment every annotation file in a directory")
    p.add_argument("input_dir")
    p.add_argument("output_dir")
    p.add_argument("--config", help="JSON pipeline config")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=_positive_int, help="samples per image")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--tol", type=float, help="projection tolerance in pixels")
    p.add_argument("--degenerate", choices=DEGENERATE_POLICIES)
    p.add_argument("--method", choices=METHODS, help="repaired pipeline or a baseline")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--strict", action="store_true", help="exit 2 if any file failed")

    p = sub.add_parser("cap", help="score augmented outputs with CAP")
    p.add_argument("original_dir")
    p.add_argument("augmented_dir")
    p.add_argument("--manifest")
    p.add_argument("--out", help="report directory (default: augmented_dir)")
    p.add_argument("--tol", type=float, help="matching tolerance in pixels")
    p.add_argument("--strict", action="store_true", help="exit 2 on unpaired files")

    p = sub.add_parser("validate", help="check geometry and raster topology")
    p.add_argument("paths", nargs="+")
    p.add_argument("--strict", action="store_true", help="exit 2 on any violation")

    p = sub.add_parser("render", help="draw an annotation file as SVG and PNG")
    p.add_argument("annotation")
    p.add_argument("output")
    p.add_argument("--size", type=_size, help="canvas WIDTHxHEIGHT (default: image size)")

    p = sub.add_parser("bench", help="time the repair step")
    p.add_argument("sizes", nargs="*", type=int)
    p.add_argument("--strict", action="store_true", help="exit 2 if the linearity check fails")
    return parser


def _run(args) -> int:
    if args.command == "augment":
        manifest = cmd_augment(_load_config(args), args.input_dir, args.output_dir, jobs=args.jobs)
        n_out = sum(len(f["samples"]) for f in manifest["files"])
        print(f"wrote {n_out} file(s) from {len(manifest['files'])} source(s) to {args.output_dir}")
        for fail in manifest["failures"]:
            print(f"failed: {fail['source']}: {fail['error']}", file=sys.stderr)
        return EXIT_DATA if manifest["failures"] else EXIT_OK

    if args.command == "cap":
        if args.tol is not None and not args.tol > 0:
            raise UsageError("--tol must be positive")
        reports, unpaired = cmd_cap(args.original_dir, args.augmented_dir, args.manifest, args.out, args.tol)
        summary = summarize(reports)
        print(json.dumps(summary["overall"]))
        for u in unpaired:
            print(f"unpaired: {u}", file=sys.stderr)
        return EXIT_DATA if (args.strict and unpaired) else EXIT_OK

    if args.command == "validate":
        rows = cmd_validate(args.paths)
        bad = [r for r in rows if not r["ok"]]
        for r in rows:
            print(json.dumps(r))
        return EXIT_DATA if bad else EXIT_OK

    if args.command == "render":
        for path in cmd_render(args.annotation, args.output, args.size):
            print(path)
        return EXIT_OK

    if args.command == "bench":
        result = cmd_bench(args.sizes if args.sizes else DEFAULT_BENCH_SIZES)
        print(f"{'m':>10}  {'ns/vertex':>10}")
        for r in result["rows"]:
            print(f"{r['m']:>10}  {r['ns_per_vertex']:>10.1f}")
        if result["ratio"] is not None:
            flag = "ok" if result["linear"] else "NONLINEAR"
            print(f"ratio max/min = {result['ratio']:.2f} ({flag})")
        return EXIT_DATA if (args.strict and result["linear"] is False) else EXIT_OK
    raise UsageError(f"unknown command {args.command!r}")  # pragma: no cover


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return _run(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RingAugError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
