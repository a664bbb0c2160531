"""``dynrad`` command line.

Exit codes: 0 success, 2 invalid input or configuration, 3 finished with
some subjects skipped or rejected, 4 a stage failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ValidationError
from ..volume_io import load_manifest
from . import stages, synth
from .config import PipelineConfig
from .schemas import SCHEMAS

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL, EXIT_STAGE = 0, 2, 3, 4

log = logging.getLogger("dynrad")


def _config(path) -> PipelineConfig:
    return PipelineConfig.load(path) if path else PipelineConfig()


def cmd_synth(args) -> int:
    spec = synth.SynthSpec.load(args.spec) if args.spec else synth.SynthSpec()
    try:
        manifest = synth.generate(spec, args.out)
    except OSError as exc:
        raise stages.StageError("synth", exc) from exc
    print(manifest)
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = _config(args.config)
    entries = load_manifest(args.manifest)
    report = stages.extract_stage(entries, cfg, args.out, args.labels_out)
    return EXIT_PARTIAL if report.rejects else EXIT_OK


def cmd_dynamics(args) -> int:
    cfg = _config(args.config)
    report = stages.dynamics_stage(args.static, cfg, args.out)
    return EXIT_PARTIAL if report.rejects else EXIT_OK


def cmd_select(args) -> int:
    cfg = _config(args.config)
    stages.select_stage(args.dynamic, args.labels, cfg, args.out)
    return EXIT_OK


def cmd_train_eval(args) -> int:
    cfg = _config(args.config)
    metrics = stages.train_eval_stage(args.selected, cfg, args.out)
    for m in metrics["models"]:
        log.info("%s accuracy=%.3f auc=%s", m["model"], m["accuracy"], m["auc"])
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args.config)
    out = args.out or cfg.output_dir
    if not out:
        raise ValidationError("no output directory: pass --out or set outputDir in the config")
    result = stages.run_pipeline(args.manifest, cfg, out, resume=args.resume)
    log.info("ran %s; skipped %s", result.ran, result.skipped)
    return EXIT_PARTIAL if result.rejects else EXIT_OK


def cmd_schema(args) -> int:
    print(json.dumps(SCHEMAS[args.name](), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynrad", description="Dynamic radiomics pipeline.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a seeded synthetic cohort")
    s.add_argument("--spec", type=Path)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("extract", help="static features per subject and timepoint")
    s.add_argument("--manifest", type=Path, required=True)
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--labels-out", type=Path, help="labels table (default: labels.csv beside --out)")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("dynamics", help="dynamic features per subject")
    s.add_argument("--static", type=Path, required=True)
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_dynamics)

    s = sub.add_parser("select", help="holdout split and LASSO selection")
    s.add_argument("--dynamic", type=Path, required=True)
    s.add_argument("--labels", type=Path, required=True)
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("train-eval", help="train classifiers and write metrics")
    s.add_argument("--selected", type=Path, required=True)
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_train_eval)

    s = sub.add_parser("run", help="all stages with cached outputs")
    s.add_argument("--manifest", type=Path, required=True)
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path)
    s.add_argument("--resume", action="store_true", help="skip stages whose inputs and outputs are unchanged")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("schema", help="print a published JSON schema")
    s.add_argument("name", choices=sorted(SCHEMAS))
    s.set_defaults(func=cmd_schema)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ValidationError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except stages.StageError as exc:
        log.error("stage failed: %s", exc)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
