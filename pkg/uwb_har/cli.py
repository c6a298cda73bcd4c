# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/cli.py
# ----------------------------------------------------------------------------------
# Purpose:
# Single command-line entry point wiring the pipeline stages:
#   simulate -> preprocess -> detect -> featurize -> train -> eval -> infer
#   plus bench, params, ablation, kernel-sweep, range-sweep and runs.
# Each command drives the processors; train, eval, bench and the sweeps are
# recorded as one run in the shared registry, which `runs` lists.
# Every stage validates the run configuration first. Errors are reported as one
# machine-parsable line on stderr; the exit code is 2 for configuration and usage
# errors, 1 for any other failure (unexpected exceptions included) and 0 on
# success.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import sys
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Sequence

from uwb_har.processors.dataset_processor import DatasetProcessor, Split, read_dataset
from uwb_har.processors.evaluation_processor import CLASS_LABELS, EvaluationProcessor
from uwb_har.processors.pipeline_processor import PipelineProcessor, save_weights
from uwb_har.processors.run_processor import RunProcessor
from uwb_har.run_config import ConfigError, RunConfig
from uwb_har.services.activities import Activity
from uwb_har.utils.errors import UwbHarError
from uwb_har.utils.formats import write_confusion, write_metrics
from uwb_har.utils.logger import get_logger

__all__ = ["UsageError", "build_parser", "run"]

# Error kinds reported with exit code 2
USER_ERROR_KINDS = ("config", "usage")


class UsageError(ConfigError):
    """Raised instead of argparse's multi-line usage exit."""

    def __init__(self, message: str) -> None:
        super().__init__(message, operation="cli")
        self.kind = "usage"


class _Parser(ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration (defaults when omitted)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--threads", type=int, help="cap on worker threads")
    common.add_argument("--out", help="output directory (default from config)")
    common.add_argument("--quiet", action="store_true", help="disable progress bars")

    parser = _Parser(prog="uwb-har", description="Simulated UWB radar human activity recognition pipeline")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    simulate = commands.add_parser("simulate", parents=[common], help="simulate a scene to a frame-matrix file")
    simulate.add_argument("--activity", default="walking", help="activity name or code, 'idle' or 'empty'")
    simulate.add_argument("--env", type=int, help="environment id (default: first test environment)")
    simulate.add_argument("--distance", type=float, help="horizontal subject distance in metres")
    simulate.add_argument("--index", type=int, default=0, help="random instance of the activity")
    simulate.add_argument("--scene", help="YAML scene file with a motion profile")
    simulate.add_argument("--output", help="frame file (default <out>/frames.uwbf)")

    for name, help_text, default in (("preprocess", "phase correction, filtering and background subtraction", "preprocessed.uwbf"),
                                     ("featurize", "spectrogram pair of the trailing window", "features.uwbf")):
        stage = commands.add_parser(name, parents=[common], help=help_text)
        stage.add_argument("input", help="frame-matrix file")
        stage.add_argument("--output", help=f"output file (default <out>/{default})")

    detect = commands.add_parser("detect", parents=[common], help="motion detection per window of a preprocessed file")
    detect.add_argument("input", help="preprocessed frame-matrix file")
    detect.add_argument("--hop", type=int, help="frames between window starts (default: one window)")

    commands.add_parser("train", parents=[common], help="generate the corpus and train the fused network").add_argument(
        "--manifest", help="reuse an existing dataset manifest"
    )

    evaluate_cmd = commands.add_parser("eval", parents=[common], help="score trained weights on the test split")
    evaluate_cmd.add_argument("--weights", help="weights file (default <out>/weights.sanw)")
    evaluate_cmd.add_argument("--manifest", help="dataset manifest (default <out>/dataset/manifest.tsv)")

    infer = commands.add_parser("infer", parents=[common], help="motion-gated classification of a raw frame file")
    infer.add_argument("input", help="raw frame-matrix file")
    infer.add_argument("--weights", help="weights file (default <out>/weights.sanw)")
    infer.add_argument("--hop", type=int, help="frames between window starts (default: one window)")

    bench = commands.add_parser("bench", parents=[common], help="per-inference latency statistics")
    bench.add_argument("--weights", help="weights file (random initialization when omitted)")
    bench.add_argument("--runs", type=int, help="number of timed inferences (>= 1000)")

    commands.add_parser("params", parents=[common], help="per-layer parameter and FLOP table")

    for name, help_text in (("ablation", "time-only vs frequency-only vs fused"), ("kernel-sweep", "fused network per kernel size")):
        sweep = commands.add_parser(name, parents=[common], help=help_text)
        sweep.add_argument("--manifest", help="reuse an existing dataset manifest (single seed)")

    commands.add_parser("range-sweep", parents=[common], help="detector TPR per distance and noise-only FAR")

    runs = commands.add_parser("runs", parents=[common], help="list registered runs, or one run with its metrics")
    runs.add_argument("--command", dest="command_filter", help="only runs of this command")
    runs.add_argument("--limit", type=int, help="newest N runs")
    runs.add_argument("--id", type=int, help="show one run and its metric rows")
    return parser


class UwbHarCli:
    """Runs one parsed subcommand against a validated configuration."""

    def __init__(self, cfg: RunConfig, args: Namespace):
        self._cfg = cfg
        self._args = args
        self._logger = get_logger()
        self._progress = not args.quiet
        self._out = Path(cfg.out)
        self._registry = RunProcessor.from_config(cfg)
        self._datasets = DatasetProcessor(cfg, progress=self._progress)
        self._evaluation = EvaluationProcessor(cfg, self._registry, progress=self._progress)
        self._pipeline = PipelineProcessor(cfg, self._registry, progress=self._progress)

    def _path(self, value: str | None, default: str) -> Path:
        return Path(value) if value else self._out / default

    def simulate(self) -> None:
        args = self._args
        activity, occupied = None, True
        if args.activity in ("idle", "empty"):
            occupied = args.activity == "idle"
        else:
            try:
                activity = Activity.parse(args.activity)
            except UwbHarError as e:
                raise UsageError(f"--activity: {e}")
        output = self._path(args.output, "frames.uwbf")
        frames = self._pipeline.simulate(output, activity, args.env, args.distance, args.index, args.scene, occupied)
        print(f"{output}: {frames.n_frames} frames x {frames.n_bins} bins")

    def preprocess(self) -> None:
        output = self._path(self._args.output, "preprocessed.uwbf")
        frames = self._pipeline.preprocess(self._args.input, output)
        print(f"{output}: {frames.n_frames} frames x {frames.n_bins} bins")

    def detect(self) -> None:
        for line in self._pipeline.detect(self._args.input, self._args.hop):
            print(line)

    def featurize(self) -> None:
        output = self._path(self._args.output, "features.uwbf")
        time_spec, _ = self._pipeline.featurize(self._args.input, output)
        print(f"{output}: {time_spec.shape[0]}x{time_spec.shape[1]} time + Doppler pair")

    def train(self) -> None:
        with self._registry.registered("train"):
            train_set, _ = self._datasets.load_or_generate(self._args.manifest, self._out / "dataset")
            net, history = self._evaluation.train_network(train_set)
            save_weights(net, self._out / "weights.sanw")
            write_metrics(self._out / "train_history.json", {"epoch_losses": history.epoch_losses, "samples": len(train_set)})
        print(f"trained on {len(train_set)} samples, final loss {history.final_loss:.6f}; weights {self._out / 'weights.sanw'}")

    def eval(self) -> None:
        with self._registry.registered("eval"):
            net = self._pipeline.network(self._path(self._args.weights, "weights.sanw"))
            datasets = read_dataset(self._path(self._args.manifest, "dataset/manifest.tsv"), self._cfg.input_shape)
            report = self._evaluation.evaluate(net, datasets[Split.TEST])
            write_metrics(self._out / "metrics.json", report.to_dict())
            write_confusion(self._out / "confusion.csv", report.confusion, CLASS_LABELS)
        print(report.table())

    def infer(self) -> None:
        net = self._pipeline.network(self._path(self._args.weights, "weights.sanw"))
        for result in self._pipeline.infer(net, self._args.input, self._args.hop):
            print(result.as_line())

    def bench(self) -> None:
        if self._args.runs is not None and self._args.runs < 1000:
            raise UsageError(f"--runs must be at least 1000, got {self._args.runs}")
        with self._registry.registered("bench"):
            net = self._pipeline.network(self._args.weights)
            stats = self._pipeline.bench(net, self._args.runs)
            write_metrics(self._out / "bench.json", stats.to_dict())
        print(stats.as_line())

    def params(self) -> None:
        net = self._pipeline.network()
        print(f"{'name':<28} {'kind':<12} {'k':>2} {'G':>2} {'d':>2} {'params':>9} {'FLOPs':>12} {'cum_params':>10} {'cum_FLOPs':>12}")
        for row in net.layer_table():
            print(
                f"{row.name:<28} {row.kind:<12} {row.kernel:>2} {row.groups:>2} {row.dilation:>2} "
                f"{row.params:>9} {row.flops:>12} {row.cumulative_params:>10} {row.cumulative_flops:>12}"
            )
        print(f"total params {net.param_count}")
        print(f"total FLOPs {net.flop_count()}")

    def _comparison(self, command: str, method: str) -> None:
        seeds = (self._cfg.seed,) if self._args.manifest else self._cfg.evaluation.ablation_seeds
        summary: dict[str, dict] = {}
        with self._registry.registered(command):
            for seed in seeds:
                cfg = self._cfg.with_overrides(seed=seed)
                train_set, test_set = DatasetProcessor(cfg, progress=self._progress).load_or_generate(self._args.manifest)
                evaluation = EvaluationProcessor(cfg, self._registry, progress=self._progress)
                results = getattr(evaluation, method)(train_set, test_set)
                summary[str(seed)] = {result.name: result.report.to_dict() | {"params": result.param_count} for result in results}
                for result in results:
                    print(f"seed {seed} {result.name:<10} params {result.param_count:>8} macro-F1 {result.report.macro_f1:.4f} accuracy {result.report.accuracy:.4f}")
        write_metrics(self._out / f"{command}.json", summary)

    def ablation(self) -> None:
        self._comparison("ablation", "ablation")

    def kernel_sweep(self) -> None:
        self._comparison("kernel-sweep", "kernel_sweep")

    def range_sweep(self) -> None:
        with self._registry.registered("range-sweep"):
            sweep = self._evaluation.range_sweep()
            far = self._evaluation.noise_far()
            summary = {
                "tpr_by_distance_m": {f"{distance:.2f}": result.tpr for distance, result in sweep},
                "far_per_window": far.far_per_window,
                "noise_windows": far.noise_windows,
            }
            write_metrics(self._out / "range_sweep.json", summary)
        for distance, result in sweep:
            print(f"{distance:5.2f} m  TPR {result.tpr:.4f}")
        print(f"FAR {far.far_per_window:.4f} over {far.noise_windows} noise-only windows")

    def runs(self) -> None:
        args = self._args
        if args.limit is not None and args.limit < 1:
            raise UsageError(f"--limit must be at least 1, got {args.limit}")
        if args.id is None:
            for run in self._registry.list_runs(args.command_filter, args.limit):
                print(_run_line(run))
            return
        run = self._registry.get_run(args.id)
        if run is None:
            raise UwbHarError(f"no run with id {args.id} in the registry", operation="runs", kind="not-found")
        print(_run_line(run))
        for config_name, name, class_label, value in run["metrics"]:
            print(f"  {config_name or '-':<16} {name:<12} {class_label or '-':<8} {value:.6g}")

    def execute(self) -> None:
        handler = getattr(self, self._args.command.replace("-", "_"))
        self._logger.info(f"Running '{self._args.command}' with seed {self._cfg.seed}, {self._cfg.threads} thread(s), out {self._out}")
        try:
            handler()
        finally:
            self._registry.close()


def _run_line(run: dict) -> str:
    return f"{run['id']:>5} {run['command']:<12} {run['status'].name:<8} seed {run['seed']:<4} {run['out_dir']}"


def run(argv: Sequence[str] | None = None) -> int:
    """Parse, validate and run one subcommand; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig.load(args.config).with_overrides(seed=args.seed, threads=args.threads, out=args.out)
        UwbHarCli(cfg, args).execute()
        return 0
    except SystemExit as e:
        return int(e.code or 0)
    except UwbHarError as e:
        if e.kind in USER_ERROR_KINDS:
            print(e.one_line(), file=sys.stderr)
            return 2
        get_logger().error(e.one_line())
        print(e.one_line(), file=sys.stderr)
        return 1
    except Exception as e:
        get_logger().exception(f"Unexpected failure: {e}")
        print(UwbHarError(str(e) or type(e).__name__, operation="cli", kind="internal", original_error=e).one_line(), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
