"""Точка входа CLI: simulate | estimate | analyze | verify | report.

Коды выхода: 0: успех, 2: ошибка валидации (конфиг, модель, файл выстрелов),
3: MLE не сошлась, 1: любая другая ошибка.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path

import yaml
from pydantic import ValidationError

from src.analysis.report import NonMarkovReport, read_report
from src.analysis.sources import ShadowSource
from src.estimation.median_of_means import ShotShortfallError
from src.estimation.mle import NonConvergenceError
from src.harness.manifest import PhaseError, RunManifest
from src.harness.runner import (
    analysis_specs,
    analyze_shots,
    load_shots,
    reconstruct_marginals,
    resolve_shots,
    run_experiment,
)
from src.harness.workers import WorkerPool
from src.process.device import ModelError
from src.settings import ExperimentConfig, build_model, config_hash, default_threads, load_config
from src.shadow.sampler import sample_shots
from src.shadow.storage import ShotFileError, ShotWriter
from src.utils.formatting import format_report
from src.utils.logging import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_NON_CONVERGENCE = 3

_VALIDATION_ERRORS = (ValidationError, ModelError, ShotFileError, ShotShortfallError, yaml.YAMLError)


def exit_code(exc: BaseException) -> int:
    cause = exc.cause if isinstance(exc, PhaseError) else exc
    if isinstance(cause, NonConvergenceError):
        return EXIT_NON_CONVERGENCE
    if isinstance(cause, _VALIDATION_ERRORS):
        return EXIT_VALIDATION
    return EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spacetime-shadows",
        description="Пространственно-временные классические тени: crosstalk против немарковости бани",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="YAML-конфиг эксперимента")
    common.add_argument("--shots", type=int, help="число выстрелов (перекрывает protocol.shots)")
    common.add_argument("--seed", type=int, help="master_seed (перекрывает protocol.master_seed)")
    common.add_argument("--out", type=Path, help="каталог результатов (перекрывает output.directory)")
    common.add_argument("--threads", type=int, help="размер пула потоков")
    common.add_argument("--log-level", default=None, help="уровень логирования")

    verbs = parser.add_subparsers(dest="verb", required=True)
    verbs.add_parser("simulate", parents=[common], help="сгенерировать файл выстрелов")

    estimate = verbs.add_parser("estimate", parents=[common], help="таблицы ожиданий и MLE по выстрелам")
    estimate.add_argument("shots_file", type=Path, nargs="?", help="файл выстрелов (.stsh)")

    analyze = verbs.add_parser("analyze", parents=[common], help="полный запуск и отчёт")
    analyze.add_argument("shots_file", type=Path, nargs="?", help="готовый файл выстрелов")
    analyze.add_argument("--exact", action="store_true", help="точный путь без выстрелов")
    analyze.add_argument("--verify", action="store_true", help="сверка с точной моделью")

    verify = verbs.add_parser("verify", parents=[common], help="сверить статистический отчёт с точным")
    verify.add_argument("shots_file", type=Path, nargs="?", help="готовый файл выстрелов")

    report = verbs.add_parser("report", help="показать сохранённый отчёт")
    report.add_argument("path", type=Path, help="YAML-отчёт")
    report.add_argument("--log-level", default=None, help="уровень логирования")
    return parser


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Флаги CLI поверх конфига; результат валидируется заново."""
    data = config.model_dump(mode="json")
    if args.shots is not None:
        data["protocol"]["shots"] = args.shots
    if args.seed is not None:
        data["protocol"]["master_seed"] = args.seed
    if args.out is not None:
        data["output"]["directory"] = str(args.out)
    if args.threads is not None:
        data["threads"] = args.threads
    return ExperimentConfig.model_validate(data)


def _shots_path(config: ExperimentConfig, args: argparse.Namespace) -> Path:
    return args.shots_file or config.output.path(config.output.shots_file)


async def simulate(config: ExperimentConfig) -> Path:
    """Выстрелы диапазонами из пула, запись одним писателем по мере готовности."""
    manifest = RunManifest(config_hash(config))
    path = config.output.path(config.output.shots_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    async with WorkerPool(default_threads(config)) as pool:
        with manifest.phase("build_model"):
            model = build_model(config)
        with manifest.phase("sample"):
            total = resolve_shots(config, model)
            seed = config.protocol.master_seed
            block = max(config.protocol.chunk, 1) * pool.threads
            with ShotWriter(path, model.num_qubits, model.num_steps, seed) as writer:
                for start in range(0, total, block):
                    count = min(block, total - start)
                    step = -(-count // pool.threads)
                    ranges = [(s, min(step, start + count - s)) for s in range(start, start + count, step)]
                    parts = await pool.map(
                        lambda r: sample_shots(model, r[0], r[1], seed, chunk=config.protocol.chunk),
                        ranges,
                    )
                    for part in parts:
                        writer.append(part)
    logger.info("Файл выстрелов: %s (%d выстрелов, %.1f с)", path, total, manifest.timings["sample"])
    return path


async def estimate(config: ExperimentConfig, shots_file: Path) -> int:
    """Только таблицы ожиданий и реконструкции, без анализа."""
    manifest = RunManifest(config_hash(config))
    async with WorkerPool(default_threads(config)) as pool:
        with manifest.phase("build_model"):
            model = build_model(config)
        with manifest.phase("load"):
            batch = load_shots(shots_file, config, model)
        source = ShadowSource(batch, config.shadow_options())
        specs = analysis_specs(config, list(source.qubits))
        await reconstruct_marginals(source, specs, config, pool, manifest, write=True)
    return len(specs)


def _compare(statistical: NonMarkovReport, exact: NonMarkovReport) -> list[str]:
    mismatches = []
    truth = {q.id: q.classification for q in exact.qubits}
    for q in statistical.qubits:
        if q.classification != truth[q.id]:
            mismatches.append(f"q{q.id}: {q.classification} вместо {truth[q.id]}")
    for pair, flag in statistical.pair_flags.items():
        expected = exact.pair_flags.get(pair)
        if expected is not None and flag != expected:
            mismatches.append(f"(q{pair[0]}, q{pair[1]}): {flag} вместо {expected}")
    return mismatches


async def verify(config: ExperimentConfig, shots_file: Path | None) -> int:
    exact = (await run_experiment(config, exact=True, write=False)).report
    if shots_file is not None:
        statistical = (await analyze_shots(shots_file, config, verify=True, write=False)).report
    else:
        statistical = (await run_experiment(config, verify=True, write=False)).report
    mismatches = _compare(statistical, exact)
    print(format_report(statistical))
    if mismatches:
        for line in mismatches:
            logger.error("Расхождение с точной моделью: %s", line)
        return EXIT_FAILURE
    logger.info("Классификация совпадает с точной моделью")
    return EXIT_OK


async def dispatch(args: argparse.Namespace) -> int:
    if args.verb == "report":
        print(format_report(read_report(args.path)))
        return EXIT_OK

    config = apply_overrides(load_config(args.config), args)
    if args.verb == "simulate":
        await simulate(config)
        return EXIT_OK
    if args.verb == "estimate":
        count = await estimate(config, _shots_path(config, args))
        logger.info("Готово: %d маргиналов", count)
        return EXIT_OK
    if args.verb == "verify":
        return await verify(config, args.shots_file)

    if args.shots_file is not None:
        if args.exact:
            logger.warning("--exact игнорируется: задан файл выстрелов")
        result = await analyze_shots(args.shots_file, config, verify=args.verify)
    else:
        result = await run_experiment(config, exact=args.exact, verify=args.verify)
    print(format_report(result.report))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return asyncio.run(dispatch(args))
    except Exception as e:
        code = exit_code(e)
        if code == EXIT_FAILURE:
            logger.exception("Запуск завершился ошибкой")
        else:
            logger.error("%s", e)
        return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
