"""Оркестрация эксперимента.

Фазы: build_model → (sample | load) → estimate → reconstruct → analyze → write_report.
Точный путь не читает файлы выстрелов; статистический путь обращается к точной
модели только при verify. Все файлы пишет корутина-оркестратор.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from src.analysis.classify import (
    Threshold,
    ThresholdMode,
    bootstrap_threshold,
    classify,
    classify_pairs,
    null_ensemble,
)
from src.analysis.maps import (
    common_cause_matrix,
    common_cause_specs,
    filtered_qmi_map,
    filtered_specs,
    naive_qmi_map,
    spatial_qmi_matrix,
    spatial_specs,
    standard_errors,
)
from src.analysis.report import NonMarkovReport, QubitEntry, write_report
from src.analysis.sources import ExactSource, MarginalSource, ShadowOptions, ShadowSource
from src.db.database import Database, ledger_path
from src.db.queries import save_run
from src.estimation.budget import EstimationPlan
from src.estimation.causality import free_observables
from src.estimation.median_of_means import ShotShortfallError
from src.estimation.mle import NonConvergenceError
from src.estimation.tables import write_table
from src.harness.manifest import RunManifest, write_manifest
from src.harness.workers import WorkerPool, shot_ranges
from src.process.device import DeviceModel
from src.process.marginals import MarginalSpec
from src.settings import ExperimentConfig, build_model, config_hash, default_threads
from src.shadow.records import ShadowBatch
from src.shadow.sampler import sample_shots
from src.shadow.storage import read_header, read_shots, write_shots

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    report: NonMarkovReport
    manifest: RunManifest
    report_path: Path | None = None
    run_id: int | None = None


def resolve_shots(config: ExperimentConfig, model: DeviceModel) -> int:
    """shots из конфига; иначе: по формуле бюджета для одно-кубитного маргинала при заданном ε."""
    protocol = config.protocol
    if protocol.shots is not None:
        return protocol.shots
    spec = MarginalSpec.single_qubit(model.qubit_ids[0], model.num_steps)
    plan = EstimationPlan.build(
        free_observables(spec.legs()), protocol.epsilon, model.num_qubits, batches=protocol.batches,
    )
    return plan.total_shots


def analysis_specs(config: ExperimentConfig, qubits: list[int]) -> list[MarginalSpec]:
    """Маргиналы, нужные включённым анализам (без повторов, в детерминированном порядке)."""
    k = config.protocol.k
    specs = filtered_specs(qubits, k)
    if config.analysis.wants("common_cause") and k == 2:
        specs += common_cause_specs(qubits)
    if config.analysis.wants("spatial"):
        specs += spatial_specs(qubits, config.analysis.spatial_step, k)
    return list(dict.fromkeys(specs))


def _null_seed(config: ExperimentConfig, n: int) -> int:
    entropy = [config.protocol.master_seed, config.analysis.threshold.null_seed, n]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0] >> 1)


def _null_scores(
    item: tuple[int, DeviceModel], *, config: ExperimentConfig, exact: bool, shots: int, common: bool,
) -> tuple[list[float], list[float]]:
    """Оценки одной нулевой модели тем же путём, что и основной анализ."""
    n, model = item
    if exact:
        source: MarginalSource = ExactSource(model, config.analysis.max_dim)
    else:
        batch = sample_shots(model, 0, shots, _null_seed(config, n), chunk=config.protocol.chunk)
        options = config.shadow_options()
        source = ShadowSource(batch, ShadowOptions(batches=options.batches, mle=options.mle))
    filtered = list(filtered_qmi_map(source).values())
    off_diagonal: list[float] = []
    if common:
        matrix = common_cause_matrix(source)
        off_diagonal = list(matrix[~np.eye(len(matrix), dtype=bool)])
    return filtered, off_diagonal


async def _thresholds(
    model: DeviceModel, config: ExperimentConfig, pool: WorkerPool, *,
    exact: bool, shots: int, common: bool,
) -> dict[str, Threshold]:
    t = config.analysis.threshold
    if t.mode is ThresholdMode.fixed:
        fixed = Threshold(t.value)
        return {"filtered": fixed, "common_cause": fixed} if common else {"filtered": fixed}

    nulls = null_ensemble(model, count=t.null_models, seed=t.null_seed, j_range=t.j_range)
    logger.info("Нулевой ансамбль: %d моделей только с crosstalk", len(nulls))
    scored = await pool.map(
        partial(_null_scores, config=config, exact=exact, shots=shots, common=common),
        list(enumerate(nulls)),
    )
    thresholds = {
        "filtered": bootstrap_threshold(np.concatenate([s[0] for s in scored]), t.percentile),
    }
    if common:
        thresholds["common_cause"] = bootstrap_threshold(
            np.concatenate([s[1] for s in scored]), t.percentile,
        )
    return thresholds


async def _sample(model: DeviceModel, config: ExperimentConfig, pool: WorkerPool, shots: int) -> ShadowBatch:
    seed = config.protocol.master_seed
    ranges = shot_ranges(shots, pool.threads)
    parts = await pool.map(
        lambda r: sample_shots(model, r[0], r[1], seed, chunk=config.protocol.chunk), ranges,
    )
    batch = ShadowBatch.concat(parts)
    logger.info("Сгенерировано %d выстрелов (%d диапазонов), seed=%d", len(batch), len(ranges), seed)
    return batch


async def reconstruct_marginals(
    source: ShadowSource, specs: list[MarginalSpec], config: ExperimentConfig,
    pool: WorkerPool, manifest: RunManifest, write: bool,
) -> None:
    with manifest.phase("estimate"):
        tables = await pool.map(source.table, specs)
        if write and config.output.tables_dir:
            directory = config.output.path(config.output.tables_dir)
            for spec, table in zip(specs, tables):
                write_table(directory / f"{spec.slug()}.tsv", table)
        logger.info("Оценено %d таблиц ожиданий", len(tables))

    with manifest.phase("reconstruct"):
        marginals = await pool.map(source.marginal, specs)
        failed = [spec.describe() for spec, m in zip(specs, marginals) if not m.estimate.converged]
        if failed and config.analysis.mle.require_convergence:
            raise NonConvergenceError(f"MLE не сошлась для {len(failed)} маргиналов: {failed[:3]}")
        worst = max(m.estimate.causality_residual for m in marginals)
        logger.info("Восстановлено %d маргиналов, max причинная невязка %.1e", len(marginals), worst)


async def _analyze(
    source: MarginalSource,
    model: DeviceModel,
    config: ExperimentConfig,
    pool: WorkerPool,
    *,
    oracle: ExactSource | None,
    verify: bool,
    shots: int,
) -> NonMarkovReport:
    analysis = config.analysis
    qubits = list(source.qubits)
    k = source.num_steps
    exact = isinstance(source, ExactSource)

    if exact:
        await pool.map(source.process, analysis_specs(config, qubits))

    filtered = filtered_qmi_map(source, qubits)
    naive = naive_qmi_map(oracle, qubits) if oracle is not None and analysis.wants("naive") else {}
    errors: dict[int, float] = {}
    if isinstance(source, ShadowSource) and analysis.bootstrap_replicates >= 2:
        replicates = await pool.map(partial(filtered_qmi_map, qubits=qubits), source.bootstrap())
        errors = standard_errors(replicates)
    exact_filtered = filtered_qmi_map(oracle, qubits) if verify and not exact and oracle else {}
    if exact_filtered:
        deviation = max(abs(filtered[q] - exact_filtered[q]) for q in qubits)
        logger.info("Проверка по точной модели: max |Δ filtered| = %.3e бит", deviation)

    common_wanted = analysis.wants("common_cause")
    if common_wanted and k != 2:
        logger.warning("Анализ общей причины пропущен: определён только при k = 2 (k = %d)", k)
        common_wanted = False
    common = common_cause_matrix(source, qubits) if common_wanted else None
    spatial = (
        spatial_qmi_matrix(source, qubits, analysis.spatial_step) if analysis.wants("spatial") else None
    )

    thresholds = await _thresholds(model, config, pool, exact=exact, shots=shots, common=common_wanted)
    labels = classify(filtered, thresholds["filtered"])
    pair_flags = classify_pairs(common, qubits, thresholds["common_cause"]) if common is not None else {}

    entries = tuple(
        QubitEntry(
            id=q,
            x=model.qubit(q).x,
            y=model.qubit(q).y,
            filtered_qmi=filtered[q],
            naive_qmi=naive.get(q),
            filtered_se=errors.get(q),
            exact_filtered_qmi=exact_filtered.get(q),
            classification=labels[q],
        )
        for q in qubits
    )
    flagged = [q for q in qubits if labels[q] != "clean"]
    logger.info("Кубиты с банной немарковостью: %s", flagged or "нет")
    if pair_flags:
        shared = [pair for pair, flag in pair_flags.items() if flag == "shared-bath"]
        logger.info("Пары с общей баней: %s", shared or "нет")

    return NonMarkovReport(
        qubits=entries,
        thresholds=thresholds,
        provenance=source.provenance(),
        common_cause=common,
        pair_flags=pair_flags,
        spatial=spatial,
        num_steps=k,
    )


async def _finish(
    report: NonMarkovReport, manifest: RunManifest, config: ExperimentConfig, write: bool,
) -> RunResult:
    result = RunResult(report, manifest)
    if not write:
        return result
    with manifest.phase("write_report"):
        result.report_path = write_report(config.output.path(config.output.report_file), report)
        manifest.report_path = str(result.report_path)
    write_manifest(config.output.path(config.output.manifest_file), manifest)
    if config.output.ledger is not None:
        async with Database(ledger_path(config.output.ledger)) as db:
            result.run_id = await save_run(db, manifest, report.provenance)
        logger.info("Запуск #%d записан в журнал", result.run_id)
    return result


async def _run_statistical(
    batch: ShadowBatch, model: DeviceModel, config: ExperimentConfig, pool: WorkerPool,
    manifest: RunManifest, *, verify: bool, write: bool,
) -> NonMarkovReport:
    source = ShadowSource(batch, config.shadow_options())
    specs = analysis_specs(config, list(source.qubits))
    await reconstruct_marginals(source, specs, config, pool, manifest, write)
    oracle = ExactSource(model, config.analysis.max_dim) if verify else None
    with manifest.phase("analyze"):
        return await _analyze(
            source, model, config, pool, oracle=oracle, verify=verify, shots=len(batch),
        )


async def run_experiment(
    config: ExperimentConfig,
    *,
    exact: bool = False,
    verify: bool = False,
    threads: int | None = None,
    write: bool = True,
) -> RunResult:
    """Полный запуск; детерминирован при заданном master_seed."""
    manifest = RunManifest(config_hash(config))
    async with WorkerPool(threads or default_threads(config)) as pool:
        with manifest.phase("build_model"):
            model = build_model(config)

        if exact:
            source = ExactSource(model, config.analysis.max_dim)
            with manifest.phase("analyze"):
                report = await _analyze(source, model, config, pool, oracle=source, verify=False, shots=0)
        else:
            with manifest.phase("sample"):
                batch = await _sample(model, config, pool, resolve_shots(config, model))
                if write:
                    path = config.output.path(config.output.shots_file)
                    path.parent.mkdir(parents=True, exist_ok=True)
                    write_shots(path, batch)
                    manifest.shot_files.append(str(path))
            report = await _run_statistical(batch, model, config, pool, manifest, verify=verify, write=write)

        return await _finish(report, manifest, config, write)


def load_shots(path: str | Path, config: ExperimentConfig, model: DeviceModel) -> ShadowBatch:
    """Проверить заголовок против конфига и прочитать ровно запланированное число выстрелов."""
    header = read_header(path)
    header.check(
        num_qubits=model.num_qubits, num_steps=model.num_steps, master_seed=config.protocol.master_seed,
    )
    wanted = resolve_shots(config, model)
    if header.shots < wanted:
        raise ShotShortfallError(wanted, header.shots)
    return read_shots(path, qubits=model.qubit_ids, limit=wanted)


async def analyze_shots(
    path: str | Path,
    config: ExperimentConfig,
    *,
    verify: bool = False,
    threads: int | None = None,
    write: bool = True,
) -> RunResult:
    """Статистический путь по готовому файлу выстрелов."""
    manifest = RunManifest(config_hash(config))
    async with WorkerPool(threads or default_threads(config)) as pool:
        with manifest.phase("build_model"):
            model = build_model(config)
        with manifest.phase("load"):
            batch = load_shots(path, config, model)
            manifest.shot_files.append(str(path))
            logger.info("Загружено %d выстрелов из %s", len(batch), path)
        report = await _run_statistical(batch, model, config, pool, manifest, verify=verify, write=write)
        return await _finish(report, manifest, config, write)


async def resume_from_shots(
    path: str | Path, config: ExperimentConfig, *, threads: int | None = None, write: bool = False,
) -> NonMarkovReport:
    """Отчёт по сохранённым выстрелам; совпадает с отчётом исходного полного запуска."""
    result = await analyze_shots(path, config, threads=threads, write=write)
    return result.report
