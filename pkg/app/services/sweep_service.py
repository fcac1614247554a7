"""
Service layer for one-axis experiment sweeps
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from app.core.exceptions import ConfigurationError
from app.quantum.noise import resolve_preset
from app.schemas.experiment import NOISELESS, ExperimentConfig, build_config
from app.schemas.results import SWEEP_COLUMNS, SweepRow
from app.services import evaluation_service, results_service
from app.services.base import format_float, format_shots, parse_shots
from app.services.dataset_service import Dataset
from app.services.training_service import TrainResult, load_datasets, train_and_save

# Configure logging
logger = logging.getLogger(__name__)

# axis name -> config field
SWEEP_AXES: Dict[str, str] = {
    "shots": "shots",
    "n_q": "n_q",
    "N_b": "n_blocks",
    "n_blocks": "n_blocks",
    "tau": "tau",
    "noise": "noise",
}
RETRAINING_AXES = ("n_q", "n_blocks", "tau")


def resolve_axis(axis: str) -> str:
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"axis: unknown sweep axis '{axis}', expected one of {sorted(set(SWEEP_AXES))}")
    return SWEEP_AXES[axis]


def parse_axis_values(axis: str, values: Sequence[Any]) -> List[Any]:
    """Coerce raw (often string) axis values to the config field's type."""
    field = resolve_axis(axis)
    if not values:
        raise ConfigurationError(f"values: the {axis} sweep needs at least one value")
    try:
        if field == "shots":
            return [parse_shots(v) for v in values]
        if field in ("n_q", "n_blocks"):
            return [int(v) for v in values]
        if field == "tau":
            return [float(v) for v in values]
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"values: cannot parse {axis} values {list(values)}: {e}")
    names = [str(v).strip() for v in values]
    for name in names:
        if name.lower() != NOISELESS:
            resolve_preset(name)
    return names


def axis_label(field: str, value: Any) -> str:
    if field == "shots":
        return format_shots(value)
    if field == "tau":
        return format_float(value)
    return str(value)


def cell_config(config: ExperimentConfig, field: str, value: Any, seed: int) -> ExperimentConfig:
    update: Dict[str, Any] = {"seeds": [seed], "threads": 1}
    if field == "shots":
        update["shots"] = [value]
    elif field == "noise":
        update.update({"noise": value, "p1": None, "p2": None})
    else:
        update[field] = value
    return build_config({**config.model_dump(), **update})


def _run_cell(
    config: ExperimentConfig,
    axis: str,
    field: str,
    value: Any,
    seed: int,
    data: Tuple[Dataset, Dataset],
    shared: Optional[TrainResult],
    out_dir: Optional[str],
) -> List[SweepRow]:
    label = axis_label(field, value)
    try:
        cfg = cell_config(config, field, value, seed)
        train, test = data
        result = shared or train_and_save(cfg, seed, train, test, out_dir)
        rows = evaluation_service.evaluate_model(
            result.model, result.checkpoint, test, cfg, [cfg.noise_model()]
        )
        return [SweepRow(axis=axis, axis_value=label, evaluation=row) for row in rows]
    except Exception as e:
        logger.warning(f"Sweep cell {axis}={label} seed={seed} failed: {str(e)}")
        return [SweepRow(axis=axis, axis_value=label, error=f"seed {seed}: {e}")]


def run_sweep(
    config: ExperimentConfig,
    axis: str,
    values: Sequence[Any],
    out_path: Optional[Union[str, Path]] = None,
    out_dir: Optional[str] = None,
) -> List[SweepRow]:
    """
    Sweep one axis of a config template and write a combined CSV.

    n_q, N_b and tau cells retrain; shots and noise cells reuse one trained
    model per seed. Cells run in a thread pool of ``config.threads`` workers
    and rows are assembled in (axis value, seed) order. A failing cell
    contributes an error row and the sweep continues.

    Args:
        config: template configuration
        axis: one of shots, n_q, N_b, tau, noise
        values: axis values (strings are parsed)
        out_path: CSV destination, default ``<out_dir>/sweep_<axis>.csv``
        out_dir: overrides config.out_dir

    Returns:
        Sweep rows in output order
    """
    field = resolve_axis(axis)
    parsed = parse_axis_values(axis, values)
    data = load_datasets(config)
    logger.info(f"Sweeping {axis} over {[axis_label(field, v) for v in parsed]} with seeds {config.seeds}")

    shared: Dict[int, TrainResult] = {}
    untrained: Dict[int, str] = {}
    if field not in RETRAINING_AXES:
        for seed in config.seeds:
            try:
                shared[seed] = train_and_save(config, seed, data[0], data[1], out_dir)
            except Exception as e:
                logger.warning(f"Sweep training for seed={seed} failed: {str(e)}")
                untrained[seed] = f"seed {seed}: {e}"

    jobs = [(value, seed) for value in parsed for seed in config.seeds]
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        futures = [
            None if seed in untrained
            else pool.submit(_run_cell, config, axis, field, value, seed, data, shared.get(seed), out_dir)
            for value, seed in jobs
        ]
        rows = []
        for (value, seed), future in zip(jobs, futures):
            if future is None:
                rows.append(SweepRow(axis=axis, axis_value=axis_label(field, value), error=untrained[seed]))
            else:
                rows.extend(future.result())

    target = Path(out_path) if out_path else Path(out_dir or config.out_dir) / f"sweep_{axis}.csv"
    results_service.write_csv(target, SWEEP_COLUMNS, (row.csv_values() for row in rows))
    evaluations = [row.evaluation for row in rows if row.evaluation is not None]
    results_service.persist(results_service.record_evaluations, evaluations)
    failed = sum(1 for row in rows if row.error)
    logger.info(f"Sweep over {axis} complete: {len(rows) - failed} rows, {failed} failed cells")
    return rows
