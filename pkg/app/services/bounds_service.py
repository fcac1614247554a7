"""
Service layer for the shot-complexity comparison table
"""
import logging
from pathlib import Path
from typing import List, Optional, Union

from app.schemas.bounds import BoundInputs, BoundsReport, BoundsRow
from app.services import results_service
from app.services.base import format_float
from app.theory import bounds

# Configure logging
logger = logging.getLogger(__name__)

BOUNDS_COLUMNS = ("quantity", "model", "value")
BOUNDS_FILE = "bounds.csv"


def compute_report(inputs: BoundInputs) -> BoundsReport:
    """
    Evaluate every calculator at one input point.

    Raises:
        NumericDomainError: any input outside a calculator's domain
    """
    p, dm, lip, k, target, n = (
        inputs.p, inputs.delta_margin, inputs.lipschitz, inputs.n_classes, inputs.target_error, inputs.shots
    )
    smaller = bounds.smaller_delta_threshold(dm, lip, k, n)
    return BoundsReport(
        inputs=inputs,
        yomo_error_bound=bounds.yomo_error_bound(p, n),
        vanilla_error_bound=bounds.vanilla_error_bound(dm, lip, k, n),
        yomo_shots=bounds.yomo_shots(p, target),
        vanilla_shots=bounds.vanilla_shots(dm, lip, k, target),
        yomo_single_shot_error=bounds.yomo_single_shot_error(p),
        vanilla_single_shot_error_bound=bounds.vanilla_single_shot_error_bound(dm, lip, k),
        fewer_shots_threshold=bounds.fewer_shots_threshold(dm, lip, k, target),
        smaller_delta_threshold=smaller.threshold,
        smaller_delta_vacuous=smaller.vacuous,
        single_shot_threshold=bounds.single_shot_threshold(dm, lip, k),
        exact_majority_error=bounds.majority_vote_error_exact(p, n),
        exact_majority_shots=bounds.exact_majority_shots(p, target),
        lipschitz_source=inputs.lipschitz_source,
    )


def report_rows(report: BoundsReport) -> List[BoundsRow]:
    """Inputs first, then the three comparison rows for both heads, then thresholds and the exact oracle."""
    i = report.inputs
    smaller = "vacuous" if report.smaller_delta_vacuous else format_float(report.smaller_delta_threshold)
    cells = [
        ("p", "input", format_float(i.p)),
        ("delta_margin", "input", format_float(i.delta_margin)),
        ("lipschitz", "input", f"{format_float(i.lipschitz)} ({report.lipschitz_source})"),
        ("n_classes", "input", str(i.n_classes)),
        ("target_error", "input", format_float(i.target_error)),
        ("shots", "input", str(i.shots)),
        ("error_bound", "yomo", format_float(report.yomo_error_bound)),
        ("error_bound", "vanilla", format_float(report.vanilla_error_bound)),
        ("shots_for_target", "yomo", str(report.yomo_shots)),
        ("shots_for_target", "vanilla", str(report.vanilla_shots)),
        ("single_shot_error", "yomo", format_float(report.yomo_single_shot_error)),
        ("single_shot_error", "vanilla", format_float(report.vanilla_single_shot_error_bound)),
        ("fewer_shots_threshold", "comparison", format_float(report.fewer_shots_threshold)),
        ("smaller_delta_threshold", "comparison", smaller),
        ("single_shot_threshold", "comparison", format_float(report.single_shot_threshold)),
        ("exact_majority_error", "yomo", format_float(report.exact_majority_error)),
        ("exact_majority_shots", "yomo", str(report.exact_majority_shots)),
    ]
    return [BoundsRow(quantity=q, model=m, value=v) for q, m, v in cells]


def run_bounds(
    inputs: BoundInputs,
    out_dir: Optional[str] = None,
    out_path: Optional[Union[str, Path]] = None,
) -> BoundsReport:
    """Compute the report and write it as CSV."""
    report = compute_report(inputs)
    target = Path(out_path) if out_path else Path(out_dir or ".") / BOUNDS_FILE
    results_service.write_csv(
        target, BOUNDS_COLUMNS, ([row.quantity, row.model, row.value] for row in report_rows(report))
    )
    logger.info(f"Bounds: N_yo={report.yomo_shots}, N_va={report.vanilla_shots}, p*={report.fewer_shots_threshold:.4f}")
    return report
