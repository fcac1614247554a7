"""
Service layer for writing result CSV files and recording runs in the registry database
"""
import csv
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from sqlalchemy.exc import IntegrityError
from sqlalchemy.orm import Session

from app.core.config import settings
from app.db.database import init_db, session_scope
from app.models.runs import EvaluationRecord, TrainingRun
from app.schemas.results import EvaluationRow
from app.services.base import format_shots

# Configure logging
logger = logging.getLogger(__name__)

HEADER_PREFIX = "# generated "


def write_csv(path: Union[str, Path], columns: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    """
    Write a result table.

    The first line is a ``# generated <UTC timestamp>`` comment; everything
    after it is a deterministic function of the rows.

    Args:
        path: destination file, parent directories are created
        columns: header row
        rows: already formatted string cells

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"{HEADER_PREFIX}{datetime.now(timezone.utc).isoformat()}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Read a result table back, skipping the timestamp comment."""
    with open(path, newline="", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith(HEADER_PREFIX)]
    return list(csv.DictReader(lines))


def record_training_run(db: Session, run: Dict[str, Any]) -> Dict[str, int]:
    """
    Insert or update one TrainingRun keyed by run_id.

    Args:
        db: Database session
        run: column values

    Returns:
        Dictionary with update statistics
    """
    stats = {"inserted": 0, "updated": 0, "errors": 0}
    try:
        existing = db.query(TrainingRun).filter(TrainingRun.run_id == run["run_id"]).first()
        if existing:
            for key, value in run.items():
                if key != "run_id":
                    setattr(existing, key, value)
            stats["updated"] += 1
        else:
            db.add(TrainingRun(**run))
            stats["inserted"] += 1
        db.commit()
    except IntegrityError as e:
        db.rollback()
        logger.error(f"Database integrity error for run {run.get('run_id')}: {str(e)}")
        stats["errors"] += 1
    logger.info(f"Training run registry update complete: {stats}")
    return stats


def record_evaluations(db: Session, rows: Sequence[EvaluationRow]) -> Dict[str, int]:
    """
    Upsert evaluation cells keyed by (run_id, noise_name, shots, seed).

    Returns:
        Dictionary with update statistics
    """
    stats = {"inserted": 0, "updated": 0, "errors": 0}
    for row in rows:
        shots = format_shots(row.shots)
        try:
            existing = db.query(EvaluationRecord).filter(
                EvaluationRecord.run_id == row.run_id,
                EvaluationRecord.noise_name == row.noise_name,
                EvaluationRecord.shots == shots,
                EvaluationRecord.seed == row.seed,
            ).first()
            values = {
                "repeat_count": row.repeat_count,
                "accuracy": row.accuracy,
                "std_err": row.std_err,
            }
            if existing:
                for key, value in values.items():
                    setattr(existing, key, value)
                stats["updated"] += 1
            else:
                db.add(EvaluationRecord(
                    run_id=row.run_id, noise_name=row.noise_name, shots=shots, seed=row.seed, **values
                ))
                stats["inserted"] += 1
        except IntegrityError as e:
            db.rollback()
            logger.error(f"Database integrity error for evaluation of {row.run_id}: {str(e)}")
            stats["errors"] += 1

    try:
        db.commit()
    except Exception as e:
        db.rollback()
        logger.error(f"Failed to commit evaluation records: {str(e)}")
        raise

    logger.info(f"Evaluation registry update complete: {stats}")
    return stats


def persist(action, *args) -> Optional[Dict[str, int]]:
    """Run a registry update in its own session when persistence is enabled.

    Registry failures are logged, not raised.
    """
    if not settings.PERSIST_RESULTS:
        return None
    try:
        init_db()
        with session_scope() as db:
            return action(db, *args)
    except Exception as e:
        logger.warning(f"Run registry update skipped: {str(e)}")
        return None


def get_all_runs(db: Session) -> List[TrainingRun]:
    return db.query(TrainingRun).order_by(TrainingRun.run_id).all()


def get_run(db: Session, run_id: str) -> Optional[TrainingRun]:
    return db.query(TrainingRun).filter(TrainingRun.run_id == run_id).first()


def get_run_evaluations(db: Session, run_id: str) -> List[EvaluationRecord]:
    return (
        db.query(EvaluationRecord)
        .filter(EvaluationRecord.run_id == run_id)
        .order_by(EvaluationRecord.noise_name, EvaluationRecord.seed, EvaluationRecord.shots)
        .all()
    )
