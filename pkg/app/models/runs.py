"""
SQLAlchemy models for the training run registry
"""
from sqlalchemy import Column, DateTime, Float, ForeignKey, Index, Integer, String
from sqlalchemy.sql import func

from app.db.database import Base


class TrainingRun(Base):
    """
    One trained checkpoint, keyed by the deterministic run id
    """
    __tablename__ = "training_runs"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    run_id = Column(String(32), unique=True, index=True, nullable=False)
    head = Column(String(16), nullable=False)
    n_q = Column(Integer, nullable=False)
    n_blocks = Column(Integer, nullable=False)
    n_classes = Column(Integer, nullable=False)
    seed = Column(Integer, nullable=False)
    epochs = Column(Integer, nullable=False)
    final_loss = Column(Float, nullable=True)
    checkpoint_path = Column(String(512), nullable=True)
    updated_at = Column(DateTime(timezone=True), server_default=func.now(), onupdate=func.now())

    def to_dict(self):
        """Convert model to dictionary for JSON response"""
        return {
            "id": self.id,
            "run_id": self.run_id,
            "head": self.head,
            "n_q": self.n_q,
            "n_blocks": self.n_blocks,
            "n_classes": self.n_classes,
            "seed": self.seed,
            "epochs": self.epochs,
            "final_loss": self.final_loss,
            "checkpoint_path": self.checkpoint_path,
            "updated_at": self.updated_at.isoformat() if self.updated_at else None
        }


class EvaluationRecord(Base):
    """
    One accuracy cell: (run, noise, shots, seed)
    """
    __tablename__ = "evaluation_records"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    run_id = Column(String(32), ForeignKey("training_runs.run_id"), index=True, nullable=False)
    noise_name = Column(String(64), nullable=False)
    shots = Column(String(16), nullable=False)  # "inf" for infinite
    seed = Column(Integer, nullable=False)
    repeat_count = Column(Integer, nullable=False)
    accuracy = Column(Float, nullable=False)
    std_err = Column(Float, nullable=False)
    updated_at = Column(DateTime(timezone=True), server_default=func.now(), onupdate=func.now())

    __table_args__ = (
        Index('idx_evaluation_cell', 'run_id', 'noise_name', 'shots', 'seed', unique=True),
    )

    def to_dict(self):
        return {
            "id": self.id,
            "run_id": self.run_id,
            "noise_name": self.noise_name,
            "shots": self.shots,
            "seed": self.seed,
            "repeat_count": self.repeat_count,
            "accuracy": self.accuracy,
            "std_err": self.std_err,
            "updated_at": self.updated_at.isoformat() if self.updated_at else None
        }
