#!/usr/bin/env python3
"""
Training Metrics Module

Tracks per-epoch loss breakdowns and appends them to the run's line-oriented
metrics log (``epoch<TAB>lr<TAB>L_c<TAB>L_s<TAB>total``). Wall-clock timings
stay in memory so the log itself is reproducible.
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger("patchlabel_metrics")

METRICS_HEADER = "epoch\tlr\tL_c\tL_s\ttotal"


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    classification: float
    sparsity: float
    total: float

    def to_line(self) -> str:
        return f"{self.epoch}\t{self.lr!r}\t{self.classification!r}\t{self.sparsity!r}\t{self.total!r}"

    @classmethod
    def from_line(cls, line: str) -> "EpochRecord":
        epoch, lr, classification, sparsity, total = line.split("\t")
        return cls(int(epoch), float(lr), float(classification), float(sparsity), float(total))


class TrainingMetrics:
    """Epoch history plus timing for one training run"""

    def __init__(self, log_path: Optional[Path] = None):
        self._start_time = time.time()
        self._epoch_started: Optional[float] = None
        self._epoch_times: List[float] = []
        self.records: List[EpochRecord] = []
        self.log_path = Path(log_path) if log_path is not None else None
        if self.log_path is not None:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            self.log_path.write_text(METRICS_HEADER + "\n", encoding="utf-8")

    def start_epoch(self) -> None:
        self._epoch_started = time.time()

    def record_epoch(self, record: EpochRecord) -> None:
        if self._epoch_started is not None:
            self._epoch_times.append(time.time() - self._epoch_started)
            self._epoch_started = None
        self.records.append(record)
        if self.log_path is not None:
            with self.log_path.open("a", encoding="utf-8") as handle:
                handle.write(record.to_line() + "\n")
        logger.info(
            "Epoch %d: lr=%.3g L_c=%.4f L_s=%.3f total=%.4f",
            record.epoch, record.lr, record.classification, record.sparsity, record.total,
        )

    def get_elapsed_seconds(self) -> int:
        return int(time.time() - self._start_time)

    def get_average_epoch_seconds(self) -> float:
        if not self._epoch_times:
            return 0.0
        return sum(self._epoch_times) / len(self._epoch_times)

    def get_summary(self) -> Dict[str, Any]:
        summary = {
            'epochs': len(self.records),
            'elapsed_seconds': self.get_elapsed_seconds(),
            'avg_epoch_seconds': round(self.get_average_epoch_seconds(), 2),
        }
        if self.records:
            summary['final_total_loss'] = self.records[-1].total
        return summary


def read_metrics_log(path: Path) -> List[EpochRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [EpochRecord.from_line(line) for line in lines[1:] if line.strip()]
