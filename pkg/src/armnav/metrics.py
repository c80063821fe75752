"""Per-episode logs and the six-way evaluation aggregate.

Metrics:
    SRwD   fraction of episodes that succeed with zero disturbances
    PuSR   fraction of episodes with a successful pickup
    SR     fraction of successful episodes
    PuLen  mean steps until pickup, over episodes that picked up
    SuLen  mean episode length over successful episodes
    Len    mean episode length over all episodes

PuLen counts steps *until* the pickup action, not the full length of
episodes containing a pickup; that keeps it meaningfully below SuLen even
when many pickup episodes run to the step cap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import canonical_json

SUCCESS = "success"
FAILURE = "failure"


class EmptyInput(Exception):
    pass


@dataclass(frozen=True)
class EpisodeLog:
    task_ref: str
    outcome: str  # "success" | "failure"
    steps: int
    pickup_step: int | None
    disturbance_count: int
    reward_sum: float

    def __post_init__(self) -> None:
        if self.outcome not in (SUCCESS, FAILURE):
            raise ValueError(f"bad outcome {self.outcome!r}")
        if self.pickup_step is not None and self.pickup_step > self.steps:
            raise ValueError("pickup_step cannot exceed steps")
        if self.outcome == SUCCESS and self.pickup_step is None:
            raise ValueError("successful episodes must have a pickup step")

    def to_dict(self) -> dict:
        return {
            "task_ref": self.task_ref,
            "outcome": self.outcome,
            "steps": self.steps,
            "pickup_step": self.pickup_step,
            "disturbance_count": self.disturbance_count,
            "reward_sum": self.reward_sum,
        }

    @staticmethod
    def from_dict(d: dict) -> "EpisodeLog":
        return EpisodeLog(
            task_ref=d["task_ref"],
            outcome=d["outcome"],
            steps=int(d["steps"]),
            pickup_step=None if d["pickup_step"] is None else int(d["pickup_step"]),
            disturbance_count=int(d["disturbance_count"]),
            reward_sum=float(d["reward_sum"]),
        )


@dataclass(frozen=True)
class MetricsReport:
    srwd: float
    pusr: float
    sr: float
    pu_len: float | None
    su_len: float | None
    length: float
    n_episodes: int

    def to_dict(self) -> dict:
        return {
            "SRwD": self.srwd,
            "PuSR": self.pusr,
            "SR": self.sr,
            "PuLen": self.pu_len,
            "SuLen": self.su_len,
            "Len": self.length,
            "n_episodes": self.n_episodes,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def format_table(self) -> str:
        def fmt(v) -> str:
            return "-" if v is None else f"{v:.3f}"

        cols = ["SRwD", "PuSR", "SR", "PuLen", "SuLen", "Len"]
        vals = [fmt(self.srwd), fmt(self.pusr), fmt(self.sr), fmt(self.pu_len), fmt(self.su_len), fmt(self.length)]
        head = "".join(f"{c:>10}" for c in cols)
        row = "".join(f"{v:>10}" for v in vals)
        return f"{head}\n{row}  (n={self.n_episodes})"


def aggregate(logs: list[EpisodeLog]) -> MetricsReport:
    """Aggregate episode logs; raises EmptyInput on an empty list."""
    if not logs:
        raise EmptyInput("no episode logs to aggregate")
    n = len(logs)
    succ = [log for log in logs if log.outcome == SUCCESS]
    picked = [log for log in logs if log.pickup_step is not None]
    clean_succ = [log for log in succ if log.disturbance_count == 0]
    return MetricsReport(
        srwd=len(clean_succ) / n,
        pusr=len(picked) / n,
        sr=len(succ) / n,
        pu_len=(sum(log.pickup_step for log in picked) / len(picked)) if picked else None,
        su_len=(sum(log.steps for log in succ) / len(succ)) if succ else None,
        length=sum(log.steps for log in logs) / n,
        n_episodes=n,
    )
