"""Query-cost accounting for the simulated quantum subroutines.

Every emulated subroutine charges a :class:`QueryLedger` with the closed-form
cost of its quantum counterpart.  Hidden constants are instantiated to 1 and
all logarithms are base 2; each charge carries a `formula_id` naming the
closed form so that reported totals can be replayed against the formula
evaluated at the run's parameters.

Counters
--------
matrix_queries     queries to entries of the input matrix
kp_reads           reads of the amplitude-tree QRAM structure
controlled_U_calls applications of controlled unitaries (phase estimation, AE)
elementary_gates   everything else charged at gate granularity
state_preps        state-preparation calls consumed by tomography
"""

from dataclasses import dataclass, field

__all__ = ["QueryLedger", "COUNTERS"]

COUNTERS = (
    "matrix_queries",
    "kp_reads",
    "controlled_U_calls",
    "elementary_gates",
    "state_preps",
)


@dataclass
class QueryLedger:
    """Monotone per-subroutine counters of simulated quantum query charges.

    The charge log is kept aggregated by (subroutine, formula_id, counter);
    totals always equal the sum of logged amounts.
    """

    totals: dict = field(default_factory=lambda: {c: 0.0 for c in COUNTERS})
    log: dict = field(default_factory=dict)

    def charge(self, subroutine, formula_id, amount, counter="matrix_queries"):
        if counter not in self.totals:
            raise ValueError(f"unknown counter {counter!r}")
        if amount < 0:
            raise ValueError(f"charge amount must be nonnegative, got {amount}")
        key = (subroutine, formula_id, counter)
        calls, total = self.log.get(key, (0, 0.0))
        self.log[key] = (calls + 1, total + amount)
        self.totals[counter] += amount

    def total(self, counter="matrix_queries"):
        return self.totals[counter]

    def subroutine_total(self, subroutine, counter=None):
        return sum(
            total
            for (sub, _fid, cnt), (_calls, total) in self.log.items()
            if sub == subroutine and (counter is None or cnt == counter)
        )

    def merge(self, other):
        """Fold a worker shard into this ledger (summation join)."""
        for key, (calls, total) in other.log.items():
            c0, t0 = self.log.get(key, (0, 0.0))
            self.log[key] = (c0 + calls, t0 + total)
            self.totals[key[2]] += total
        return self

    def report(self):
        """Rows of (subroutine, formula_id, counter, calls, total), sorted."""
        rows = [
            {
                "subroutine": sub,
                "formula_id": fid,
                "counter": cnt,
                "calls": calls,
                "total": total,
            }
            for (sub, fid, cnt), (calls, total) in sorted(self.log.items())
        ]
        return {"entries": rows, "totals": dict(self.totals)}
