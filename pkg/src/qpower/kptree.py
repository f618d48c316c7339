"""Binary amplitude tree over a vector's entries (the Kerenidis-Prakash QRAM
layout), emulating logarithmic-depth state preparation.

The root stores the vector norm and support size; each internal node stores
the square root of the sum of its children's squared absolute values; leaves
store the entries themselves.  Nodes that are never created read as 0.  The
tree for a vector of length d is addressed as if d were padded to the next
power of two, so the bits of a node index spell the path from the root.
Trees are immutable after construction.
"""

import math

import numpy as np

__all__ = ["KPTree"]


class KPTree:
    """Immutable amplitude tree for a complex vector."""

    __slots__ = ("dim", "depth", "root_norm", "support_size", "levels", "leaves")

    def __init__(self, dim, depth, levels, leaves):
        self.dim = dim
        self.depth = depth
        self.levels = levels
        self.leaves = leaves
        self.root_norm = levels[0].get(0, 0.0)
        self.support_size = len(leaves)

    @classmethod
    def build(cls, v):
        """Build the tree touching O(t log d) nodes, t = |supp(v)|."""
        v = np.asarray(v)
        if v.ndim != 1 or v.shape[0] < 1:
            raise ValueError("v must be a nonempty vector")
        d = v.shape[0]
        depth = max(int(math.ceil(math.log2(d))), 0) if d > 1 else 0
        support = np.flatnonzero(v)
        leaves = {int(j): complex(v[j]) for j in support}
        levels = [dict() for _ in range(depth + 1)]
        if depth == 0:
            levels[0][0] = math.sqrt(sum(abs(x) ** 2 for x in leaves.values()))
            return cls(d, depth, levels, leaves)
        sq = {j: abs(x) ** 2 for j, x in leaves.items()}
        levels[depth] = dict(leaves)
        for lev in range(depth - 1, -1, -1):
            up = {}
            for j, s in sq.items():
                up[j >> 1] = up.get(j >> 1, 0.0) + s
            levels[lev] = {j: math.sqrt(s) for j, s in up.items()}
            sq = up
        return cls(d, depth, levels, leaves)

    def query(self, level, j):
        """Stored scalar at node (level, j); absent nodes read as 0."""
        if not 0 <= level <= self.depth:
            raise ValueError(f"level must be in [0, {self.depth}], got {level}")
        if not 0 <= j < (1 << level):
            raise ValueError(f"node index {j} out of range at level {level}")
        return self.levels[level].get(j, 0.0)

    def leaf_value(self, j):
        """Entry v_j (0 if absent)."""
        if not 0 <= j < self.dim:
            raise ValueError(f"leaf index {j} out of range")
        return self.leaves.get(j, 0.0)

    def state_prep_charge(self):
        # one emulated preparation costs 2*ceil(log2 d) tree reads
        return 2 * max(self.depth, 1)

    def amplitudes(self, ledger=None, subroutine="state_prep"):
        """Unit amplitude vector v/||v||, reconstructed root-to-leaf through
        node-value ratios (the controlled-rotation cascade).  Charges the
        ledger 2*ceil(log2 d) tree reads per preparation when given."""
        if self.root_norm == 0.0:
            raise ValueError("cannot prepare a state from the zero vector")
        if ledger is not None:
            ledger.charge(subroutine, "kptree.state_prep_reads", self.state_prep_charge(), counter="kp_reads")
        out = np.zeros(self.dim, dtype=complex)
        for j in self.leaves:
            amp = 1.0 + 0.0j
            parent_val = self.root_norm
            for lev in range(1, self.depth + 1):
                node = j >> (self.depth - lev)
                val = self.levels[lev][node]
                amp *= val / parent_val
                parent_val = abs(val)
            if self.depth == 0:
                amp = self.leaves[j] / self.root_norm
            out[j] = amp
        return out

    def subnormalized_amplitudes(self, tol=1e-12):
        """(v, 1 - ||v||^2) viewed as the amplitude split of a block state;
        requires ||v|| <= 1."""
        nrm = self.root_norm
        if nrm > 1.0 + tol:
            raise ValueError(f"vector norm {nrm:.12g} exceeds 1")
        vec = np.zeros(self.dim, dtype=complex)
        for j, x in self.leaves.items():
            vec[j] = x
        return vec, max(1.0 - nrm * nrm, 0.0)

    def dump_rows(self):
        """Level-order (level, index, value) triples of the stored nodes."""
        for lev in range(self.depth + 1):
            for j in sorted(self.levels[lev]):
                yield lev, j, self.levels[lev][j]

    def dump_csv(self, fh):
        fh.write("level,index,value\n")
        for lev, j, val in self.dump_rows():
            if isinstance(val, complex):
                fh.write(f"{lev},{j},{val.real!r}{'+' if val.imag >= 0 else ''}{val.imag!r}j\n")
            else:
                fh.write(f"{lev},{j},{val!r}\n")
