"""The monotonic set of equivalent sequences, with provenance edges and the
fixed-point saturation driver.

Sequences are keyed by structural digest and are never removed or mutated;
every rewrite only ever grows the set. Insertion deduplicates by digest and
confirms with a full structural comparison, so hash consing cannot silently
conflate distinct sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .esequence import ESequence, analyze
from .rewrite import RewriteRule


@dataclass(frozen=True)
class RewriteEdge:
    """Provenance: rule_name turned the source sequence into the target."""

    source: str
    target: str
    rule_name: str


@dataclass
class SaturationReport:
    iterations: int
    inserted: int
    deduplicated: int
    reached_fixed_point: bool
    rule_application_counts: dict[str, int] = field(default_factory=dict)


class EPath:
    """A growing, deduplicated set of equivalent sequences."""

    def __init__(self, seed: ESequence):
        self._sequences: dict[str, ESequence] = {seed.digest: seed}
        self._edges: list[RewriteEdge] = []
        self._edge_set: set[RewriteEdge] = set()
        self.seed = seed.digest

    def __len__(self) -> int:
        return len(self._sequences)

    def __contains__(self, digest: str) -> bool:
        return digest in self._sequences

    def sequence(self, digest: str) -> ESequence:
        return self._sequences[digest]

    def digests(self) -> list[str]:
        return sorted(self._sequences)

    @property
    def edges(self) -> tuple[RewriteEdge, ...]:
        return tuple(self._edges)

    def insert(self, s: ESequence, edge: RewriteEdge) -> bool:
        """Add a sequence with its provenance edge.

        Returns True if the sequence was new, False if a structurally equal
        one was already present (the edge is still recorded if itself new).
        Existing entries are never touched.
        """
        if edge.source not in self._sequences:
            raise ValueError(f"unknown source digest {edge.source}")
        if edge.target != s.digest:
            raise ValueError("edge target does not match sequence digest")
        seed_params = self._sequences[self.seed].params
        if len(s.params) != len(seed_params):
            raise ValueError(
                f"signature mismatch: sequence takes {len(s.params)} params, "
                f"seed takes {len(seed_params)}"
            )

        existing = self._sequences.get(s.digest)
        if existing is not None:
            if existing != s:
                raise RuntimeError(
                    f"digest collision: {s.digest} names two distinct sequences"
                )
            if edge not in self._edge_set:
                self._edge_set.add(edge)
                self._edges.append(edge)
            return False

        self._sequences[s.digest] = s
        self._edge_set.add(edge)
        self._edges.append(edge)
        return True

    def variants(self) -> list[ESequence]:
        """All sequences, in ascending digest order."""
        return [self._sequences[d] for d in sorted(self._sequences)]


def new_epath(seed: ESequence) -> EPath:
    return EPath(seed)


def saturate(
    path: EPath,
    rules: list[RewriteRule],
    *,
    max_iterations: int = 64,
    max_sequences: int = 100_000,
) -> SaturationReport:
    """Apply every rule to every sequence until no new sequence appears.

    Each (sequence, rule) pair is processed exactly once; an iteration is one
    worklist pass. The final set is the rewrite closure and is independent of
    rule order. `rule_application_counts` counts produced rewrite results per
    rule, duplicates included.

    Rules are pure and sequences immutable, so applications over distinct
    sequences could run concurrently with `insert` as the only serialization
    point; this driver is single-threaded but never depends on application
    order.
    """
    if max_iterations <= 0 or max_sequences <= 0:
        raise ValueError("limits must be positive")

    processed: set[tuple[str, str]] = set()
    analyses_cache: dict[str, object] = {}
    counts = {rule.name: 0 for rule in rules}
    inserted = 0
    deduplicated = 0
    iterations = 0
    fixed_point = False

    while iterations < max_iterations:
        iterations += 1
        pending = [
            (digest, rule)
            for digest in path.digests()
            for rule in rules
            if (digest, rule.name) not in processed
        ]
        if not pending:
            fixed_point = True
            break

        new_this_pass = False
        for digest, rule in pending:
            processed.add((digest, rule.name))
            seq = path.sequence(digest)
            analyses = analyses_cache.get(digest)
            if analyses is None:
                analyses = analyses_cache[digest] = analyze(seq)
            for out in rule.apply(seq, analyses):
                counts[rule.name] += 1
                if len(path) >= max_sequences and out.digest not in path:
                    return SaturationReport(
                        iterations, inserted, deduplicated, False, counts
                    )
                if path.insert(out, RewriteEdge(digest, out.digest, rule.name)):
                    inserted += 1
                    new_this_pass = True
                else:
                    deduplicated += 1

        if not new_this_pass:
            fixed_point = True
            break

    return SaturationReport(iterations, inserted, deduplicated, fixed_point, counts)
