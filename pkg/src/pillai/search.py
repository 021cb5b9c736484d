"""Exhaustive small-range search for ``F_n - 3^m = F_{n1} - 3^{m1}``.

Both sides of ``F_n - F_{n1} = 3^m - 3^{m1}`` are reduced modulo a large
modulus; colliding residues are candidates, and every candidate is then
checked with exact integers.  The modulus only affects speed, never the
answer, because nothing is accepted without the exact check.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import DomainError, Rejected, UnclassifiedSolution
from .kfib import SolutionRecord, fib_block

Candidate = Tuple[int, int, int, int, int]  # (k, n, n1, m, m1)

# 2^a - 3^b = 2^c - 3^d with a > c >= 0, b > d >= 1, as (a, b, c, d)
CLASSICAL_PILLAI = ((3, 2, 1, 1), (5, 3, 3, 1), (8, 5, 4, 1))

# sporadic values c (one per k) with a representation using n >= k + 2
SPORADIC = {4: -25, 5: -7, 6: 5}


@dataclass(frozen=True)
class SearchConfig:
    """Inclusive index ranges and the residue modulus."""

    k_range: Tuple[int, int]
    n_range: Tuple[int, int]
    m_range: Tuple[int, int]
    modulus: int = 10 ** 20
    base: int = 3

    def __post_init__(self):
        for name in ("k_range", "n_range", "m_range"):
            lo, hi = getattr(self, name)
            if not (isinstance(lo, int) and isinstance(hi, int)):
                raise DomainError(f"{name} must hold integers")
        if self.k_range[0] < 2:
            raise DomainError("k_range must start at k >= 2")
        if self.n_range[0] < 3:
            raise DomainError("n_range must start at n >= 3")
        if self.m_range[0] < 2:
            raise DomainError("m_range must start at m >= 2")
        if self.modulus < 2:
            raise DomainError("modulus must be at least 2")
        if self.base < 2:
            raise DomainError("base must be at least 2")

    @property
    def ks(self) -> range:
        return range(self.k_range[0], self.k_range[1] + 1)

    def to_dict(self) -> dict:
        return {"k_range": list(self.k_range), "n_range": list(self.n_range),
                "m_range": list(self.m_range), "modulus": self.modulus, "base": self.base}


@lru_cache(maxsize=8)
def _power_residues(m_lo: int, m_hi: int, modulus: int, base: int) -> Dict[int, Tuple[Tuple[int, int], ...]]:
    """Residue of ``base^m - base^m1`` mapped to every ``(m, m1)`` producing it."""
    pw = [pow(base, e, modulus) for e in range(m_hi + 1)]
    table: Dict[int, List[Tuple[int, int]]] = {}
    for m in range(m_lo, m_hi + 1):
        pm = pw[m]
        for m1 in range(1, m):
            table.setdefault((pm - pw[m1]) % modulus, []).append((m, m1))
    return {r: tuple(v) for r, v in table.items()}


def _candidates_for_k(k: int, cfg: SearchConfig) -> List[Candidate]:
    n_lo, n_hi = cfg.n_range
    m_lo, m_hi = cfg.m_range
    if n_lo > n_hi or m_lo > m_hi:
        return []
    mod = cfg.modulus
    table = _power_residues(m_lo, m_hi, mod, cfg.base)
    fr = [f % mod for f in fib_block(k, 2, n_hi)]  # fr[i] is F_{i+2} mod modulus
    get = table.get
    out: List[Candidate] = []
    for n in range(n_lo, n_hi + 1):
        fn = fr[n - 2]
        for n1 in range(2, n):
            hits = get((fn - fr[n1 - 2]) % mod)
            if hits:
                out.extend((k, n, n1, m, m1) for m, m1 in hits)
    return out


def residue_search(cfg: SearchConfig, workers: int = 1) -> List[Candidate]:
    """All index tuples whose two sides agree modulo ``cfg.modulus``."""
    ks = list(cfg.ks)
    if workers > 1 and len(ks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_candidates_for_k, ks, [cfg] * len(ks)))
    else:
        parts = [_candidates_for_k(k, cfg) for k in ks]
    return sorted(c for part in parts for c in part)


def verify_candidate(k: int, n: int, n1: int, m: int, m1: int, base: int = 3) -> SolutionRecord:
    """Exact check; raises :class:`Rejected` for a residue collision that is not a solution."""
    if not (n > n1 >= 2 and m > m1 >= 1):
        raise DomainError("need n > n1 >= 2 and m > m1 >= 1")
    f = fib_block(k, n1, n)
    lhs, rhs = f[-1] - f[0], base ** m - base ** m1
    if lhs != rhs:
        raise Rejected(f"F_{n} - F_{n1} = {lhs} but {base}^{m} - {base}^{m1} = {rhs} (k={k})")
    return SolutionRecord.build(k, n, m, n1, m1, base=base)


@dataclass
class SearchResult:
    """Verified records plus collision statistics."""

    config: SearchConfig
    records: List[SolutionRecord]
    candidates: int
    rejected: int

    @property
    def collision_rate(self) -> float:
        return self.rejected / self.candidates if self.candidates else 0.0


def search(cfg: SearchConfig, workers: int = 1) -> SearchResult:
    """Residue search followed by exact verification of every candidate."""
    cands = residue_search(cfg, workers=workers)
    records, rejected = [], 0
    for c in cands:
        try:
            records.append(verify_candidate(*c, base=cfg.base))
        except Rejected:
            rejected += 1
    return SearchResult(cfg, records, len(cands), rejected)


def brute_force(cfg: SearchConfig) -> List[SolutionRecord]:
    """Exact double loop with no residues; only for tiny ranges."""
    out = []
    pw = [cfg.base ** e for e in range(cfg.m_range[1] + 1)]
    diffs: Dict[int, List[Tuple[int, int]]] = {}
    for m in range(cfg.m_range[0], cfg.m_range[1] + 1):
        for m1 in range(1, m):
            diffs.setdefault(pw[m] - pw[m1], []).append((m, m1))
    for k in cfg.ks:
        f = fib_block(k, 2, cfg.n_range[1])
        for n in range(cfg.n_range[0], cfg.n_range[1] + 1):
            for n1 in range(2, n):
                for m, m1 in diffs.get(f[n - 2] - f[n1 - 2], ()):
                    out.append(SolutionRecord.build(k, n, m, n1, m1, base=cfg.base))
    return sorted(out, key=_key)


def _key(r: SolutionRecord) -> Candidate:
    return (r.k, r.n, r.n1, r.m, r.m1)


# -- classification --------------------------------------------------------------

@dataclass(frozen=True)
class Tagged:
    record: SolutionRecord
    family: str  # "i" or "ii"
    min_k: int  # smallest k for which the identity holds in this family


@dataclass
class Classification:
    tagged: List[Tagged] = field(default_factory=list)

    def family(self, name: str) -> List[Tagged]:
        return [t for t in self.tagged if t.family == name]

    def values(self) -> Dict[str, set]:
        out: Dict[str, set] = {"i": set(), "ii": set()}
        for t in self.tagged:
            out[t.family].add((t.record.k, t.record.c))
        return out


def classify_one(rec: SolutionRecord) -> Tagged:
    k = rec.k
    if rec.base == 3 and rec.n <= k + 1:
        shape = (rec.n - 2, rec.m, rec.n1 - 2, rec.m1)
        if shape in CLASSICAL_PILLAI:
            # F_n is a power of two exactly when n <= k + 1
            return Tagged(rec, "i", rec.n - 1)
    if rec.base == 3 and rec.n >= k + 2 and SPORADIC.get(k) == rec.c:
        return Tagged(rec, "ii", k)
    raise UnclassifiedSolution(f"record outside both families: {rec.to_dict()}")


def classify_solutions(records: Iterable[SolutionRecord]) -> Classification:
    """Tag every record as family (i) or (ii); anything else raises :class:`UnclassifiedSolution`."""
    out = Classification()
    for rec in records:
        t = classify_one(rec)
        if t.family == "i" and rec.k < t.min_k:
            raise UnclassifiedSolution(f"family (i) identity below its k-range: {rec.to_dict()}")
        out.tagged.append(t)
    return out


def expected_family_i(cfg: SearchConfig) -> List[Candidate]:
    """Family (i) tuples that must appear in the given ranges."""
    out = []
    for k in cfg.ks:
        for a, b, c, d in CLASSICAL_PILLAI:
            n, n1, m, m1 = a + 2, c + 2, b, d
            if (n <= k + 1 and cfg.n_range[0] <= n <= cfg.n_range[1]
                    and cfg.m_range[0] <= m <= cfg.m_range[1]):
                out.append((k, n, n1, m, m1))
    return sorted(out)


def completeness_report(cfg: SearchConfig, records: Sequence[SolutionRecord]) -> dict:
    """Compare a search result with the two families restricted to ``cfg``.

    Family (i) is compared tuple by tuple.  Family (ii) is compared by the set
    of ``(k, c)`` values, since its partner indices come from the search itself.
    """
    found = {_key(r) for r in records}
    fam = classify_solutions(records)
    exp_i = set(expected_family_i(cfg))
    got_i = {_key(t.record) for t in fam.family("i")}
    exp_ii = {(k, c) for k, c in SPORADIC.items() if cfg.k_range[0] <= k <= cfg.k_range[1]}
    got_ii = {(t.record.k, t.record.c) for t in fam.family("ii")}
    return {
        "found": len(found),
        "missing_i": sorted(exp_i - got_i),
        "extra_i": sorted(got_i - exp_i),
        "missing_ii": sorted(exp_ii - got_ii),
        "extra_ii": sorted(got_ii - exp_ii),
        "family_ii": sorted(_key(t.record) for t in fam.family("ii")),
        "exact": exp_i == got_i and exp_ii == got_ii,
    }


def representations(records: Sequence[SolutionRecord], k: int, c: int) -> List[Tuple[int, int]]:
    """Every ``(n, m)`` with ``F_n - 3^m = c`` among the records for ``k``."""
    reps = set()
    for r in records:
        if r.k == k and r.c == c:
            reps.update({(r.n, r.m), (r.n1, r.m1)})
    return sorted(reps)


def find_record(records: Sequence[SolutionRecord], k: int, n: int, n1: int,
                m: int, m1: int) -> Optional[SolutionRecord]:
    for r in records:
        if _key(r) == (k, n, n1, m, m1):
            return r
    return None
