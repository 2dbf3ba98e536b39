import hypothesis.strategies as st

from fdrkit.identification import GallerySet, IdentificationTrial
from fdrkit.scores import ScoreSet

LABELS = ("a", "b", "c", "d")
# Coarse score grid so ties are common.
SCORES = st.integers(-20, 20).map(lambda i: i / 4)


@st.composite
def score_sets(draw, max_records=60, max_demos=4, min_demos=1):
    k = draw(st.integers(min_demos, max_demos))
    labels = LABELS[:k]
    rows = draw(st.lists(
        st.tuples(st.sampled_from(labels), st.sampled_from(labels), SCORES, st.booleans()),
        min_size=1, max_size=max_records,
    ))
    rows = [(e, e if g else p, s, g) for e, p, s, g in rows]
    e, p, s, g = zip(*rows)
    return ScoreSet.from_arrays(e, p, s, g)


@st.composite
def fair_testable(draw, max_records=60):
    """Score sets with every demographic having homogeneous impostors and genuines."""
    s = draw(score_sets(max_records=max_records, min_demos=2))
    extra = []
    for label in s.labels:
        extra.append((label, label, draw(SCORES), False))
        extra.append((label, label, draw(SCORES), True))
    rows = [(r.enroll_demo, r.probe_demo, r.score, r.genuine) for r in s] + extra
    e, p, sc, g = zip(*rows)
    return ScoreSet.from_arrays(e, p, sc, g)


@st.composite
def galleries(draw, max_ids=10, max_probes=12):
    ids = [f"g{i}" for i in range(draw(st.integers(1, max_ids)))]
    trials = []
    for i in range(draw(st.integers(1, max_probes))):
        scores = {g: draw(SCORES) for g in ids}
        mated = draw(st.booleans())
        mate = draw(st.sampled_from(ids)) if mated else None
        trials.append(IdentificationTrial(f"p{i}", draw(st.sampled_from(LABELS[:2])), mated, mate, scores))
    return GallerySet(tuple(trials))
