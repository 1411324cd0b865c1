import sys
from pathlib import Path

from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from metabel.abelian import make_group  # noqa: E402
from metabel.embeddings import make_embedding  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def small_groups(draw, max_log2=10):
    """Groups with |B| <= 2^max_log2."""
    p = draw(st.sampled_from([2, 3]))
    budget = max_log2 if p == 2 else int(max_log2 / 1.585)
    exps = []
    while budget > 0 and len(exps) < 4:
        e = draw(st.integers(1, min(4, budget)))
        exps.append(e)
        budget -= e
        if draw(st.booleans()):
            break
    return make_group(p, exps)


@st.composite
def small_embeddings(draw, max_log2=10):
    B = draw(small_groups(max_log2))
    ngens = draw(st.integers(0, 3))
    gens = [B.element([draw(st.integers(0, m - 1)) for m in B.mods]) for _ in range(ngens)]
    return make_embedding(B, gens)
