from pathlib import Path

from hypothesis import strategies as st

from strongcore.experiments import KINDS, GeneratorSpec, generate, random_instance
from strongcore.market import Allocation, parse_instance

DATA = Path(__file__).parent / "data"


def load(name: str):
    return parse_instance((DATA / f"{name}.json").read_text())


@st.composite
def markets(draw, max_n=6, kinds=KINDS):
    n = draw(st.integers(1, max_n))
    kind = draw(st.sampled_from(kinds))
    density = draw(st.floats(0.2, 1.0))
    seed = draw(st.integers(0, 2**32))
    return generate(GeneratorSpec(kind, n, density=density, seed=seed))


@st.composite
def instances(draw, max_n=6, max_forced=0):
    return random_instance(draw(st.integers(0, 2**32)), max_n=max_n, max_forced=max_forced)


def names(market, arcs):
    return {(market.names[a], market.names[b]) for a, b in arcs}


def named_allocation(market, mapping):
    return Allocation(tuple(market.index(mapping[x]) for x in market.names))
