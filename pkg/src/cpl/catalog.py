"""Small named networks used by the tests, the acceptance suite and the scripts."""
from typing import Dict

from .network import LiftedNetwork, build

# threshold in the aggregated guard of EXISTS_THRESHOLD; smaller round values such as
# 1/3 or 2/5 are 2-critical for the R/2 coin and would be refused
GUARD_THRESHOLD = "13/37"

# NET-PQ comparison threshold below 3/4; 5/8 is a critical difference, 6/11 is not
PQ_THRESHOLD = "6/11"


def coin() -> LiftedNetwork:
    return build([("P", 1, [], [("true", "1/2")])])


def pq() -> LiftedNetwork:
    return build([
        ("P", 1, [], [("true", "1/2")]),
        ("Q", 1, ["P"], [("P(x1)", "3/4"), ("~P(x1)", "1/4")]),
    ])


def graph() -> LiftedNetwork:
    return build([("R", 2, [], [("true", "1/2")])])


def sure() -> LiftedNetwork:
    return build([("P", 1, [], [("true", "1")])])


def exists_guard() -> LiftedNetwork:
    g = "exists y : R(x1,y)"
    return build([
        ("R", 2, [], [("true", "1/2")]),
        ("Q", 1, ["R"], [(g, "3/4"), (f"~{g}", "1/4")]),
    ])


def threshold_guard() -> LiftedNetwork:
    g = f"[ ||R(x1,y) : y=y||{{y}} >= {GUARD_THRESHOLD} ]"
    return build([
        ("R", 2, [], [("true", "1/2")]),
        ("Q", 1, ["R"], [(g, "3/4"), (f"~{g}", "1/4")]),
    ])


def chain() -> LiftedNetwork:
    return build([
        ("A", 1, [], [("true", "1/2")]),
        ("B", 1, ["A"], [("A(x1)", "2/3"), ("~A(x1)", "1/3")]),
        ("C", 1, ["B"], [("B(x1)", "3/5"), ("~B(x1)", "1/5")]),
    ])


def friends() -> LiftedNetwork:
    """Mathematicians, and friendship that is likelier between two of them."""
    return build([
        ("M", 1, [], [("true", "1/5")]),
        ("F", 2, ["M"], [("M(x1) & M(x2)", "1/2"), ("~(M(x1) & M(x2))", "1/10")]),
    ])


CATALOG: Dict[str, callable] = {
    "netcoin": coin,
    "netpq": pq,
    "netgraph": graph,
    "netsure": sure,
    "netexists": exists_guard,
    "netthreshold": threshold_guard,
    "netchain": chain,
    "netfriends": friends,
}


def get(name: str) -> LiftedNetwork:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown network {name!r}; known: {', '.join(sorted(CATALOG))}") from None
