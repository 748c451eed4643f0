"""Deterministic workload generator: end-site growth and group churn.

A schedule is an ordered list of integer-tick events.  Generation is
fully determined by (seed, params, topology); the RNG algorithm name is
recorded in the schedule so exported fixtures are self-describing.
Schedules round-trip through a line-oriented text format
(``tick kind args...``) for regression fixtures.
"""

import random
from dataclasses import dataclass

from .errors import InvalidParams

ADD_SITE = "add_site"          # args: site_id, edge_router
ADD_GROUP = "add_group"        # args: group, source_edge
JOIN = "join"                  # args: group, receiver_edge
LEAVE = "leave"                # args: group, receiver_edge
REMOVE_GROUP = "remove_group"  # args: group

KINDS = (ADD_SITE, ADD_GROUP, JOIN, LEAVE, REMOVE_GROUP)

RNG_ALGORITHM = "python-random-mt19937"


@dataclass(frozen=True)
class Event:
    tick: int
    kind: str
    args: tuple


@dataclass(frozen=True)
class Params:
    seed: int = 0
    n_sites: int = 0
    n_groups: int = 0
    members_min: int = 1
    members_max: int = 1
    churn_events: int = 0

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise InvalidParams(f"unknown workload params: {sorted(extra)}")
        return cls(**d)


@dataclass
class Schedule:
    params: Params
    events: list
    rng_algorithm: str = RNG_ALGORITHM

    def to_text(self):
        lines = [f"# rng {self.rng_algorithm}"]
        for ev in self.events:
            lines.append(" ".join([str(ev.tick), ev.kind, *map(str, ev.args)]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, params=None):
        events = []
        rng_name = RNG_ALGORITHM
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# rng "):
                    rng_name = line[len("# rng "):]
                continue
            tick, kind, *args = line.split()
            if kind not in KINDS:
                raise InvalidParams(f"unknown event kind {kind!r}")
            events.append(Event(int(tick), kind, tuple(int(a) for a in args)))
        return cls(params or Params(), events, rng_name)


def generate(topo, params):
    """Deterministic schedule: site growth, group setup, then churn.

    Sources and receivers are drawn uniformly from the edge routers.
    Every Leave matches a live Join by construction.
    """
    edges = topo.edge_routers
    if params.n_groups > 0:
        if not 1 <= params.members_min <= params.members_max:
            raise InvalidParams("need 1 <= members_min <= members_max")
        if params.members_max > len(edges):
            raise InvalidParams(
                f"members_max {params.members_max} exceeds {len(edges)} edge routers"
            )
    if min(params.n_sites, params.n_groups, params.churn_events) < 0:
        raise InvalidParams("counts must be non-negative")

    rng = random.Random(params.seed)
    events = []
    tick = 0

    for site_id in range(params.n_sites):
        events.append(Event(tick, ADD_SITE, (site_id, rng.choice(edges))))
        tick += 1

    membership = {}     # group -> set of receiver edges
    for group in range(params.n_groups):
        events.append(Event(tick, ADD_GROUP, (group, rng.choice(edges))))
        tick += 1
        membership[group] = set()
        for receiver in rng.sample(edges, rng.randint(params.members_min, params.members_max)):
            events.append(Event(tick, JOIN, (group, receiver)))
            tick += 1
            membership[group].add(receiver)

    for _ in range(params.churn_events):
        joinable = sorted(g for g, m in membership.items() if len(m) < len(edges))
        leavable = sorted(g for g, m in membership.items() if m)
        choices = (["join"] if joinable else []) + (["leave"] if leavable else [])
        if not choices:
            break
        if rng.choice(choices) == "join":
            group = rng.choice(joinable)
            receiver = rng.choice(sorted(set(edges) - membership[group]))
            events.append(Event(tick, JOIN, (group, receiver)))
            membership[group].add(receiver)
        else:
            group = rng.choice(leavable)
            receiver = rng.choice(sorted(membership[group]))
            events.append(Event(tick, LEAVE, (group, receiver)))
            membership[group].remove(receiver)
        tick += 1

    return Schedule(params, events)
