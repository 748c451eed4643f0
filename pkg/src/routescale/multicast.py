"""Stateful source-specific multicast: join/prune driven (S,G) state.

Joins walk the reverse shortest path from the receiver's edge router
toward the source's edge router, installing per-router (S,G) entries of
{incoming interface, outgoing interface set}.  Because next hops are a
deterministic function of (router, destination), join paths from
different receivers merge into one consistent tree.
"""

from dataclasses import dataclass, field

from .errors import NoState, NotJoined, RpfFailure

LOCAL = "local"           # iif at the source edge; oif meaning local delivery


@dataclass(frozen=True, order=True)
class SgKey:
    source_edge: int
    group: int


@dataclass
class SgEntry:
    iif: object                      # upstream neighbor RouterId, or LOCAL
    oifs: set = field(default_factory=set)   # neighbor ids and/or LOCAL

    def copy(self):
        return SgEntry(self.iif, set(self.oifs))


class SgState:
    """Per-router map SgKey -> SgEntry."""

    def __init__(self):
        self.entries = {}            # router -> {SgKey: SgEntry}

    def entry(self, router, sg):
        return self.entries.get(router, {}).get(sg)

    def _install(self, router, sg, iif):
        table = self.entries.setdefault(router, {})
        entry = table.get(sg)
        if entry is None:
            entry = SgEntry(iif)
            table[sg] = entry
        return entry

    def _delete(self, router, sg):
        table = self.entries[router]
        del table[sg]
        if not table:
            del self.entries[router]

    def count(self, router):
        return len(self.entries.get(router, {}))

    def total(self):
        return sum(len(t) for t in self.entries.values())

    def as_dict(self):
        """Plain-data view for structural equality checks."""
        return {
            router: {sg: (e.iif, frozenset(e.oifs)) for sg, e in table.items()}
            for router, table in self.entries.items()
        }


def join(state, topo, nexthops, sg, receiver_edge):
    """Graft ``receiver_edge`` onto the (S,G) tree.

    Walks from the receiver toward the source edge; stops as soon as a
    router already has the required downstream interface (the tree above
    is already in place).  Idempotent.
    """
    topo.require(receiver_edge)
    topo.require(sg.source_edge)
    cur = receiver_edge
    downstream = LOCAL
    first = True
    while True:
        if cur == sg.source_edge:
            iif = LOCAL
        elif first:
            iif = nexthops[sg.source_edge]
        else:
            iif = topo.next_hop(cur, sg.source_edge)
        entry = state._install(cur, sg, iif)
        if downstream in entry.oifs:
            return state
        entry.oifs.add(downstream)
        if iif == LOCAL:
            return state
        downstream = cur
        cur = iif
        first = False


def leave(state, topo, nexthops, sg, receiver_edge):
    """Prune ``receiver_edge`` from the (S,G) tree.

    Removes local delivery at the receiver edge and propagates the prune
    upstream as long as entries run out of outgoing interfaces.
    """
    topo.require(receiver_edge)
    entry = state.entry(receiver_edge, sg)
    if entry is None or LOCAL not in entry.oifs:
        raise NotJoined(f"{sg} has no local receiver at router {receiver_edge}")
    cur = receiver_edge
    oif = LOCAL
    while True:
        entry = state.entry(cur, sg)
        entry.oifs.discard(oif)
        if entry.oifs:
            return state
        upstream = entry.iif
        state._delete(cur, sg)
        if upstream == LOCAL:
            return state
        oif = cur
        cur = upstream


def forward_multicast(state, sg, at, arrived_from):
    """Replicate at one router: returns the set of outgoing interfaces.

    ``arrived_from`` must equal the entry's incoming interface (RPF
    check); LOCAL means the packet was injected by the source.
    """
    entry = state.entry(at, sg)
    if entry is None:
        raise NoState(f"router {at} has no state for {sg}")
    if arrived_from != entry.iif:
        raise RpfFailure(
            f"router {at}: {sg} arrived from {arrived_from}, expected {entry.iif}"
        )
    return set(entry.oifs)


def sg_state_count(state, router):
    return state.count(router)


def simulate_delivery(state, sg):
    """Edge routers receiving a local copy when the source injects one packet."""
    delivered = []
    if state.entry(sg.source_edge, sg) is None:
        return delivered
    stack = [(sg.source_edge, LOCAL)]
    while stack:
        at, arrived_from = stack.pop()
        for oif in sorted(forward_multicast(state, sg, at, arrived_from), key=str):
            if oif == LOCAL:
                delivered.append(at)
            else:
                stack.append((oif, at))
    return delivered


def rebuild_from_membership(topo, groups, membership):
    """From-scratch state for the given membership (order-independence oracle).

    ``groups`` maps group id -> source edge; ``membership`` maps group id
    -> iterable of receiver edge routers.
    """
    from .topology import shortest_paths

    state = SgState()
    for group in sorted(groups):
        sg = SgKey(groups[group], group)
        for receiver in sorted(membership.get(group, ())):
            join(state, topo, shortest_paths(topo, receiver), sg, receiver)
    return state
