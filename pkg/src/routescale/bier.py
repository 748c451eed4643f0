"""BIER data plane: BFR-id assignment, BIFT construction, bitstring forwarding.

Every edge router is both an ingress (BFIR) and an egress (BFER); core
routers are pure transit BFRs.  The per-router BIFT is derived solely
from the topology and the BFER placement: entry (SI, bit) -> (next hop,
F-BM), where the F-BM is the OR of all same-SI bits routed via that next
hop.  Forwarding partitions a packet's bitstring by next hop, so each
BFER receives exactly one copy regardless of how many groups are active.
"""

from dataclasses import dataclass

from .errors import MissingBiftEntry, NoEdgeRouters, UnknownGroup

LOCAL = "local"

DEFAULT_BSL = 256


@dataclass(frozen=True)
class BierHeader:
    si: int
    bits: int        # bit k of the bitstring is integer bit (k-1)


def bit_mask(position):
    """Integer mask for 1-based bitstring position ``position``."""
    return 1 << (position - 1)


def bit_positions(bits):
    """Ascending 1-based positions set in ``bits``."""
    out = []
    pos = 1
    while bits:
        if bits & 1:
            out.append(pos)
        bits >>= 1
        pos += 1
    return out


def assign_bfr_ids(edge_routers):
    """Dense BFR-ids 1..N in ascending router-id order."""
    edges = sorted(edge_routers)
    if not edges:
        raise NoEdgeRouters("BIER domain needs at least one edge router")
    return {router: i for i, router in enumerate(edges, start=1)}


def id_to_si_bit(bfr_id, bsl):
    """Set Identifier and 1-based bit position for a BFR-id."""
    si, bit = divmod(bfr_id - 1, bsl)
    return si, bit + 1


class Bift:
    """Per-router (SI, bit) -> (next hop or LOCAL, F-BM)."""

    def __init__(self, bsl):
        self.bsl = bsl
        self.entries = {}     # router -> {(si, bit): (next_hop, fbm)}

    def entry(self, router, si, bit):
        return self.entries.get(router, {}).get((si, bit))

    def size(self, router):
        return len(self.entries.get(router, {}))


def build_bift(topo, bfr_ids, bsl):
    """Build every router's BIFT from the unicast shortest-path topology.

    A pure function of (topology, BFER set, BSL): group churn never
    touches it.
    """
    bift = Bift(bsl)
    placements = {}    # bfer router -> (si, bit)
    for bfer, bfr_id in bfr_ids.items():
        topo.require(bfer)
        placements[bfer] = id_to_si_bit(bfr_id, bsl)
    for router in topo.roles:
        # group same-SI bits by next hop to form the F-BMs
        groups = {}    # (si, next_hop) -> fbm
        hop_of = {}    # (si, bit) -> next_hop
        for bfer, (si, bit) in placements.items():
            nh = LOCAL if router == bfer else topo.next_hop(router, bfer)
            hop_of[(si, bit)] = nh
            groups[(si, nh)] = groups.get((si, nh), 0) | bit_mask(bit)
        bift.entries[router] = {
            (si, bit): (nh, groups[(si, nh)]) for (si, bit), nh in hop_of.items()
        }
    return bift


def encapsulate_bier(overlay, group, bsl):
    """BFIR encapsulation: one header per Set Identifier in use.

    ``overlay`` maps group id -> set of (si, bit) egress positions.
    """
    if group not in overlay:
        raise UnknownGroup(f"group {group} not in overlay table")
    per_si = {}
    for si, bit in overlay[group]:
        per_si[si] = per_si.get(si, 0) | bit_mask(bit)
    return [BierHeader(si, per_si[si]) for si in sorted(per_si)]


def forward_bier(bift, header, at):
    """Partition a bitstring by next hop and emit one filtered copy each.

    Iterates set bits low-to-high over a working copy, ANDs each emitted
    copy with the entry's F-BM, and clears the F-BM from the working
    copy, so no two copies share a bit and their OR equals the input.
    """
    copies = []
    working = header.bits
    bit = 1
    while working:
        if working & bit_mask(bit):
            entry = bift.entry(at, header.si, bit)
            if entry is None:
                raise MissingBiftEntry(
                    f"router {at}: no BIFT entry for SI {header.si} bit {bit}"
                )
            next_hop, fbm = entry
            copies.append((next_hop, BierHeader(header.si, working & fbm)))
            working &= ~fbm
        bit += 1
    return copies


def bift_size(bift, router):
    return bift.size(router)


def flood_deliver(bift, header, at):
    """Recursively forward until every copy terminates; list of (BFER, bit).

    The returned list is a multiset: the exactly-one-copy property means
    it has one element per set bit of the injected header.
    """
    delivered = []
    stack = [(at, header)]
    while stack:
        router, h = stack.pop()
        for next_hop, copy in forward_bier(bift, h, router):
            if next_hop == LOCAL:
                for bit in bit_positions(copy.bits):
                    delivered.append((router, bit))
            else:
                stack.append((next_hop, copy))
    return delivered


def format_trace(router, copies):
    """Debug trace line: ``router -> [(nexthop, bitstring-hex)]``."""
    parts = ", ".join(
        f"({nh}, {copy.bits:#04x})" for nh, copy in copies
    )
    return f"{router} -> [{parts}]"
