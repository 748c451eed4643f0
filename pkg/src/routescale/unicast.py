"""Unicast forwarding planes: flat prefix lookup, map-and-encap, MPLS.

All three modes share one provider/end-site address model over a 32-bit
prefix space.  End sites carry provider-independent identifier prefixes
(top bit set); providers carry aggregatable locator prefixes (top bit
clear), so the two namespaces never overlap.

Map-and-encap egress granularity is the destination site's attached edge
router.  To keep the core routable with exactly one FIB entry per
provider aggregate, each provider owns at most one edge router, whose
locator is the provider's own prefix.

Every prefix table counts its lookups, so the harness can assert the
MPLS zero-lookup rule at transit routers.
"""

from dataclasses import dataclass, replace

from .errors import (
    NoLabelBinding,
    NoMapping,
    NoRoute,
    UnattachedSite,
    UnknownRouter,
)
from .topology import EDGE

IDENTIFIER_BASE = 0x8000_0000     # identifier space: 128.0.0.0/1
SITE_PREFIX_LEN = 24
PROVIDER_PREFIX_LEN = 8
FIRST_LABEL = 16

LOCAL_DELIVER = "local"


@dataclass(frozen=True, order=True)
class Prefix:
    """Bit pattern of ``length`` leading bits in a 32-bit space."""

    value: int
    length: int

    def __post_init__(self):
        if not 0 <= self.length <= 32:
            raise ValueError(f"prefix length {self.length} out of range")
        mask = self.mask()
        if self.value & ~mask & 0xFFFF_FFFF:
            raise ValueError("prefix has bits set beyond its length")

    def mask(self):
        return ((1 << self.length) - 1) << (32 - self.length) if self.length else 0

    def contains(self, addr):
        return (addr & self.mask()) == self.value

    def __str__(self):
        return f"{self.value:#010x}/{self.length}"


def site_prefix(site_id):
    """Deterministic /24 identifier prefix for a site id."""
    if not 0 <= site_id < (1 << 23):
        raise ValueError(f"site id {site_id} out of range")
    return Prefix(IDENTIFIER_BASE | (site_id << 8), SITE_PREFIX_LEN)


def provider_prefix(provider_id):
    """Deterministic /8 locator prefix for a provider id."""
    if not 0 <= provider_id < 128:
        raise ValueError(f"provider id {provider_id} out of range")
    return Prefix(provider_id << 24, PROVIDER_PREFIX_LEN)


def host_address(prefix):
    """A concrete destination address inside ``prefix``."""
    return prefix.value | 1


@dataclass(frozen=True)
class EndSite:
    site_id: int
    identifier_prefix: Prefix
    attached_edge: int


def make_site(site_id, attached_edge):
    return EndSite(site_id, site_prefix(site_id), attached_edge)


@dataclass(frozen=True)
class Provider:
    provider_id: int
    locator_prefix: Prefix
    owned_routers: frozenset


@dataclass(frozen=True)
class Packet:
    """Inner destination plus optional outer locator header or MPLS label."""

    dst: int
    outer: int = None
    label: int = None


@dataclass(frozen=True)
class Deliver:
    site_id: int


@dataclass(frozen=True)
class Send:
    next_hop: int
    packet: Packet


class PrefixTable:
    """Longest-prefix-match table (binary trie) with a lookup counter."""

    __slots__ = ("_root", "_count", "lookups")

    def __init__(self):
        self._root = [None, None, None]   # [zero-child, one-child, action]
        self._count = 0
        self.lookups = 0

    def __len__(self):
        return self._count

    def add(self, prefix, action):
        node = self._root
        for i in range(prefix.length):
            bit = (prefix.value >> (31 - i)) & 1
            if node[bit] is None:
                node[bit] = [None, None, None]
            node = node[bit]
        if node[2] is not None:
            raise ValueError(f"duplicate prefix {prefix}")
        node[2] = action
        self._count += 1

    def remove(self, prefix):
        node = self._root
        for i in range(prefix.length):
            bit = (prefix.value >> (31 - i)) & 1
            node = node[bit]
            if node is None:
                raise KeyError(str(prefix))
        if node[2] is None:
            raise KeyError(str(prefix))
        node[2] = None
        self._count -= 1

    def lookup(self, addr):
        """Longest matching action for ``addr``; raises NoRoute on miss."""
        self.lookups += 1
        node = self._root
        best = node[2]
        for i in range(32):
            node = node[(addr >> (31 - i)) & 1]
            if node is None:
                break
            if node[2] is not None:
                best = node[2]
        if best is None:
            raise NoRoute(f"no matching prefix for {addr:#010x}")
        return best


class Fib:
    """Per-router prefix tables with per-router lookup counters."""

    def __init__(self, routers):
        self.tables = {r: PrefixTable() for r in routers}

    def add(self, router, prefix, action):
        self.tables[router].add(prefix, action)

    def lookup(self, router, addr):
        return self.tables[router].lookup(addr)

    def size(self, router):
        return len(self.tables[router])

    def lookups(self, router):
        return self.tables[router].lookups

    def reset_counters(self):
        for t in self.tables.values():
            t.lookups = 0


class LabelTables:
    """Per-router incoming-label map plus per-ingress FEC bindings."""

    def __init__(self, routers):
        # in-label -> ("swap", out_label, next_hop) | ("pop", None, None)
        self.ilm = {r: {} for r in routers}
        # ingress -> {egress (FEC): (push_label or None, next_hop or None)}
        self.fec = {r: {} for r in routers}
        self._next_label = {r: FIRST_LABEL for r in routers}

    def alloc_label(self, router):
        label = self._next_label[router]
        self._next_label[router] = label + 1
        return label

    def entries(self, router):
        return len(self.ilm[router]) + len(self.fec[router])


def establish_lsp(topo, labels, ingress, egress):
    """Set up a label-switched path from ``ingress`` to ``egress``.

    Allocates fresh in-labels hop by hop along the deterministic shortest
    path; transit routers swap, the egress pops.  Idempotent per
    (ingress, egress) pair.
    """
    topo.require(ingress)
    topo.require(egress)
    if egress in labels.fec[ingress]:
        return
    if ingress == egress:
        labels.fec[ingress][egress] = (None, None)
        return
    path = [ingress]
    cur = ingress
    while cur != egress:
        cur = topo.next_hop(cur, egress)
        path.append(cur)
    in_labels = [labels.alloc_label(r) for r in path[1:]]
    labels.fec[ingress][egress] = (in_labels[0], path[1])
    for i, router in enumerate(path[1:-1], start=0):
        labels.ilm[router][in_labels[i]] = ("swap", in_labels[i + 1], path[i + 2])
    labels.ilm[egress][in_labels[-1]] = ("pop", None, None)


class UnicastPlane:
    """All per-router unicast state for the three modes, kept in sync.

    Sites are added incrementally (one entry per router for the flat FIB,
    one mapping/FEC binding per edge router), so workload replay with
    thousands of sites stays linear.
    """

    def __init__(self, topo, providers):
        self.topo = topo
        self.providers = {}
        self.sites = {}
        owner = {}
        for p in providers:
            if p.provider_id in self.providers:
                raise ValueError(f"duplicate provider id {p.provider_id}")
            edges = [r for r in p.owned_routers if topo.roles.get(r) == EDGE]
            if len(edges) > 1:
                raise ValueError(
                    f"provider {p.provider_id} owns {len(edges)} edge routers; "
                    "at most one is supported (locator aggregates must follow topology)"
                )
            for r in p.owned_routers:
                topo.require(r)
                if r in owner:
                    raise ValueError(f"router {r} owned by two providers")
                owner[r] = p.provider_id
            self.providers[p.provider_id] = p
        if set(owner) != set(topo.roles):
            missing = sorted(set(topo.roles) - set(owner))
            raise ValueError(f"routers without a provider: {missing}")
        self.router_provider = owner

        # anchor: the provider's edge router if it has one, else its
        # lowest-id owned router; locator traffic terminates there
        self.anchor = {}
        self.edge_provider = {}
        for pid, p in self.providers.items():
            edges = [r for r in p.owned_routers if topo.roles[r] == EDGE]
            self.anchor[pid] = edges[0] if edges else min(p.owned_routers)
            if edges:
                self.edge_provider[edges[0]] = pid

        routers = list(topo.roles)
        self.flat_fib = Fib(routers)
        self.encap_fib = Fib(routers)
        self.mapping = {}                 # identifier Prefix -> locator Prefix
        self._mapping_lut = PrefixTable()  # replicated at every edge router
        self.fec_fib = Fib(routers)       # identifier prefix -> egress router, edges only
        self.labels = LabelTables(routers)
        self._local_sites = {r: [] for r in routers}

        for pid in sorted(self.providers):
            locator = self.providers[pid].locator_prefix
            anchor = self.anchor[pid]
            for r in routers:
                action = (LOCAL_DELIVER,) if r == anchor else ("send", topo.next_hop(r, anchor))
                self.flat_fib.add(r, locator, action)
                self.encap_fib.add(r, locator, action)

        for ingress in topo.edge_routers:
            for egress in topo.edge_routers:
                establish_lsp(topo, self.labels, ingress, egress)

    # -- site management ----------------------------------------------------

    def add_site(self, site):
        if self.topo.roles.get(site.attached_edge) != EDGE:
            raise UnattachedSite(
                f"site {site.site_id} attached to non-edge router {site.attached_edge}"
            )
        if site.site_id in self.sites:
            raise ValueError(f"duplicate site id {site.site_id}")
        self.sites[site.site_id] = site
        self._local_sites[site.attached_edge].append(site)

        for r in self.topo.roles:
            if r == site.attached_edge:
                action = (LOCAL_DELIVER,)
            else:
                action = ("send", self.topo.next_hop(r, site.attached_edge))
            self.flat_fib.add(r, site.identifier_prefix, action)

        pid = self.edge_provider.get(site.attached_edge)
        if pid is None:
            raise UnattachedSite(
                f"edge router {site.attached_edge} has no owning provider"
            )
        locator = self.providers[pid].locator_prefix
        self.mapping[site.identifier_prefix] = locator
        self._mapping_lut.add(site.identifier_prefix, locator)

        for edge in self.topo.edge_routers:
            self.fec_fib.add(edge, site.identifier_prefix, ("egress", site.attached_edge))

    def remove_site(self, site_id):
        site = self.sites.pop(site_id)
        self._local_sites[site.attached_edge].remove(site)
        for r in self.topo.roles:
            self.flat_fib.tables[r].remove(site.identifier_prefix)
        del self.mapping[site.identifier_prefix]
        self._mapping_lut.remove(site.identifier_prefix)
        for edge in self.topo.edge_routers:
            self.fec_fib.tables[edge].remove(site.identifier_prefix)

    def _local_site(self, router, addr):
        for site in self._local_sites[router]:
            if site.identifier_prefix.contains(addr):
                return site
        return None

    # -- state counts -------------------------------------------------------

    def flat_fib_size(self, router):
        return self.flat_fib.size(router)

    def encap_fib_size(self, router):
        return self.encap_fib.size(router)

    def mapping_entries(self, router):
        return len(self.mapping) if self.topo.roles[router] == EDGE else 0

    def label_entries(self, router):
        return self.labels.entries(router)

    def lookup_counts(self, mode):
        fib = {"flat": self.flat_fib, "mapencap": self.encap_fib, "mpls": self.fec_fib}[mode]
        return {r: fib.lookups(r) for r in self.topo.roles}

    # -- forwarding ---------------------------------------------------------

    def forward(self, mode, packet, at):
        if at not in self.topo.roles:
            raise UnknownRouter(f"router {at} not in topology")
        if mode == "flat":
            return self._forward_flat(packet, at)
        if mode == "mapencap":
            return self._forward_mapencap(packet, at)
        if mode == "mpls":
            return self._forward_mpls(packet, at)
        raise ValueError(f"unknown unicast mode {mode!r}")

    def _forward_flat(self, packet, at):
        action = self.flat_fib.lookup(at, packet.dst)
        if action[0] == LOCAL_DELIVER:
            site = self._local_site(at, packet.dst)
            if site is None:
                raise NoRoute(f"{packet.dst:#010x} not attached at router {at}")
            return Deliver(site.site_id)
        return Send(action[1], packet)

    def _forward_mapencap(self, packet, at):
        if packet.outer is None:
            site = self._local_site(at, packet.dst)
            if site is not None:
                return Deliver(site.site_id)
            if self.topo.roles[at] != EDGE:
                raise NoMapping(f"router {at} is not an ingress edge")
            locator = self._mapping_lut.lookup(packet.dst)
            outer = host_address(locator)
            action = self.encap_fib.lookup(at, outer)
            if action[0] == LOCAL_DELIVER:
                # ingress is also the egress anchor but the site is remote
                raise NoRoute(f"{packet.dst:#010x} unreachable via {locator}")
            return Send(action[1], replace(packet, outer=outer))
        action = self.encap_fib.lookup(at, packet.outer)
        if action[0] == LOCAL_DELIVER:
            site = self._local_site(at, packet.dst)
            if site is None:
                raise NoRoute(f"{packet.dst:#010x} not attached at egress {at}")
            return Deliver(site.site_id)
        return Send(action[1], packet)

    def _forward_mpls(self, packet, at):
        if packet.label is None:
            site = self._local_site(at, packet.dst)
            if site is not None:
                return Deliver(site.site_id)
            if self.topo.roles[at] != EDGE:
                raise NoLabelBinding(f"router {at} is not an MPLS ingress")
            action = self.fec_fib.lookup(at, packet.dst)
            egress = action[1]
            push, next_hop = self.labels.fec[at][egress]
            return Send(next_hop, replace(packet, label=push))
        entry = self.labels.ilm[at].get(packet.label)
        if entry is None:
            raise NoLabelBinding(f"router {at} has no binding for label {packet.label}")
        op, out_label, next_hop = entry
        if op == "swap":
            return Send(next_hop, replace(packet, label=out_label))
        site = self._local_site(at, packet.dst)
        if site is None:
            raise NoRoute(f"{packet.dst:#010x} not attached at LSP egress {at}")
        return Deliver(site.site_id)

    def deliver(self, mode, src, dst_addr):
        """Forward hop by hop until delivery; returns (site_id, router path)."""
        packet = Packet(dst_addr)
        at = src
        path = [src]
        for _ in range(len(self.topo) + 2):
            decision = self.forward(mode, packet, at)
            if isinstance(decision, Deliver):
                return decision.site_id, path
            at = decision.next_hop
            packet = decision.packet
            path.append(at)
        raise NoRoute(f"packet to {dst_addr:#010x} looped in mode {mode}")


def build_flat_fib(topo, sites, providers):
    """Flat-FIB construction: one entry per site prefix plus per locator."""
    plane = UnicastPlane(topo, providers)
    for site in sites:
        plane.add_site(site)
    return plane.flat_fib


def build_mapencap_tables(topo, sites, providers):
    """Map-and-encap tables: locator-only FIB plus edge mapping table."""
    plane = UnicastPlane(topo, providers)
    for site in sites:
        plane.add_site(site)
    return plane.encap_fib, dict(plane.mapping)
