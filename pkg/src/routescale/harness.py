"""Experiment runner: scenario loading, schedule replay, CSV emission.

A scenario bundles a topology, providers, workload parameters, the set
of forwarding modes to run, the BIER bitstring length, and a snapshot
interval.  Replaying the schedule records per-router state counts and,
at every snapshot, injects one probe packet per active group per
multicast mode, comparing delivered receiver sets against the membership
ground truth.  Any mismatch aborts the run so scaling numbers are never
reported from an incorrect forwarding plane.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import bier, multicast, workload
from .errors import DeliveryMismatch, ScenarioError, SimError
from .generators import gen_topology
from .multicast import SgKey, SgState
from .topology import EDGE, build_topology
from .unicast import Provider, UnicastPlane, make_site, provider_prefix

MODES = ("flat", "mapencap", "mpls", "stateful_mcast", "bier")
UNICAST_MODES = ("flat", "mapencap", "mpls")

STATE_HEADER = "tick,router,role,fib,mapping,labels,sg,bift"
DELIVERY_HEADER = "tick,group,mode,ok,delivered,expected"


@dataclass
class Scenario:
    topology: object
    providers: list
    workload: workload.Params
    modes: tuple = MODES
    bsl: int = bier.DEFAULT_BSL
    snapshot_interval: int = 10
    fault: str = None


@dataclass
class StateSnapshot:
    tick: int
    # rows: (router, role, fib, mapping, labels, sg, bift), sorted by router
    rows: list = field(default_factory=list)


@dataclass(frozen=True)
class DeliveryRow:
    tick: int
    group: int
    mode: str
    ok: bool
    delivered: frozenset
    expected: frozenset


def auto_providers(topo):
    """One provider per edge router; core routers join their nearest edge.

    Ties break on the smaller edge router id, so assignment is
    deterministic.
    """
    edges = topo.edge_routers
    pid_of_edge = {e: i for i, e in enumerate(edges)}
    owned = {i: {e} for i, e in enumerate(edges)}
    for router in topo.roles:
        if router in pid_of_edge:
            continue
        dist = topo.distances(router)
        nearest = min(edges, key=lambda e: (dist[e], e))
        owned[pid_of_edge[nearest]].add(router)
    return [
        Provider(pid, provider_prefix(pid), frozenset(routers))
        for pid, routers in sorted(owned.items())
    ]


def _build_topology_section(section, base_dir):
    if "file" in section:
        path = Path(base_dir or ".") / section["file"]
        section = json.loads(path.read_text())
        if "topology" in section:
            section = section["topology"]
    if "kind" in section:
        section = gen_topology(section["kind"], int(section["size"]))
    try:
        return build_topology(section["routers"], section["links"])
    except KeyError as exc:
        raise ScenarioError(f"topology section missing key {exc}") from None


def build_scenario(config, base_dir=None):
    """Validate a scenario dict (parsed JSON) into a Scenario."""
    known = {"topology", "providers", "workload", "modes", "bsl",
             "snapshot_interval", "fault"}
    extra = set(config) - known
    if extra:
        raise ScenarioError(f"unknown scenario keys: {sorted(extra)}")
    if "topology" not in config:
        raise ScenarioError("scenario needs a topology section")
    topo = _build_topology_section(config["topology"], base_dir)

    providers_cfg = config.get("providers", "auto")
    if providers_cfg == "auto":
        providers = auto_providers(topo)
    else:
        providers = [
            Provider(int(p["id"]), provider_prefix(int(p["id"])),
                     frozenset(int(r) for r in p["routers"]))
            for p in providers_cfg
        ]

    modes = tuple(config.get("modes", MODES))
    for m in modes:
        if m not in MODES:
            raise ScenarioError(f"unknown mode {m!r} (choose from {MODES})")

    params = workload.Params.from_dict(config.get("workload", {}))
    bsl = int(config.get("bsl", bier.DEFAULT_BSL))
    if bsl < 1:
        raise ScenarioError(f"bsl must be >= 1, got {bsl}")
    interval = int(config.get("snapshot_interval", 10))
    if interval < 1:
        raise ScenarioError(f"snapshot_interval must be >= 1, got {interval}")

    scenario = Scenario(topo, providers, params, modes, bsl,
                        int(config.get("snapshot_interval", 10)),
                        config.get("fault"))
    # fail early on inconsistent provider/site wiring
    if any(m in UNICAST_MODES for m in modes):
        try:
            UnicastPlane(topo, providers)
        except (ValueError, SimError) as exc:
            raise ScenarioError(f"invalid providers: {exc}") from None
    # workload feasibility
    if params.n_groups > 0 and params.members_max > len(topo.edge_routers):
        raise ScenarioError("members_max exceeds number of edge routers")
    return scenario


def load_scenario(path):
    path = Path(path)
    try:
        config = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return build_scenario(config, base_dir=path.parent)


class SimState:
    """Mutable system state a schedule is replayed against."""

    def __init__(self, scenario):
        self.scenario = scenario
        topo = scenario.topology
        self.topo = topo
        self.modes = scenario.modes
        self.unicast = (
            UnicastPlane(topo, scenario.providers)
            if any(m in UNICAST_MODES for m in scenario.modes) else None
        )
        self.sg_state = SgState() if "stateful_mcast" in scenario.modes else None
        self.groups = {}        # group -> source edge
        self.membership = {}    # group -> set of receiver edges
        if "bier" in scenario.modes:
            self.bfr_ids = bier.assign_bfr_ids(topo.edge_routers)
            self.bit_of = {r: bier.id_to_si_bit(i, scenario.bsl)
                           for r, i in self.bfr_ids.items()}
            self.router_of_bit = {v: k for k, v in self.bit_of.items()}
            self.bift = bier.build_bift(topo, self.bfr_ids, scenario.bsl)
            self.overlay = {}   # group -> set of (si, bit)
        else:
            self.bift = None
            self.overlay = None

    def apply(self, event):
        kind, args = event.kind, event.args
        if kind == workload.ADD_SITE:
            site_id, edge = args
            if self.topo.roles.get(edge) != EDGE:
                raise SimError(f"add_site targets non-edge router {edge}")
            if self.unicast is not None:
                self.unicast.add_site(make_site(site_id, edge))
        elif kind == workload.ADD_GROUP:
            group, source_edge = args
            self.topo.require(source_edge)
            if group not in self.groups:
                self.groups[group] = source_edge
                self.membership[group] = set()
                if self.overlay is not None:
                    self.overlay[group] = set()
            elif self.groups[group] != source_edge:
                raise SimError(f"group {group} re-added with a different source")
        elif kind == workload.JOIN:
            group, receiver = args
            self._require_group(group)
            self.membership[group].add(receiver)
            if self.sg_state is not None:
                from .topology import shortest_paths
                sg = SgKey(self.groups[group], group)
                multicast.join(self.sg_state, self.topo,
                               shortest_paths(self.topo, receiver), sg, receiver)
            if self.overlay is not None:
                self.overlay[group].add(self.bit_of[receiver])
        elif kind == workload.LEAVE:
            group, receiver = args
            self._require_group(group)
            if receiver not in self.membership[group]:
                raise SimError(f"leave for non-member edge {receiver} of group {group}")
            self.membership[group].discard(receiver)
            if self.sg_state is not None:
                from .topology import shortest_paths
                sg = SgKey(self.groups[group], group)
                multicast.leave(self.sg_state, self.topo,
                                shortest_paths(self.topo, receiver), sg, receiver)
            if self.overlay is not None:
                self.overlay[group].discard(self.bit_of[receiver])
        elif kind == workload.REMOVE_GROUP:
            (group,) = args
            self._require_group(group)
            if self.membership[group]:
                raise SimError(f"remove_group {group} while members remain")
            del self.groups[group]
            del self.membership[group]
            if self.overlay is not None:
                del self.overlay[group]
        else:
            raise SimError(f"unknown event kind {kind!r}")

    def _require_group(self, group):
        if group not in self.groups:
            raise SimError(f"event references unknown group {group}")

    # -- measurement ----------------------------------------------------

    def snapshot(self, tick):
        rows = []
        for router in sorted(self.topo.roles):
            rows.append((
                router,
                self.topo.roles[router],
                self.unicast.flat_fib_size(router) if "flat" in self.modes else 0,
                self.unicast.mapping_entries(router) if "mapencap" in self.modes else 0,
                self.unicast.label_entries(router) if "mpls" in self.modes else 0,
                self.sg_state.count(router) if self.sg_state is not None else 0,
                self.bift.size(router) if self.bift is not None else 0,
            ))
        return StateSnapshot(tick, rows)

    def probe(self, tick):
        """One packet per active group per multicast mode; mismatch aborts."""
        rows = []
        for group in sorted(self.groups):
            expected = frozenset(self.membership[group])
            if self.sg_state is not None:
                sg = SgKey(self.groups[group], group)
                delivered_list = multicast.simulate_delivery(self.sg_state, sg)
                delivered = frozenset(delivered_list)
                ok = (delivered == expected
                      and len(delivered_list) == len(delivered))
                rows.append(DeliveryRow(tick, group, "stateful", ok, delivered, expected))
                if not ok:
                    raise DeliveryMismatch(tick, group, "stateful", delivered, expected)
            if self.bift is not None:
                delivered_list = []
                headers = bier.encapsulate_bier(self.overlay, group, self.scenario.bsl)
                headers = self._inject_fault(headers)
                for header in headers:
                    delivered_list.extend(
                        bier.flood_deliver(self.bift, header, self.groups[group]))
                delivered = frozenset(r for r, _ in delivered_list)
                ok = (delivered == expected
                      and len(delivered_list) == len(delivered))
                rows.append(DeliveryRow(tick, group, "bier", ok, delivered, expected))
                if not ok:
                    raise DeliveryMismatch(tick, group, "bier", delivered, expected)
        return rows

    def _inject_fault(self, headers):
        if self.scenario.fault == "bier_drop_lowest_bit":
            out = []
            for h in headers:
                if h.bits:
                    out.append(bier.BierHeader(h.si, h.bits & (h.bits - 1)))
                else:
                    out.append(h)
            return out
        if self.scenario.fault is not None:
            raise ScenarioError(f"unknown fault {self.scenario.fault!r}")
        return headers


def run(scenario, seed=None):
    """Replay the scenario's schedule; returns (snapshots, delivery rows)."""
    params = scenario.workload
    if seed is not None:
        params = workload.Params(seed, params.n_sites, params.n_groups,
                                 params.members_min, params.members_max,
                                 params.churn_events)
    schedule = workload.generate(scenario.topology, params)
    sim = SimState(scenario)
    snapshots = []
    report = []
    events = schedule.events
    max_tick = events[-1].tick if events else 0
    i = 0
    for tick in range(max_tick + 1):
        while i < len(events) and events[i].tick == tick:
            sim.apply(events[i])
            i += 1
        if tick % scenario.snapshot_interval == 0 or tick == max_tick:
            snapshots.append(sim.snapshot(tick))
            report.extend(sim.probe(tick))
    return snapshots, report


def emit_csv(snapshots, report, out_dir):
    """Write state.csv and delivery.csv with stable row order."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    state_path = out_dir / "state.csv"
    delivery_path = out_dir / "delivery.csv"

    lines = [STATE_HEADER]
    for snap in snapshots:
        for router, role, fib, mapping, labels, sg, bift_n in snap.rows:
            lines.append(f"{snap.tick},{router},{role},{fib},{mapping},{labels},{sg},{bift_n}")
    state_path.write_text("\n".join(lines) + "\n")

    def fmt(receivers):
        return "|".join(str(r) for r in sorted(receivers))

    lines = [DELIVERY_HEADER]
    for row in sorted(report, key=lambda r: (r.tick, r.group, r.mode)):
        lines.append(
            f"{row.tick},{row.group},{row.mode},{int(row.ok)},"
            f"{fmt(row.delivered)},{fmt(row.expected)}"
        )
    delivery_path.write_text("\n".join(lines) + "\n")
    return state_path, delivery_path
