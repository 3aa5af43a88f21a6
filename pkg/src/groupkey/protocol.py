"""Round-based simulation of members rekeying over a noisy broadcast channel.

Each membership event is handled by the support member on its own partial
view of the tree.  The rekey broadcast is serialized to bits, optionally
LDPC-encoded block by block, pushed through the channel separately for every
recipient, decoded, and applied by each member to its own local state.
Headers (event kind and subject) are delivered reliably; only key material
crosses the channel.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal, Mapping, Sequence

from . import keytree as kt
from .channel import ChannelError, ChannelModel, transmit_bits
from .ldpc import (
    Codeword,
    DecodeFailure,
    EncodingStoppingSet,
    build_stopping_set,
    bundled_matrix,
    decode,
    encode,
    load_matrix,
)
from .modmath import DEFAULT_BUDGET, GroupParams, gen_secret_key
from .seeding import derive_seed

FIELD_BITS = 16


class ConfigError(ValueError):
    pass


class FrameError(ValueError):
    pass


class StaleViewError(kt.KeyTreeError):
    pass


# -- framing -------------------------------------------------------------------


def _emit(out: list[int], value: int, width: int) -> None:
    out.extend((value >> (width - 1 - i)) & 1 for i in range(width))


def frame_payload(entries: Sequence[tuple[int, int]], block: int = 1) -> list[int]:
    """Entry count, then per entry the node id and value, each as a 16-bit
    bit-length followed by that many big-endian bits; zero-padded to a
    multiple of ``block``."""
    if len(entries) >= 1 << FIELD_BITS:
        raise FrameError("too many entries")
    out: list[int] = []
    _emit(out, len(entries), FIELD_BITS)
    for node, value in entries:
        for x in (node, value):
            if x < 0 or x.bit_length() >= 1 << FIELD_BITS:
                raise FrameError(f"cannot frame {x}")
            _emit(out, x.bit_length(), FIELD_BITS)
            _emit(out, x, x.bit_length())
    out.extend([0] * (-len(out) % block))
    return out


def parse_frame(bits: Sequence[int], block: int = 1) -> list[tuple[int, int]]:
    pos = 0

    def take(width: int) -> int:
        nonlocal pos
        if pos + width > len(bits):
            raise FrameError(f"frame truncated at bit {pos}")
        v = 0
        for b in bits[pos : pos + width]:
            v = (v << 1) | int(b)
        pos += width
        return v

    entries = []
    for _ in range(take(FIELD_BITS)):
        node = take(take(FIELD_BITS))
        value = take(take(FIELD_BITS))
        entries.append((node, value))
    if len(bits) - pos >= max(block, 1):
        raise FrameError(f"{len(bits) - pos} unread bits after the last entry")
    return entries


# -- messages and member state ------------------------------------------------

Kind = Literal["JoinRequest", "LeaveNotice", "RekeyBroadcast"]


@dataclass(frozen=True)
class Message:
    kind: Kind
    sender: str
    payload: tuple[tuple[int, int], ...] = ()
    # header fields: which event this belongs to and whom it concerns
    event: Literal["join", "leave"] | None = None
    subject: str | None = None

    def __post_init__(self):
        if self.kind == "JoinRequest" and len(self.payload) != 1:
            raise ValueError("a join request carries exactly one public key")


@dataclass(frozen=True)
class MemberState:
    id: str
    leaf: int
    secret: int
    known_publics: Mapping[int, int]
    directory: Mapping[str, int]
    path_secrets: Mapping[int, int] = field(default_factory=dict)
    current_group_key: int | None = None
    # nodes whose secret was derived again by the last update, leaf side first
    recomputed: tuple[int, ...] = ()

    @property
    def key_path(self) -> list[int]:
        return kt.ancestors(self.leaf)


def _derive_path(
    state: MemberState, params: GroupParams, variant: kt.Variant, changed: set[int]
) -> MemberState:
    """Refresh path secrets from the lowest node that needs it."""
    path = state.key_path
    secrets = {v: s for v, s in state.path_secrets.items() if v in path}
    secrets[state.leaf] = state.secret
    start = len(path)
    for i in range(1, len(path)):
        below = path[i - 1]
        if path[i] not in secrets or kt.sibling(below) in changed:
            start = i
            break
    k = secrets[path[start - 1]]
    recomputed = []
    for i in range(start, len(path)):
        sib = kt.sibling(path[i - 1])
        pub = state.known_publics.get(sib)
        if pub is None:
            raise kt.InsufficientKeyInfo(sib, "public key")
        k = kt.compute_node_secret(params, k, pub, variant=variant)
        secrets[path[i]] = k
        recomputed.append(path[i])
    return replace(state, path_secrets=secrets, current_group_key=secrets[0], recomputed=tuple(recomputed))


def init_member(
    member: str,
    leaf: int,
    secret: int,
    publics: Mapping[int, int],
    directory: Mapping[str, int],
    params: GroupParams,
    variant: kt.Variant = "etf",
) -> MemberState:
    state = MemberState(member, leaf, secret, dict(publics), dict(directory))
    return _derive_path(state, params, variant, set())


def member_handle(
    state: MemberState, msg: Message, params: GroupParams, variant: kt.Variant = "etf"
) -> MemberState:
    """Apply a decoded rekey broadcast: structural change from the header, then the publics."""
    publics = dict(state.known_publics)
    secrets = dict(state.path_secrets)
    directory = dict(state.directory)
    leaf = state.leaf
    moved: Mapping[int, int] = {}
    if msg.event == "join" and msg.subject is not None and msg.subject not in directory:
        plan = kt.plan_join(directory, msg.subject)
        moved, directory = plan.relabel, dict(plan.occupancy)
    elif msg.event == "leave" and msg.subject in directory:
        plan = kt.plan_leave(directory, msg.subject)
        if msg.subject == state.id:
            raise StaleViewError(f"{state.id} cannot process its own departure")
        moved, directory = plan.relabel, dict(plan.occupancy)
        for v in plan.removed:
            publics.pop(v, None)
            secrets.pop(v, None)
        publics = {moved.get(v, v): p for v, p in publics.items() if v not in plan.removed}
        secrets = {moved.get(v, v): s for v, s in secrets.items() if v not in plan.removed}
        moved = {}
    if moved:
        # a join only pushes the insertion leaf down one level
        for old, new in moved.items():
            if old in publics:
                publics[new] = publics.pop(old)
            secrets.pop(old, None)
    leaf = directory.get(state.id, leaf)
    shape = kt.shape_nodes(directory.values())
    bad = [v for v, _ in msg.payload if v not in shape]
    if bad:
        raise StaleViewError(f"{state.id}: payload names node {bad[0]} outside its view")
    changed = set(moved.values())
    for v, p in msg.payload:
        if not 1 <= p < params.p:
            raise StaleViewError(f"{state.id}: public key for node {v} out of range")
        if publics.get(v) != p:
            changed.add(v)
        publics[v] = p
    if leaf != state.leaf:
        changed |= set(kt.ancestors(leaf))
        secrets = {v: s for v, s in secrets.items() if v in kt.ancestors(leaf)}
    out = replace(state, leaf=leaf, known_publics=publics, directory=directory, path_secrets=secrets)
    return _derive_path(out, params, variant, changed)


# -- configuration ----------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    kind: Literal["join", "leave"]
    member: str


@dataclass(frozen=True)
class SimConfig:
    params: GroupParams
    seed: int
    members: tuple[str, ...] = ()
    layout: Mapping[str, int] | None = None
    events: tuple[Event, ...] = ()
    channel: ChannelModel = field(default_factory=ChannelModel.noiseless)
    codec: bool = True
    matrix_path: str | None = None
    max_bit_degree: int = 3
    variant: kt.Variant = "etf"
    key_mode: Literal["prime", "general"] = "prime"
    name: str = "scenario"

    def __post_init__(self):
        if self.layout is None and not self.members:
            raise ConfigError("no initial members")
        if self.variant not in kt.VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        current = set(self.layout or self.members)
        if len(current) != len(self.layout or self.members):
            raise ConfigError("duplicate initial member")
        for i, ev in enumerate(self.events):
            if ev.kind == "join":
                if ev.member in current:
                    raise ConfigError(f"event {i + 1}: {ev.member} is already a member")
                current.add(ev.member)
            elif ev.kind == "leave":
                if ev.member not in current:
                    raise ConfigError(f"event {i + 1}: {ev.member} is not a member")
                if len(current) == 1:
                    raise ConfigError(f"event {i + 1}: leave would empty the group")
                current.discard(ev.member)
            else:
                raise ConfigError(f"event {i + 1}: unknown kind {ev.kind!r}")

    def schedule(self) -> EncodingStoppingSet:
        h = load_matrix(self.matrix_path) if self.matrix_path else bundled_matrix()
        return build_stopping_set(h, self.max_bit_degree)


def random_events(members: Sequence[str], count: int, seed: int, prefix: str = "J") -> list[Event]:
    """Mixed joins and leaves that never drop the group below two members."""
    rng = random.Random(seed)
    current = list(members)
    out, fresh = [], 0
    for _ in range(count):
        if len(current) > 2 and rng.random() < 0.5:
            m = current.pop(rng.randrange(len(current)))
            out.append(Event("leave", m))
        else:
            fresh += 1
            m = f"{prefix}{fresh}"
            current.append(m)
            out.append(Event("join", m))
    return out


def config_from_dict(doc: Mapping, base_dir: Path | None = None) -> SimConfig:
    try:
        params = GroupParams(int(doc["params"]["p"]), int(doc["params"]["y"]))
        seed = int(doc.get("seed", 0))
        layout = doc.get("layout")
        members = tuple(doc.get("members", ()))
        if layout is not None:
            layout = {str(m): int(v) for m, v in layout.items()}
        if "random_events" in doc:
            rnd = doc["random_events"]
            start = list(layout) if layout else list(members)
            events = tuple(random_events(start, int(rnd["count"]), int(rnd.get("seed", seed))))
        else:
            events = tuple(_parse_event(e) for e in doc.get("events", ()))
        codec = doc.get("codec", "on")
        matrix_path = None
        max_deg = 3
        if isinstance(codec, Mapping):
            matrix_path = codec.get("matrix")
            max_deg = int(codec.get("max_bit_degree", 3))
            codec = "on"
        if codec not in ("on", "off"):
            raise ConfigError(f"codec must be 'on' or 'off', got {codec!r}")
        if matrix_path and base_dir is not None and not Path(matrix_path).is_absolute():
            matrix_path = str(base_dir / matrix_path)
        return SimConfig(
            params=params,
            seed=seed,
            members=members,
            layout=layout,
            events=events,
            channel=ChannelModel.from_dict(doc.get("channel", {})),
            codec=codec == "on",
            matrix_path=matrix_path,
            max_bit_degree=max_deg,
            variant=doc.get("variant", "etf"),
            key_mode=doc.get("key_mode", "prime"),
            name=str(doc.get("name", "scenario")),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, ChannelError) as exc:
        raise ConfigError(f"bad scenario config: {exc!r}") from exc


def _parse_event(e: Mapping) -> Event:
    if not isinstance(e, Mapping) or len(e) != 1:
        raise ConfigError(f"event must be {{'join': id}} or {{'leave': id}}, got {e!r}")
    (kind, member), = e.items()
    return Event(kind, str(member))


def load_config(path: str | Path) -> SimConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return config_from_dict(doc, path.parent)


# -- transport -----------------------------------------------------------------


@dataclass(frozen=True)
class Delivery:
    payload: tuple[tuple[int, int], ...] | None
    trials: int
    correction_trials: int
    flips: int
    error: str | None = None


class Transport:
    """Frames, encodes, corrupts, and decodes payloads; numbers every transmission."""

    def __init__(self, channel: ChannelModel, schedule: EncodingStoppingSet | None):
        self.channel = channel
        self.schedule = schedule
        self.count = 0

    def send(self, payload: Sequence[tuple[int, int]]) -> Delivery:
        index = self.count
        self.count += 1
        s = self.schedule
        if s is None:
            bits = frame_payload(payload, 1)
            received, flips = transmit_bits(bits, self.channel, index)
            try:
                return Delivery(tuple(parse_frame(received, 1)), 0, 0, len(flips))
            except FrameError as exc:
                return Delivery(None, 0, 0, len(flips), f"frame: {exc}")
        bits = frame_payload(payload, s.k)
        wire: list[int] = []
        for i in range(0, len(bits), s.k):
            wire.extend(encode(s, bits[i : i + s.k]).wire_bits)
        received, flips = transmit_bits(wire, self.channel, index)
        out: list[int] = []
        trials = 0
        for i in range(0, len(received), s.n):
            try:
                res = decode(s, received[i : i + s.n])
            except DecodeFailure as exc:
                trials += exc.trials
                blocks = i // s.n + 1
                return Delivery(None, trials, trials - blocks, len(flips), f"decode: {exc}")
            trials += res.trials
            out.extend(res.info)
        blocks = len(received) // s.n
        try:
            return Delivery(tuple(parse_frame(out, s.k)), trials, trials - blocks, len(flips))
        except FrameError as exc:
            return Delivery(None, trials, trials - blocks, len(flips), f"frame: {exc}")


# -- report ---------------------------------------------------------------------


@dataclass(frozen=True)
class Failure:
    member: str
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class EventRecord:
    index: int
    kind: str
    member: str | None
    support: str | None
    updated_nodes: tuple[int, ...]
    broadcast_nodes: tuple[int, ...]
    group_key: int
    member_count: int
    converged_count: int
    trials: int
    correction_trials: int
    flips: int
    failures: tuple[Failure, ...] = ()
    resynced: tuple[str, ...] = ()

    @property
    def converged(self) -> bool:
        return self.converged_count == self.member_count

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "member": self.member,
            "support": self.support,
            "updated_nodes": list(self.updated_nodes),
            "broadcast_nodes": list(self.broadcast_nodes),
            "group_key": str(self.group_key),
            "member_count": self.member_count,
            "converged_count": self.converged_count,
            "converged": self.converged,
            "trials": self.trials,
            "correction_trials": self.correction_trials,
            "flips": self.flips,
            "failures": [{"member": f.member, "reason": f.reason, "detail": f.detail} for f in self.failures],
            "resynced": list(self.resynced),
        }


@dataclass(frozen=True)
class AuditCase:
    """What one membership event exposes to the member it concerns."""

    event: int
    kind: Literal["join", "leave"]
    member: str
    # secrets the member holds (leave: before leaving; join: right after joining)
    secrets: tuple[int, ...]
    # public keys it can overhear (leave: after the event; join: before it)
    publics: Mapping[int, int]
    # the key it must not learn
    target: int


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    events: tuple[EventRecord, ...]
    audit: tuple[AuditCase, ...] = field(default=(), repr=False)

    @property
    def converged(self) -> bool:
        return all(e.converged for e in self.events)

    @property
    def delivery_failures(self) -> int:
        return sum(len(e.failures) for e in self.events)

    @property
    def ok(self) -> bool:
        return self.converged and self.delivery_failures == 0

    def to_dict(self) -> dict:
        c = self.config
        return {
            "name": c.name,
            "seed": c.seed,
            "params": {"p": str(c.params.p), "y": str(c.params.y)},
            "variant": c.variant,
            "codec": "on" if c.codec else "off",
            "channel": c.channel.to_dict(),
            "converged": self.converged,
            "delivery_failures": self.delivery_failures,
            "events": [e.to_dict() for e in self.events],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["event", "kind", "member", "members", "converged", "trials", "correction_trials", "failures"])
        for e in self.events:
            w.writerow([e.index, e.kind, e.member or "", e.member_count, e.converged_count,
                        e.trials, e.correction_trials, len(e.failures)])
        return buf.getvalue()

    def write(self, directory: str | Path) -> tuple[Path, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        j, c = d / f"{self.config.name}.json", d / f"{self.config.name}.csv"
        j.write_text(self.to_json())
        c.write_text(self.to_csv())
        return j, c


# -- the simulation ---------------------------------------------------------------


class _Sim:
    def __init__(self, config: SimConfig):
        self.cfg = config
        self.params = config.params
        self.transport = Transport(config.channel, config.schedule() if config.codec else None)
        if config.layout is not None:
            layout = dict(config.layout)
        else:
            occ = {config.members[0]: 0}
            for m in config.members[1:]:
                occ = dict(kt.plan_join(occ, m).occupancy)
            layout = occ
        secrets = {m: self._leaf_secret(m, 0) for m in layout}
        self.tree = kt.KeyTree.build(self.params, layout, secrets, variant=config.variant)
        publics = self.tree.publics()
        self.members = {
            m: init_member(m, v, secrets[m], publics, layout, self.params, config.variant)
            for m, v in layout.items()
        }
        self.stale: set[str] = set()
        self.audit: list[AuditCase] = []

    def _leaf_secret(self, member: str, event: int) -> int:
        return gen_secret_key(self.params, derive_seed(self.cfg.seed, "leaf", member, event), self.cfg.key_mode)

    def _check(self) -> int:
        gk = self.tree.group_key
        return sum(1 for m, s in self.members.items() if m not in self.stale and s.current_group_key == gk)

    def _resync(self) -> tuple[str, ...]:
        """Stale members fetch a public snapshot of the tree and recompute."""
        done = []
        publics = self.tree.publics()
        directory = self.tree.occupants
        for m in sorted(self.stale):
            s = self.members[m]
            self.members[m] = init_member(m, directory[m], s.secret, publics, directory, self.params, self.cfg.variant)
            done.append(m)
        self.stale.clear()
        return tuple(done)

    def initial(self) -> EventRecord:
        gk = self.tree.group_key
        n = len(self.members)
        return EventRecord(0, "init", None, None, (), (), gk, n, self._check(), 0, 0, 0)

    def _deliver(self, recipient: str, msg: Message, failures: list[Failure]) -> Delivery:
        d = self.transport.send(msg.payload)
        if d.payload is None:
            failures.append(Failure(recipient, d.error.split(":")[0], d.error))
            self.stale.add(recipient)
            return d
        received = replace(msg, payload=d.payload)
        try:
            if recipient in self.members:
                self.members[recipient] = member_handle(
                    self.members[recipient], received, self.params, self.cfg.variant
                )
        except (kt.KeyTreeError, ValueError) as exc:
            failures.append(Failure(recipient, "stale-view", str(exc)))
            self.stale.add(recipient)
        return d

    def step(self, index: int, ev: Event) -> EventRecord:
        resynced = self._resync()
        seed = derive_seed(self.cfg.seed, "event", index)
        failures: list[Failure] = []
        deliveries: list[Delivery] = []
        if ev.kind == "join":
            secret = self._leaf_secret(ev.member, index)
            pub = self.tree.public_key(secret)
            plan = kt.plan_join(self.tree.occupants, ev.member)
            request = Message("JoinRequest", ev.member, ((plan.new_leaf, pub),), "join", ev.member)
            res = kt.join(
                self.tree, request.payload[0][1], ev.member,
                seed=seed, new_member_secret=secret, key_mode=self.cfg.key_mode,
            )
            # the support does the same on its own view: all publics, its own secret
            local = kt.join(self.tree.view(res.support), pub, ev.member, seed=seed, key_mode=self.cfg.key_mode)
            if local.new_group_key != res.new_group_key:
                raise AssertionError("support view and full tree disagree")
            pre_publics, pre_key = self.tree.publics(), self.tree.group_key
            self.tree = res.tree
            self.members[res.support] = self._support_state(res)
            msg = Message("RekeyBroadcast", res.support, res.broadcast_publics, "join", ev.member)
            for m in sorted(self.members):
                if m != res.support:
                    deliveries.append(self._deliver(m, msg, failures))
            welcome = Message("RekeyBroadcast", res.support, res.welcome_publics, "join", ev.member)
            d = self.transport.send(welcome.payload)
            deliveries.append(d)
            if d.payload is None:
                failures.append(Failure(ev.member, d.error.split(":")[0], d.error))
                self.stale.add(ev.member)
                joined = MemberState(ev.member, plan.new_leaf, secret, {}, dict(res.tree.occupants))
            else:
                try:
                    joined = init_member(
                        ev.member, plan.new_leaf, secret, dict(d.payload), res.tree.occupants,
                        self.params, self.cfg.variant,
                    )
                except (kt.KeyTreeError, ValueError) as exc:
                    failures.append(Failure(ev.member, "stale-view", str(exc)))
                    self.stale.add(ev.member)
                    joined = MemberState(ev.member, plan.new_leaf, secret, dict(d.payload), dict(res.tree.occupants))
            self.members[ev.member] = joined
            # the joiner ends up holding every secret on its new key path
            known = sorted({res.tree.nodes[v].secret for v in kt.ancestors(plan.new_leaf)})
            self.audit.append(AuditCase(index, "join", ev.member, tuple(known), pre_publics, pre_key))
        else:
            departed = self.members.pop(ev.member)
            self.stale.discard(ev.member)
            res = kt.leave(self.tree, ev.member, seed=seed, key_mode=self.cfg.key_mode)
            local = kt.leave(self.tree.view(res.support), ev.member, seed=seed, key_mode=self.cfg.key_mode)
            if local.new_group_key != res.new_group_key:
                raise AssertionError("support view and full tree disagree")
            self.tree = res.tree
            self.members[res.support] = self._support_state(res)
            msg = Message("RekeyBroadcast", res.support, res.broadcast_publics, "leave", ev.member)
            for m in sorted(self.members):
                if m != res.support:
                    deliveries.append(self._deliver(m, msg, failures))
            self.audit.append(
                AuditCase(
                    index, "leave", ev.member,
                    tuple(sorted({departed.secret, *departed.path_secrets.values()})),
                    res.tree.publics(), res.new_group_key,
                )
            )
        # anyone whose key does not match is out of sync, even without a detected error
        gk = self.tree.group_key
        for m, s in sorted(self.members.items()):
            if m not in self.stale and s.current_group_key != gk:
                failures.append(Failure(m, "diverged"))
                self.stale.add(m)
        return EventRecord(
            index=index,
            kind=ev.kind,
            member=ev.member,
            support=res.support,
            updated_nodes=res.updated_nodes,
            broadcast_nodes=tuple(v for v, _ in res.broadcast_publics),
            group_key=gk,
            member_count=len(self.members),
            converged_count=self._check(),
            trials=sum(d.trials for d in deliveries),
            correction_trials=sum(d.correction_trials for d in deliveries),
            flips=sum(d.flips for d in deliveries),
            failures=tuple(failures),
            resynced=resynced,
        )

    def _support_state(self, res: kt.RekeyResult) -> MemberState:
        """The support derived its path itself while rekeying."""
        leaf = res.tree.leaf_of(res.support)
        old = self.members[res.support]
        publics = {}
        for v, p in old.known_publics.items():
            publics[res.relabel.get(v, v)] = p
        for v in kt.ancestors(leaf):
            publics[v] = res.tree.nodes[v].public
            if v:
                publics[kt.sibling(v)] = res.tree.nodes[kt.sibling(v)].public
        shape = set(res.tree.nodes)
        publics = {v: p for v, p in publics.items() if v in shape}
        path = {v: res.tree.nodes[v].secret for v in kt.ancestors(leaf)}
        return MemberState(
            res.support, leaf, path[leaf], publics, res.tree.occupants, path, path[0], tuple(res.updated_nodes)
        )


def run_scenario(config: SimConfig) -> SimReport:
    sim = _Sim(config)
    records = [sim.initial()]
    for i, ev in enumerate(config.events, start=1):
        records.append(sim.step(i, ev))
    return SimReport(config, tuple(records), tuple(sim.audit))


# -- secrecy audit ----------------------------------------------------------------


@dataclass(frozen=True)
class AuditCheck:
    event: int
    kind: str
    member: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class AuditResult:
    checks: tuple[AuditCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def replay_candidates(
    params: GroupParams, secrets: Sequence[int], publics: Mapping[int, int], variant: kt.Variant = "etf"
) -> set[int]:
    """Every key reachable by folding a known secret up the tree from any node
    with the overheard public keys, plus the known secrets themselves."""
    out = set(secrets)
    for start in publics:
        for k in secrets:
            v = start
            while v:
                pub = publics.get(kt.sibling(v))
                if pub is None:
                    break
                k = kt.compute_node_secret(params, k, pub, variant=variant, budget=DEFAULT_BUDGET)
                out.add(k)
                v = kt.parent(v)
    return out


def audit_secrecy(report: SimReport) -> AuditResult:
    """Replay each departed member's (joiner's) knowledge against the new (old) group key."""
    cfg = report.config
    checks = []
    for case in report.audit:
        cands = replay_candidates(cfg.params, case.secrets, case.publics, cfg.variant)
        leaked = case.target in cands
        what = "new group key" if case.kind == "leave" else "previous group key"
        checks.append(
            AuditCheck(case.event, case.kind, case.member, not leaked,
                       f"{what} {'derivable' if leaked else 'not derivable'} from {len(case.secrets)} secrets")
        )
    return AuditResult(tuple(checks))
