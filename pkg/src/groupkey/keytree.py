"""Binary key tree with totient-blinded Diffie-Hellman node keys.

Nodes are array-indexed: the root is 0 and node ``v`` has children
``2v+1`` (left) and ``2v+2`` (right).  A node secret ``K_v`` is blinded to
``PK_v = y**phi(K_v) mod p``; an internal node's secret is
``PK_sibling ** phi(K_child) mod p`` computed from either child, both giving
the same value.

Trees are values: :func:`join` and :func:`leave` return a new tree inside
the :class:`RekeyResult` and never touch the input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Mapping, Sequence

from .modmath import (
    DEFAULT_BUDGET,
    DomainError,
    FactorBudget,
    GroupParams,
    KeyMode,
    euler_totient,
    gen_secret_key,
    mod_exp,
)
from .seeding import derive_seed

Variant = Literal["etf", "plain"]
VARIANTS: tuple[Variant, ...] = ("etf", "plain")


class KeyTreeError(Exception):
    pass


class NotAMemberError(KeyTreeError):
    pass


class AlreadyMemberError(KeyTreeError):
    pass


class EmptyGroupError(KeyTreeError):
    """The operation would leave (or starts from) a group with no members."""


class InsufficientKeyInfo(KeyTreeError):
    """A public or secret key needed to walk up a key path is unknown."""

    def __init__(self, node: int, what: str):
        super().__init__(f"{what} of node {node} is unknown")
        self.node = node
        self.what = what


def left(v: int) -> int:
    return 2 * v + 1


def right(v: int) -> int:
    return 2 * v + 2


def parent(v: int) -> int:
    return (v - 1) // 2


def sibling(v: int) -> int:
    if v == 0:
        raise DomainError("the root has no sibling")
    return v + 1 if v % 2 else v - 1


def depth(v: int) -> int:
    return (v + 1).bit_length() - 1


def ancestors(v: int) -> list[int]:
    """``[v, parent(v), ..., 0]``."""
    chain = [v]
    while v:
        v = parent(v)
        chain.append(v)
    return chain


def key_exponent(secret: int, variant: Variant = "etf", budget: FactorBudget = DEFAULT_BUDGET) -> int:
    if variant == "etf":
        return euler_totient(secret, budget)
    if variant == "plain":
        return secret
    raise DomainError(f"unknown variant {variant!r}")


def compute_public(
    params: GroupParams,
    secret: int,
    *,
    variant: Variant = "etf",
    budget: FactorBudget = DEFAULT_BUDGET,
) -> int:
    """Blinded key ``y**phi(secret) mod p``."""
    if not 1 <= secret < params.p:
        raise DomainError(f"secret must lie in [1, p), got {secret}")
    return mod_exp(params.y, key_exponent(secret, variant, budget), params.p)


def compute_node_secret(
    params: GroupParams,
    own_secret: int,
    sibling_public: int,
    *,
    variant: Variant = "etf",
    budget: FactorBudget = DEFAULT_BUDGET,
) -> int:
    """Parent secret as seen from one child: ``sibling_public**phi(own_secret) mod p``."""
    if not 1 <= sibling_public < params.p:
        raise DomainError(f"public key must lie in [1, p), got {sibling_public}")
    if not 1 <= own_secret < params.p:
        raise DomainError(f"secret must lie in [1, p), got {own_secret}")
    return mod_exp(sibling_public, key_exponent(own_secret, variant, budget), params.p)


# -- shape bookkeeping (public information every member can replay) ---------


def shape_nodes(leaves: Iterable[int]) -> set[int]:
    nodes: set[int] = set()
    for leaf in leaves:
        nodes.update(ancestors(leaf))
    return nodes


def insertion_point(leaves: Iterable[int]) -> int:
    """Rightmost leaf among the shallowest ones."""
    leaves = list(leaves)
    if not leaves:
        raise EmptyGroupError("no leaf to insert at")
    return min(leaves, key=lambda v: (depth(v), -v))


def subtree(v: int, nodes: set[int] | Mapping[int, object]) -> list[int]:
    out, frontier = [], [v]
    while frontier:
        u = frontier.pop()
        if u in nodes:
            out.append(u)
            frontier += [left(u), right(u)]
    return sorted(out)


def rehome(src: int, dst: int, nodes: Iterable[int]) -> dict[int, int]:
    """Index map moving the subtree rooted at ``src`` so it is rooted at ``dst``."""
    present = set(nodes)
    mapping, frontier = {}, [(src, dst)]
    while frontier:
        old, new = frontier.pop()
        if old not in present:
            continue
        mapping[old] = new
        frontier += [(left(old), left(new)), (right(old), right(new))]
    return mapping


@dataclass(frozen=True)
class JoinPlan:
    insertion: int
    new_leaf: int
    relabel: Mapping[int, int]
    occupancy: Mapping[str, int]


@dataclass(frozen=True)
class LeavePlan:
    leaf: int
    promoted_from: int
    promoted_to: int
    relabel: Mapping[int, int]
    removed: frozenset[int]
    occupancy: Mapping[str, int]


def plan_join(occupancy: Mapping[str, int], new_member: str) -> JoinPlan:
    if new_member in occupancy:
        raise AlreadyMemberError(new_member)
    v = insertion_point(occupancy.values())
    occ = {m: (left(v) if leaf == v else leaf) for m, leaf in occupancy.items()}
    occ[new_member] = right(v)
    return JoinPlan(v, right(v), {v: left(v)}, occ)


def plan_leave(occupancy: Mapping[str, int], member: str) -> LeavePlan:
    if member not in occupancy:
        raise NotAMemberError(member)
    if len(occupancy) == 1:
        raise EmptyGroupError(f"{member} is the last member")
    leaf = occupancy[member]
    q, s = parent(leaf), sibling(leaf)
    nodes = shape_nodes(occupancy.values())
    relabel = rehome(s, q, nodes)
    occ = {m: relabel.get(x, x) for m, x in occupancy.items() if m != member}
    return LeavePlan(leaf, s, q, relabel, frozenset({leaf, q}), occ)


# -- the tree -----------------------------------------------------------------


@dataclass(frozen=True)
class KeyNode:
    secret: int | None = None
    public: int | None = None
    occupant: str | None = None


@dataclass(frozen=True, eq=False)
class KeyTree:
    params: GroupParams
    nodes: Mapping[int, KeyNode]
    variant: Variant = "etf"
    budget: FactorBudget = field(default=DEFAULT_BUDGET, repr=False)

    def is_leaf(self, v: int) -> bool:
        return v in self.nodes and left(v) not in self.nodes

    @property
    def leaves(self) -> list[int]:
        return sorted(v for v in self.nodes if left(v) not in self.nodes)

    @property
    def occupants(self) -> dict[str, int]:
        return {n.occupant: v for v, n in sorted(self.nodes.items()) if n.occupant is not None}

    @property
    def member_count(self) -> int:
        return sum(1 for n in self.nodes.values() if n.occupant is not None)

    @property
    def height(self) -> int:
        return max((depth(v) for v in self.nodes), default=0)

    @property
    def group_key(self) -> int | None:
        root = self.nodes.get(0)
        return root.secret if root else None

    def leaf_of(self, member: str) -> int:
        for v, n in self.nodes.items():
            if n.occupant == member:
                return v
        raise NotAMemberError(member)

    def publics(self) -> dict[int, int]:
        return {v: n.public for v, n in self.nodes.items() if n.public is not None}

    def view(self, member: str) -> "KeyTree":
        """What ``member`` holds: every public key, and only its own leaf secret."""
        mine = self.leaf_of(member)
        nodes = {v: replace(n, secret=n.secret if v == mine else None) for v, n in self.nodes.items()}
        return replace(self, nodes=nodes)

    def public_key(self, secret: int) -> int:
        return compute_public(self.params, secret, variant=self.variant, budget=self.budget)

    def node_secret(self, own_secret: int, sibling_public: int) -> int:
        return compute_node_secret(
            self.params, own_secret, sibling_public, variant=self.variant, budget=self.budget
        )

    @classmethod
    def build(
        cls,
        params: GroupParams,
        layout: Mapping[str, int],
        secrets: Mapping[str, int],
        *,
        variant: Variant = "etf",
        budget: FactorBudget = DEFAULT_BUDGET,
    ) -> "KeyTree":
        """Full-knowledge tree from explicit leaf positions and leaf secrets."""
        if not layout:
            raise EmptyGroupError("layout is empty")
        positions = list(layout.values())
        if len(set(positions)) != len(positions):
            raise KeyTreeError("two members share a leaf")
        shape = shape_nodes(positions)
        leaf_set = set(positions)
        for v in shape:
            kids = (left(v) in shape) + (right(v) in shape)
            if v in leaf_set and kids:
                raise KeyTreeError(f"leaf {v} has children")
            if v not in leaf_set and kids != 2:
                raise KeyTreeError(f"internal node {v} does not have two children")
        tree = cls(params, {}, variant, budget)
        nodes: dict[int, KeyNode] = {}
        for member, v in layout.items():
            k = secrets[member]
            nodes[v] = KeyNode(k, tree.public_key(k), member)
        for v in sorted(shape - leaf_set, reverse=True):
            k = tree.node_secret(nodes[left(v)].secret, nodes[right(v)].public)
            nodes[v] = KeyNode(k, tree.public_key(k))
        return replace(tree, nodes=nodes)

    @classmethod
    def grow(
        cls,
        params: GroupParams,
        members: Sequence[str],
        seed: int,
        *,
        variant: Variant = "etf",
        key_mode: KeyMode = "prime",
        budget: FactorBudget = DEFAULT_BUDGET,
    ) -> "KeyTree":
        """Tree reached by admitting ``members`` one at a time with the join rule."""
        if not members:
            raise EmptyGroupError("no members")
        occ = {members[0]: 0}
        for m in members[1:]:
            occ = dict(plan_join(occ, m).occupancy)
        secrets = {m: gen_secret_key(params, derive_seed(seed, "leaf", m), key_mode, budget) for m in members}
        return cls.build(params, occ, secrets, variant=variant, budget=budget)


def snapshot(tree: KeyTree, *, secrets: bool = False) -> str:
    """JSON text dump; secrets are included only when asked for (debug dumps)."""
    rows = []
    for v, n in sorted(tree.nodes.items()):
        row: dict[str, object] = {"index": v, "occupant": n.occupant}
        row["public"] = None if n.public is None else str(n.public)
        if secrets:
            row["secret"] = None if n.secret is None else str(n.secret)
        rows.append(row)
    doc = {"p": str(tree.params.p), "y": str(tree.params.y), "variant": tree.variant, "nodes": rows}
    return json.dumps(doc, indent=1, sort_keys=True)


def load_snapshot(text: str) -> KeyTree:
    doc = json.loads(text)
    params = GroupParams(int(doc["p"]), int(doc["y"]))
    nodes = {}
    for row in doc["nodes"]:
        sec = row.get("secret")
        pub = row.get("public")
        nodes[int(row["index"])] = KeyNode(
            None if sec is None else int(sec), None if pub is None else int(pub), row.get("occupant")
        )
    return KeyTree(params, nodes, doc.get("variant", "etf"))


# -- queries -------------------------------------------------------------------


def key_path(tree: KeyTree, leaf: int) -> list[int]:
    node = tree.nodes.get(leaf)
    if node is None or node.occupant is None:
        raise NotAMemberError(f"node {leaf} is not an occupied leaf")
    return ancestors(leaf)


def find_insertion_point(tree: KeyTree) -> int:
    return insertion_point(tree.leaves)


def select_support_node(tree: KeyTree, event_leaf: int) -> str:
    """Member that rekeys after an event at ``event_leaf``.

    The occupant of the sibling leaf, or the rightmost shallowest leaf of the
    sibling subtree when the sibling is internal.
    """
    if event_leaf == 0:
        raise EmptyGroupError("no other member to act as support")
    sib = sibling(event_leaf)
    if sib not in tree.nodes:
        raise KeyTreeError(f"node {event_leaf} has no sibling in the tree")
    candidates = [v for v in subtree(sib, tree.nodes) if tree.is_leaf(v)]
    return tree.nodes[insertion_point(candidates)].occupant


def compute_group_key(
    view: KeyTree,
    leaf: int,
    received_publics: Iterable[tuple[int, int]] = (),
) -> int:
    """Fold node secrets up from ``leaf`` using sibling public keys."""
    node = view.nodes.get(leaf)
    if node is None or node.occupant is None:
        raise NotAMemberError(f"node {leaf} is not an occupied leaf")
    if node.secret is None:
        raise InsufficientKeyInfo(leaf, "secret")
    publics = view.publics()
    publics.update(received_publics)
    k, v = node.secret, leaf
    while v:
        pub = publics.get(sibling(v))
        if pub is None:
            raise InsufficientKeyInfo(sibling(v), "public key")
        k = view.node_secret(k, pub)
        v = parent(v)
    return k


# -- rekeying ------------------------------------------------------------------


@dataclass(frozen=True)
class RekeyResult:
    """Outcome of a membership event.

    ``updated_nodes`` runs from the event side up to the root;
    ``broadcast_publics`` are the refreshed public keys other members need.
    ``welcome_publics`` (joins only) are the sibling keys the newcomer needs.
    """

    tree: KeyTree
    event: Literal["join", "leave"]
    member: str
    event_leaf: int
    support: str
    updated_nodes: tuple[int, ...]
    broadcast_publics: tuple[tuple[int, int], ...]
    new_group_key: int
    relabel: Mapping[int, int] = field(default_factory=dict)
    welcome_publics: tuple[tuple[int, int], ...] = ()


def fresh_secret(params: GroupParams, seed: int, old: int | None, mode: KeyMode = "prime") -> int:
    """A new leaf secret different from ``old``."""
    attempt = 0
    while True:
        k = gen_secret_key(params, derive_seed(seed, "refresh", attempt), mode)
        if k != old:
            return k
        attempt += 1


def _rekey_from(tree: KeyTree, nodes: dict[int, KeyNode], leaf: int) -> None:
    v = leaf
    while v:
        own = nodes[v].secret
        if own is None:
            raise InsufficientKeyInfo(v, "secret")
        sib = nodes.get(sibling(v))
        if sib is None or sib.public is None:
            raise InsufficientKeyInfo(sibling(v), "public key")
        k = tree.node_secret(own, sib.public)
        p = parent(v)
        nodes[p] = replace(nodes[p], secret=k, public=tree.public_key(k))
        v = p


def _refresh_leaf(tree: KeyTree, nodes: dict[int, KeyNode], leaf: int, seed: int, mode: KeyMode) -> None:
    node = nodes[leaf]
    if node.secret is None:
        raise InsufficientKeyInfo(leaf, "secret")
    k = fresh_secret(tree.params, seed, node.secret, mode)
    nodes[leaf] = replace(node, secret=k, public=tree.public_key(k))


def join(
    tree: KeyTree,
    new_member_public: int,
    new_member_id: str,
    *,
    seed: int,
    new_member_secret: int | None = None,
    key_mode: KeyMode = "prime",
) -> RekeyResult:
    """Admit a member at the insertion point and rekey through the support node.

    Only the support's leaf secret and the sibling publics along its path
    need to be present in ``tree``.
    """
    if not 1 <= new_member_public < tree.params.p:
        raise DomainError("joiner public key must lie in [1, p)")
    if not tree.nodes:
        raise EmptyGroupError("cannot join an empty tree")
    plan = plan_join(tree.occupants, new_member_id)
    v = plan.insertion
    nodes = dict(tree.nodes)
    nodes[left(v)] = nodes[v]
    nodes[right(v)] = KeyNode(new_member_secret, new_member_public, new_member_id)
    nodes[v] = KeyNode()
    grown = replace(tree, nodes=nodes)
    support = select_support_node(grown, right(v))
    _refresh_leaf(tree, nodes, left(v), seed, key_mode)
    _rekey_from(tree, nodes, left(v))
    out = replace(tree, nodes=nodes)
    updated = tuple(ancestors(v))
    welcome = tuple((sibling(x), nodes[sibling(x)].public) for x in ancestors(right(v))[:-1])
    return RekeyResult(
        tree=out,
        event="join",
        member=new_member_id,
        event_leaf=right(v),
        support=support,
        updated_nodes=updated,
        broadcast_publics=tuple((u, nodes[u].public) for u in updated if u != 0),
        new_group_key=nodes[0].secret,
        relabel=dict(plan.relabel),
        welcome_publics=welcome,
    )


def leave(tree: KeyTree, member: str, *, seed: int, key_mode: KeyMode = "prime") -> RekeyResult:
    """Remove ``member``; its sibling subtree moves up one level and the support rekeys."""
    plan = plan_leave(tree.occupants, member)
    support = select_support_node(tree, plan.leaf)
    nodes = {
        plan.relabel.get(u, u): n for u, n in tree.nodes.items() if u not in plan.removed
    }
    support_leaf = plan.occupancy[support]
    _refresh_leaf(tree, nodes, support_leaf, seed, key_mode)
    _rekey_from(tree, nodes, support_leaf)
    updated = tuple(ancestors(support_leaf))
    return RekeyResult(
        tree=replace(tree, nodes=nodes),
        event="leave",
        member=member,
        event_leaf=plan.leaf,
        support=support,
        updated_nodes=updated,
        broadcast_publics=tuple((u, nodes[u].public) for u in updated if u != 0),
        new_group_key=nodes[0].secret,
        relabel=dict(plan.relabel),
    )
