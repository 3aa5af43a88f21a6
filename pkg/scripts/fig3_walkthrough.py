"""Join and then remove M8 on the seven-member tree, printing what changes."""

from groupkey import keytree as kt
from groupkey.keytree import KeyTree
from groupkey.modmath import GroupParams
from groupkey.seeding import derive_seed

LAYOUT = {"M1": 7, "M2": 8, "M3": 9, "M4": 10, "M7": 5, "M5": 13, "M6": 14}


def show(tree: KeyTree) -> None:
    for m, v in sorted(tree.occupants.items(), key=lambda kv: kv[1]):
        print(f"  {m} at node {v}, key path {kt.key_path(tree, v)}")


def main() -> None:
    params = GroupParams(2**64 - 59, 5)
    secrets = {m: kt.gen_secret_key(params, derive_seed(3, m)) for m in LAYOUT}
    tree = KeyTree.build(params, LAYOUT, secrets)
    print(f"initial group key {tree.group_key}")
    show(tree)

    s8 = kt.gen_secret_key(params, derive_seed(3, "M8"))
    j = kt.join(tree, tree.public_key(s8), "M8", seed=1, new_member_secret=s8)
    print(f"\nM8 joins at node {j.tree.leaf_of('M8')}; support {j.support}")
    print(f"  updated {list(j.updated_nodes)}, broadcast {[v for v, _ in j.broadcast_publics]}, "
          f"welcome {[v for v, _ in j.welcome_publics]}")
    print(f"  new group key {j.new_group_key}")
    show(j.tree)

    lv = kt.leave(j.tree, "M8", seed=2)
    print(f"\nM8 leaves; support {lv.support}")
    print(f"  updated {list(lv.updated_nodes)}, broadcast {sorted(v for v, _ in lv.broadcast_publics)}")
    print(f"  new group key {lv.new_group_key}")
    show(lv.tree)


if __name__ == "__main__":
    main()
