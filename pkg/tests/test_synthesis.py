import random
from collections import Counter

from shmlmon.events import Atom, Int
from shmlmon.formula import apply_subst, check_wellformed, pretty, unfold_max
from shmlmon.parser import parse_formula
from shmlmon.synthesis import (
    FalsityPlan,
    Hub,
    Mode,
    NecNode,
    TruthPlan,
    plan_stats,
    render_plan,
    synthesize,
)

from conftest import PREDECESSOR, wf


def instantiated_body(predecessor):
    """The predecessor formula's body after the first request binds x=5, y=c1."""
    unfolded = unfold_max(predecessor.formula)
    return apply_subst(unfolded.body, {"x": Int(5), "y": Atom("c1")})


def leaf_actions(node, acc=None):
    if acc is None:
        acc = []
    if isinstance(node, NecNode):
        acc.append(str(node.action))
    elif isinstance(node, Hub):
        for child in node.children:
            leaf_actions(child, acc)
    return acc


def test_predecessor_root_is_single_leaf(predecessor):
    for mode in Mode:
        plan = synthesize(predecessor, mode)
        assert isinstance(plan.root, NecNode)
        assert str(plan.root.action) == "srv ? {x,y}"
        assert plan_stats(plan) == {"hubs": 0, "leaves": 1, "depth": 1}


def test_instantiated_baseline_is_binary_cascade(predecessor):
    plan = synthesize(instantiated_body(predecessor), Mode.BASELINE)
    assert plan_stats(plan) == {"hubs": 2, "leaves": 3, "depth": 3}
    root = plan.root
    assert isinstance(root, Hub) and len(root.children) == 2
    inner = root.children[1]
    assert isinstance(inner, Hub) and len(inner.children) == 2


def test_instantiated_multi_and_reconf_are_flat(predecessor):
    for mode in (Mode.MULTI, Mode.RECONF):
        plan = synthesize(instantiated_body(predecessor), mode)
        assert plan_stats(plan) == {"hubs": 1, "leaves": 3, "depth": 2}
        assert len(plan.root.children) == 3
        assert all(isinstance(c, NecNode) for c in plan.root.children)


def test_leaf_order_preserves_source_order(predecessor):
    plan = synthesize(instantiated_body(predecessor), Mode.MULTI)
    assert leaf_actions(plan.root) == ["end ! _", "err ! z", "c1 ! z1"]


def test_single_leaf_stats():
    plan = synthesize(wf("[a ? x] tt"), Mode.BASELINE)
    assert plan_stats(plan) == {"hubs": 0, "leaves": 1, "depth": 1}


def test_degenerate_plans():
    assert isinstance(synthesize(wf("tt"), Mode.MULTI).root, TruthPlan)
    assert isinstance(synthesize(wf("ff"), Mode.MULTI).root, FalsityPlan)
    # closed top-level conditionals resolve statically
    assert isinstance(synthesize(wf("if 1 == 1 then ff else tt"), Mode.RECONF).root, FalsityPlan)
    assert isinstance(synthesize(wf("if 1 == 2 then ff else tt"), Mode.RECONF).root, TruthPlan)


def test_truth_conjuncts_resolved_inline():
    plan = synthesize(wf("tt & [a ? x] ff & tt"), Mode.BASELINE)
    # single live conjunct collapses: no hub with one child
    assert isinstance(plan.root, NecNode)


def test_falsity_conjunct_collapses_plan():
    assert isinstance(synthesize(wf("[a ? x] ff & ff"), Mode.MULTI).root, FalsityPlan)


def test_leaf_multiset_identical_across_modes():
    from genrand import random_formula

    rng = random.Random(4)
    for _ in range(200):
        formula = check_wellformed(random_formula(rng, depth=rng.randint(0, 5)))
        per_mode = [
            Counter(leaf_actions(synthesize(formula, mode).root)) for mode in Mode
        ]
        assert per_mode[0] == per_mode[1] == per_mode[2]


def test_multi_has_no_more_hubs_than_baseline():
    from genrand import random_formula

    rng = random.Random(6)
    nested_seen = 0
    for _ in range(200):
        formula = check_wellformed(random_formula(rng, depth=rng.randint(0, 5)))
        base = plan_stats(synthesize(formula, Mode.BASELINE))
        multi = plan_stats(synthesize(formula, Mode.MULTI))
        assert multi["hubs"] <= base["hubs"]
        assert multi["leaves"] == base["leaves"]
        if multi["hubs"] < base["hubs"]:
            nested_seen += 1
    assert nested_seen  # nested conjunctions actually occurred


def test_baseline_hubs_strictly_binary():
    from genrand import random_formula

    rng = random.Random(8)

    def check(node):
        if isinstance(node, Hub):
            assert len(node.children) == 2
            for child in node.children:
                check(child)

    for _ in range(200):
        formula = check_wellformed(random_formula(rng, depth=rng.randint(0, 5)))
        check(synthesize(formula, Mode.BASELINE).root)


def test_multi_hubs_never_nest():
    from genrand import random_formula

    rng = random.Random(9)

    def check(node):
        if isinstance(node, Hub):
            assert all(not isinstance(c, Hub) for c in node.children)

    for _ in range(200):
        formula = check_wellformed(random_formula(rng, depth=rng.randint(0, 5)))
        check(synthesize(formula, Mode.MULTI).root)


def test_render_plan_shape(predecessor):
    plan = synthesize(instantiated_body(predecessor), Mode.MULTI)
    lines = render_plan(plan).splitlines()
    assert lines[0] == "hub"
    assert len(lines) == 4
    assert all(line.startswith("  leaf [") for line in lines[1:])
