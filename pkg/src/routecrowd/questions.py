"""Adaptive binary-question ordering over the selected landmarks.

The selected landmarks form a question library; asking them in a fixed
order wastes answers, so an ID3 tree is built instead: at every node the
unused landmark with the largest information strength (significance times
information gain over the surviving candidate routes, uniform route
probabilities) is asked next, and the yes/no answer splits the survivors.
Leaves are single candidate routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from .errors import InvalidTrace, NotDiscriminative
from .model import CandidateSet


@dataclass(frozen=True)
class QuestionNode:
    landmark_id: str
    yes: "TreeNode"
    no: "TreeNode"


@dataclass(frozen=True)
class RouteLeaf:
    route_index: int


TreeNode = Union[QuestionNode, RouteLeaf]

AnswerTrace = Sequence[tuple[str, bool]]


@dataclass(frozen=True)
class QuestionTree:
    root: TreeNode
    n_routes: int

    def depth(self) -> int:
        def walk(node) -> int:
            if isinstance(node, RouteLeaf):
                return 0
            return 1 + max(walk(node.yes), walk(node.no))
        return walk(self.root)

    def leaves(self) -> list[int]:
        out: list[int] = []

        def walk(node):
            if isinstance(node, RouteLeaf):
                out.append(node.route_index)
            else:
                walk(node.yes)
                walk(node.no)

        walk(self.root)
        return out

    def to_dict(self) -> dict:
        def walk(node):
            if isinstance(node, RouteLeaf):
                return {"kind": "leaf", "route": node.route_index}
            return {"kind": "question", "landmark": node.landmark_id,
                    "yes": walk(node.yes), "no": walk(node.no)}

        return {"n_routes": self.n_routes, "root": walk(self.root)}

    @classmethod
    def from_dict(cls, data: dict) -> "QuestionTree":
        def walk(node):
            if node["kind"] == "leaf":
                return RouteLeaf(node["route"])
            return QuestionNode(node["landmark"], walk(node["yes"]), walk(node["no"]))

        return cls(walk(data["root"]), data["n_routes"])


def information_strength(landmark_id: str, subset_memberships: Sequence[frozenset[str]],
                         significance: float) -> float:
    """Significance times the information gain of splitting on the landmark.

    Routes are taken as equally likely, so the entropy of a set of r
    survivors is log2(r); empty branches contribute zero.
    """
    total = len(subset_memberships)
    if total == 0:
        raise ValueError("empty route subset")
    yes = sum(1 for m in subset_memberships if landmark_id in m)
    no = total - yes
    gain = math.log2(total)
    if yes:
        gain -= (yes / total) * math.log2(yes)
    if no:
        gain -= (no / total) * math.log2(no)
    return significance * gain


def build_tree(selected: Iterable[str], routes: CandidateSet,
               significance: Mapping[str, float]) -> QuestionTree:
    """Build the ID3 question tree for a discriminative landmark set.

    Ties on information strength break toward higher significance, then
    lexicographic landmark id, keeping construction deterministic.
    """
    selected = sorted(set(selected))
    memberships = routes.memberships()

    def grow(indices: list[int], unused: list[str]) -> TreeNode:
        if len(indices) == 1:
            return RouteLeaf(indices[0])
        sub = [memberships[i] for i in indices]
        best = None
        for l in unused:
            passing = sum(1 for m in sub if l in m)
            if passing == 0 or passing == len(sub):
                continue  # carries no information for these survivors
            s = significance[l]
            strength = information_strength(l, sub, s)
            if best is None or (strength, s) > (best[0], best[1]) or \
               ((strength, s) == (best[0], best[1]) and l < best[2]):
                best = (strength, s, l)
        if best is None:
            # No remaining landmark separates the survivors: the selected
            # set was not discriminative to the candidate routes.
            raise NotDiscriminative(
                f"routes {indices} cannot be split by remaining landmarks")
        landmark = best[2]
        rest = [l for l in unused if l != landmark]
        yes_idx = [i for i in indices if landmark in memberships[i]]
        no_idx = [i for i in indices if landmark not in memberships[i]]
        return QuestionNode(landmark, grow(yes_idx, rest), grow(no_idx, rest))

    return QuestionTree(grow(list(range(len(routes))), selected), len(routes))


def next_question(tree: QuestionTree, trace: AnswerTrace) -> str | int:
    """Walk the tree by the trace; return the next landmark to ask, or the
    resolved route index if the trace reaches a leaf."""
    node = tree.root
    for landmark_id, answer in trace:
        if isinstance(node, RouteLeaf):
            raise InvalidTrace("trace continues past a leaf")
        if node.landmark_id != landmark_id:
            raise InvalidTrace(
                f"expected question {node.landmark_id}, trace has {landmark_id}")
        node = node.yes if answer else node.no
    if isinstance(node, RouteLeaf):
        return node.route_index
    return node.landmark_id
