"""
Certifying and refuting non-leaf criteria
=========================================

"""

import json

from nonleaf.blocks import Block, lens_block
from nonleaf.criteria import check_non_periodic, check_non_repeating, check_theorem_C
from nonleaf.groups import FactorLabel
from nonleaf.manifest import load
from nonleaf.pattern import Catalog

m = load("odd_prime_ray_d6")
W = m.manifold

# each hypothesis gets its own verdict with witnesses
v = check_non_periodic(W, k=2, mode="homotopy", depth=m.depth)
print(v.hypothesis, "->", v.status)

# a theorem certificate bundles the verdicts and the assumptions it relied on
cert = check_theorem_C(W, depth=m.depth)
print(json.dumps(cert.to_json()["conclusion"], indent=2))
for a in cert.assumptions:
    print("assumes", a["guarantee"], "checked to depth", a["verified_depth"])

# two blocks sharing a Z_3 free factor break non-repetition
planted = Block.declare("planted", 3, [FactorLabel.Zn(3), FactorLabel.Zn(11)])
v = check_non_repeating(Catalog.of([lens_block(3, 1), lens_block(5, 1), planted]))
print(v.status, v.witnesses)
