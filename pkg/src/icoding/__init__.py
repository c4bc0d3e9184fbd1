"""Interactive coding over adversarial channels, at desk scale.

Subpackages and modules:

- ``tree``: canonical-form protocol instances and subtree wire encodings
- ``ecc``: Reed-Solomon codes over prime fields and the seeded hash family
- ``channel``: round-accurate adversarial channel engine and strategies
- ``base_decoders``: list-decodable building blocks (RS exchange, oracle)
- ``reduction``: unique-decoding reductions built on a list decoder
- ``intersect``: tree-intersection protocols and their data structures
- ``boosting``: meta-round boosting of short-block list decoders
- ``harness``: CLI for trials, sweeps and benches
"""

__version__ = "0.1.0"
