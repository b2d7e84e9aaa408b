"""Constraint forms with their expected update strategy.

``source`` is "doc" for forms quoted as worked examples in the strategy
definitions, "rule" for forms derived from the same definitions.
"""

GOLDEN = [
    # (range, strategy, source)
    ("^1.2.3", "balanced", "doc"),
    ("^2.3.4", "balanced", "doc"),
    ("1.x.x", "balanced", "doc"),
    ("~1.2.3", "restrictive", "doc"),
    ("~2.3.4", "restrictive", "doc"),
    ("1.2.x", "restrictive", "doc"),
    ("1.2.3", "restrictive", "doc"),
    ("*", "permissive", "doc"),
    ("latest", "permissive", "doc"),
    (">=1.2.3", "permissive", "doc"),
    ("0.2.3", "balanced", "doc"),
    ("^0.2.3", "permissive", "doc"),
    ("~0.2.3", "permissive", "doc"),
    ("1.x", "balanced", "rule"),
    ("1", "balanced", "rule"),
    ("^1.2", "balanced", "rule"),
    ("^1.x", "balanced", "rule"),
    ("~1", "balanced", "rule"),
    (">=1.2.3 <2.0.0", "balanced", "rule"),
    ("1.2.3 - 1.9.0", "balanced", "rule"),
    ("~1.2", "restrictive", "rule"),
    ("=1.2.3", "restrictive", "rule"),
    ("v1.2.3", "restrictive", "rule"),
    ("1.2", "restrictive", "rule"),
    (">=1.2.3 <1.3.0", "restrictive", "rule"),
    ("1.2.3 - 1.2.9", "restrictive", "rule"),
    ("", "permissive", "rule"),
    ("x", "permissive", "rule"),
    (">1.2.3", "permissive", "rule"),
    ("1.2.3 - 2.0.0", "permissive", "rule"),
    ("1.2.3 || 3.0.0", "permissive", "rule"),
    ("^1.0.0 || ^2.0.0", "permissive", "rule"),
    ("^0.0.3", "balanced", "rule"),
    ("=0.2.3", "balanced", "rule"),
    ("0.x", "permissive", "rule"),
    ("0.2.x", "permissive", "rule"),
    ("~0.2", "permissive", "rule"),
    (">=0.2.3", "permissive", "rule"),
    ("<2.0.0", "permissive", "rule"),
]
