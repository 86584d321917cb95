"""
The modification YAML dialect
=============================

Parse modification documents at all three scopes, clamp them to the allowed
change range, and serialize back to the compact wire form (decreases as
fractions, nothing for "no change").
"""

from trajtalk import clamp_spec, parse_spec, serialize_spec

# A single utterance can touch several scopes at once.
text = """\
global:
    velocity: 2.0
mouth:
    attract: 1/2.0
    force: 1/1.25
waypoint 4:
    velocity: 3.0
"""
spec = parse_spec(text)
print("global velocity:", spec.global_.velocity)
print("mouth attract:", spec.landmarks["mouth"].attract)
print("waypoint 4 velocity:", spec.waypoints[4].velocity)

# Interpreter output is clamped into [1/3, 3] before it is applied.
wild = parse_spec("global:\n    velocity: 9.0\nmouth:\n    attract: 1/100.0")
tamed = clamp_spec(wild)
print("\nclamped:", tamed.global_.velocity, tamed.landmarks["mouth"].attract)

# Serialization is compact and canonical: only changed fields, decreases as
# 1/x fractions, and the clarification flag spelled out whenever the global
# entry exists. parse(serialize(s)) reproduces s bit-for-bit.
print("\n" + serialize_spec(spec))
assert parse_spec(serialize_spec(spec)) == spec
