"""Trace subgroups predicted from cohomological data on tori and surfaces.

The calculator turns a closed two-form into the list of real numbers that
generate the range of the trace on projections, then reduces the list to
independent generators over Z.
"""

from __future__ import annotations

from twistlab.trace_range import subgroup_membership, trace_range

for spec in (
    {"case": "surface", "theta": 0.3},
    {"case": "3d", "omega": [[1, 2, 0.8]]},
    {"case": "4d", "omega": [[0, 1, 0.37], [2, 3, 0.61]]},
):
    S = trace_range(spec)
    print(f"{spec['case']:8s} raw {S.raw_generators}")
    print(f"{'':8s} reduced {S.generators}")

S = trace_range({"case": "surface", "theta": 0.3})
for x in (0.9, 0.5, 0.05):
    m = subgroup_membership(x, S)
    print(f"{x} member={m.member} coefficients={m.coefficients} distance={m.distance:.2e}")
