"""
Mapping two pure states at once
===============================

A single strictly incoherent channel has to send phi to alpha and psi to beta
simultaneously.  This walks through a random instance that is feasible by
construction: checking its certificate, building the channel, and then
rediscovering a certificate from the states alone.
"""

import numpy as np

from cohkit import (brute_force_feasible, build_channel_from_certificate, canonicalize,
                    classify_channel, search_certificate, verify_certificate)
from cohkit.preorder import PairInstance, channel_images_error
from cohkit.sampling import random_certificate_instance

rng = np.random.default_rng(14)
inst, cert = random_certificate_instance(5, rng)
for name in ("phi", "psi", "alpha", "beta"):
    print(f"{name:>5}:", np.round(np.abs(getattr(inst, name)) ** 2, 3))

# the support pattern of the four states fixes the block layout
_, _, _, layout = canonicalize(inst)
print("block sizes r, s1, s2, t2:", layout.r, layout.s1, layout.s2, layout.t2)

report = verify_certificate(inst, cert)
print("certificate:", report.message)

channel = build_channel_from_certificate(inst, cert)
print("channel class:", classify_channel(channel), "with", len(channel), "Kraus operators")
print("worst image error:", channel_images_error(channel, inst))

# the search only sees the states
found = search_certificate(inst)
print("search found a certificate:", found is not None,
      "| ratio", None if found is None else np.round(found.ratio_t, 4))

# in two dimensions a numerical oracle can double-check small cases
s = 1 / np.sqrt(2)
plus = np.array([s, s])
impossible = PairInstance(plus, plus, np.array([1.0, 0]), np.array([0, 1.0]))
print("equal inputs to different outputs feasible:", brute_force_feasible(impossible)[0])
