"""
Single-state convertibility tests
=================================

"""

import numpy as np

from cohkit import (BlochVector, mixed_to_pure_convertible, pure_conversion_channel,
                    pure_convertible, qubit_ico_convertible, state_to_bloch)
from cohkit.sio import apply_channel

# pure to pure: the source must be at least as coherent as the target
src, dst = np.sqrt([0.6, 0.4]), np.sqrt([0.8, 0.2])
print("pure conversion possible:", pure_convertible(src, dst))
channel = pure_conversion_channel(src, dst)
print("image:\n", np.round(apply_channel(channel, src).real, 6))

# the qubit criterion in Bloch coordinates agrees on pure states
r, s = state_to_bloch(src), state_to_bloch(dst)
print("Bloch source", np.round(r.as_array(), 4), "target", np.round(s.as_array(), 4))
print("qubit ICO test:", qubit_ico_convertible(r, s))
print("incoherent source to coherent target:",
      qubit_ico_convertible(BlochVector(0, 0, 0.5), BlochVector(0.3, 0, 0)))

# mixed to pure: each incoherent block must itself be pure and coherent enough
a = np.array([np.sqrt(0.6), np.sqrt(0.4), 0, 0])
b = np.array([0, 0, np.sqrt(0.7), np.sqrt(0.3)])
rho = 0.5 * np.outer(a, a) + 0.5 * np.outer(b, b)
target = np.sqrt([0.8, 0.2, 0, 0])
print("block-diagonal mixture to target:", mixed_to_pure_convertible(rho, target))

# a coherent but mixed block: the support partition rejects it, the search
# finds the split into single levels that reaches an incoherent target
mixed = np.array([[0.5, 0.1], [0.1, 0.5]])
for mode in ("support", "search"):
    print(f"  {mode:>7}:", mixed_to_pure_convertible(mixed, [1, 0], partition=mode))
