"""Send codewords through the PLC and rank-modulation channels."""

import numpy as np

from permdecode.perm import perm_to_matrix
from permdecode.plc import PlcErrorPattern, PlcParams, apply_error_pattern, transmit
from permdecode.rm import RmParams, default_levels, encode_charges, perturb, read_ranking

rng = np.random.default_rng(5)
word = (1, 2, 4, 3)
print("codeword matrix:\n", perm_to_matrix(word))

# a hand-made pattern: insert a 1 in row 1 after the last symbol, drop symbol 2, row 2 stuck on
pattern = PlcErrorPattern(insertions={5: [1]}, deletions=frozenset({2}), pfd_rows=frozenset({2}))
print("deterministic corruption:\n", apply_error_pattern(word, pattern, PlcParams(c_max=7)).bits)

noisy = PlcParams(p_bg=0.05, p_im=0.05, p_pfd=0.05, p_i=0.05, p_d=0.05, c_max=7)
out = transmit(word, noisy, rng)
print(f"random output ({out.occupied} columns occupied):\n", out.bits)

levels = default_levels(9)
ranking = (1, 2, 5, 3, 4, 9, 6, 8, 7)
charges = encode_charges(ranking, levels)
print("\ncharges:", charges)
params = RmParams(sigma1=0.2, sigma2=1.0, p=0.001, levels=levels)
read = perturb(charges, params, rng)
print("read back:", np.round(read, 2), "->", read_ranking(read))
