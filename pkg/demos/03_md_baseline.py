"""Minimum-distance decoding on the synchronized PLC channel, with and without erasures."""

from permdecode.codes import CodeFamily, enumerate_code
from permdecode.harness import MdDecoder, evaluate_bler, plc_sync_grid

cb = enumerate_code(CodeFamily("tenengolts_even", 6))
plain, erasure = MdDecoder(cb, erasure=False), MdDecoder(cb, erasure=True)
print(" p_bg     plain    erasure")
for k, params in enumerate(plc_sync_grid(6)):
    a = evaluate_bler(plain, cb, params, trials=50_000, seed=k)
    b = evaluate_bler(erasure, cb, params, trials=50_000, seed=k)
    print(f"{params.p_bg:.3f}  {a.bler:.2e}  {b.bler:.2e}")
