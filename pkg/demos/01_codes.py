"""Build the permutation codes and check their distance properties."""

from permdecode.codes import CodeFamily, enumerate_code, min_hamming_distance, min_ulam_distance
from permdecode.perm import apply_translocation, parity, tenengolts_checksum

for tag, n in [("tenengolts", 6), ("tenengolts_even", 6), ("tenengolts_even", 7), ("interleaved", 9)]:
    cb = enumerate_code(CodeFamily(tag, n))
    print(f"{cb.family.label:>6}: {len(cb):5d} codewords, first {cb[1]}")

c6e = enumerate_code(CodeFamily("tenengolts_even", 6))
w = c6e[7]
print(f"\n{w}: parity={parity(w)}, checksum={tenengolts_checksum(w)}")
print("min Hamming distance of C6e:", min_hamming_distance(c6e))

il9 = enumerate_code(CodeFamily("interleaved", 9))
print("min Ulam distance of C9IL:", min_ulam_distance(il9))

# a translocation moves one symbol, so it leaves the interleaved code
moved = apply_translocation(il9[1], 2, 8)
print(f"{il9[1]} -> {moved}: still a codeword? {moved in il9}")
