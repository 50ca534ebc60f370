import sys
vals = list(map(int, sys.stdin.readline().split()))
gap = 0
prev = None
for v in vals:
    if prev is not None and abs(v - prev) > gap:
        gap = abs(v - prev)
    prev = v
print(gap)
