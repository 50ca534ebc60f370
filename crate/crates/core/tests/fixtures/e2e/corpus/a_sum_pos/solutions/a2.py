n = int(input())
vals = [int(t) for t in input().split()]
s = 0
c = 0
i = 0
while i < n:
    if vals[i] > 0:
        s += vals[i]
    if vals[i] < 0:
        c += 1
    i += 1
print(s, c)
