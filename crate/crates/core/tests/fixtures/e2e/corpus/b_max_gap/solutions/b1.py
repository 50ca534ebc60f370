a = list(map(int, input().split()))
best = 0
for i in range(len(a) - 1):
    d = abs(a[i + 1] - a[i])
    if d > best:
        best = d
print(best)
