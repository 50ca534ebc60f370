best = -1


def consider(v):
    global best
    if v > best:
        best = v


for tok in input().split():
    consider(int(tok))
print(best)
