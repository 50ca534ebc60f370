base = int(input())
adders = [lambda x, k=k: x + k + base for k in range(3)]
print(*[f(1) for f in adders])
