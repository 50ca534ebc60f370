MOD = 10**9 + 7


def mul(a, b):
    return a * b % MOD


a, b = map(int, input().split())
print(mul(a, b))
