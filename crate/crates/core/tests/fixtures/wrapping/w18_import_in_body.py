n = int(input())
from math import comb
print(comb(2 * n, n))
