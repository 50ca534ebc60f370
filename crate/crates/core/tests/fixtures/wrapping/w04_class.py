import sys

LIMIT = int(sys.stdin.readline())


class Box:
    cap = LIMIT

    def fits(self, x):
        return x <= self.cap


vals = list(map(int, sys.stdin.readline().split()))
print(sum(1 for v in vals if Box().fits(v)))
