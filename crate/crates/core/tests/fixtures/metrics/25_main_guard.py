def read_ints():
    return list(map(int, input().split()))


def solve(nums):
    best = 0
    for i, a in enumerate(nums):
        for b in nums[i + 1:]:
            if a + b > best and a != b:
                best = a + b
    return best


if __name__ == "__main__":
    print(solve(read_ints()))
