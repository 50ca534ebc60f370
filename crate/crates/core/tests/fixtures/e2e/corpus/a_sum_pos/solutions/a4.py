def main():
    n = int(input())
    a = list(map(int, input().split()))
    res = [0, 0]
    for k in range(n):
        v = a[k]
        if v > 0:
            res[0] += v
        else:
            if v < 0:
                res[1] += 1
    print(*res)


main()
