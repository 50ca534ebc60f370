data = list(map(int, input().split()))
if (n := len(data)) > 3:
    print("long", n)
else:
    print("short", n)
