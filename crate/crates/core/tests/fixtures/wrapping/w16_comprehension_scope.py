n = int(input())
grid = [[i * j for j in range(n)] for i in range(n)]
print(max(max(row) for row in grid))
