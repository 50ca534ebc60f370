n = int(input())
total = 0
for i in range(n):
    if i % 2:
        total += i
print(total)
