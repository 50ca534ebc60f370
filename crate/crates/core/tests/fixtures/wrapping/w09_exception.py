x = int(input())
print(10 // x)
