items = input().split()
first = items[0]
del items[0]
print(first, len(items))
