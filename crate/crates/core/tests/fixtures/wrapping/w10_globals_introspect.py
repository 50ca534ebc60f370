name = input().strip()
value = 42
print(globals().get(name, "missing"))
