def check(a, b, c):
    if a and b or c:
        return True
    return a and b and c
