def total(rows):
    s = 0
    for r in rows:
        while r > 0:
            s += r
            r -= 1
    return s
