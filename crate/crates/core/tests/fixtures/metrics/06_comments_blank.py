def f(x):
    # leading comment

    y = x * 2  # trailing comment
    s = "# not a comment"
    # another

    return y, s
