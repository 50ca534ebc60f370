class Outer:
    class Inner:
        def m(self, x):
            return x or 0

    def n(self):
        for _ in range(3):
            pass
