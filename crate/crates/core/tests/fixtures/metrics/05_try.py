def parse(s):
    try:
        return int(s)
    except ValueError:
        return None
    except TypeError:
        return 0
    finally:
        print("done")
