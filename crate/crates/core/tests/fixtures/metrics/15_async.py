async def fetch(urls):
    async for u in urls:
        if u:
            yield u
